#include "icl/synth.hpp"

#include <algorithm>
#include <stdexcept>

#include "icl/rng.hpp"
#include "icl/tokenizer.hpp"

namespace icl {

namespace {

const char* kVerbalizers[] = {"Alpha", "Beta", "Gamma", "Delta",
                              "Epsilon", "Zeta", "Eta", "Theta"};

const char* kLexicon[] = {
    "harbor", "meadow", "copper", "lantern", "orchard", "river",  "granite", "willow",
    "ember",  "saddle", "quarry", "falcon",  "cedar",   "marble", "thicket", "anchor",
    "barley", "canyon", "drift",  "fjord",   "garnet",  "hollow", "ivory",   "juniper",
    "kestrel", "ledge", "mosaic", "nectar",  "onyx",    "prairie", "quill",  "ridge",
    "spruce", "tundra", "umber",  "valley",  "walnut",  "yarrow",  "zephyr", "basalt",
};

const char* kFillers[] = {"the", "of", "and", "a", "in"};

std::string random_text(Rng& rng) {
    std::vector<std::string> words;
    int len = 6 + (int)rng.bounded(7);
    int comma_at = 2 + (int)rng.bounded((uint64_t)std::max(1, len - 3));
    for (int i = 0; i < len; ++i) {
        if (rng.bounded(4) == 0) words.push_back(kFillers[rng.bounded(5)]);
        else words.push_back(kLexicon[rng.bounded(sizeof(kLexicon) / sizeof(*kLexicon))]);
        if (i == comma_at && i + 1 < len) words.push_back(",");
    }
    words.push_back(".");
    return join_words(words);
}

}  // namespace

SynthBundle gen_synthetic(int classes, int n_train, int n_test, uint64_t seed,
                          const std::string& name) {
    if (classes < 2 || classes > 8)
        throw std::runtime_error("synthetic tasks support 2 to 8 classes");
    if (n_train < 1 || n_test < 1)
        throw std::runtime_error("synthetic splits need at least one record each");

    SynthBundle bundle;
    bundle.task.name = name;
    for (int c = 0; c < classes; ++c) bundle.task.verbalizers.push_back(kVerbalizers[c]);

    std::string cats;
    for (int c = 0; c < classes; ++c) {
        if (c > 0) cats += c + 1 == classes ? ", and " : ", ";
        cats += bundle.task.verbalizers[c];
    }
    bundle.task.instruction = "Classify the passages into the categories of " + cats + ".\n\n";
    bundle.task.template_in = "Input: {}\n";
    bundle.task.template_out = "Answer: {}\n\n";
    bundle.task.stopwords = {"the", "of", "and", "a", "in", ".", ",", "\n"};

    // labels cycle round-robin so every split is class-balanced and an
    // input-blind scorer sits at exactly 1/classes
    Rng rng(seed);
    for (int i = 0; i < n_train; ++i)
        bundle.train.push_back({random_text(rng), std::nullopt, i % classes});
    for (int i = 0; i < n_test; ++i)
        bundle.test.push_back({random_text(rng), std::nullopt, i % classes});
    return bundle;
}

}  // namespace icl
