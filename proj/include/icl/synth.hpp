#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "icl/corpus.hpp"

namespace icl {

struct SynthBundle {
    TaskSpec task;
    std::vector<DatasetRecord> train;
    std::vector<DatasetRecord> test;
};

// Deterministic classification corpus: texts are runs of lexicon words mixed
// with stopwords and punctuation, labels drawn uniformly. Useful for chance
// level checks and for generating structurally varied prompts in tests.
SynthBundle gen_synthetic(int classes, int n_train, int n_test, uint64_t seed,
                          const std::string& name = "synth");

}  // namespace icl
