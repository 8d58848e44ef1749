#pragma once

#include <string>
#include <unordered_map>
#include <vector>

namespace icl {

// Immutable token table. Word vocabularies map whole surface forms; subword
// vocabularies are matched greedily against the raw text (longest surface
// first) which covers byte-level tables as the degenerate case.
struct Vocabulary {
    enum class Kind { word, subword };

    Kind kind = Kind::word;
    std::vector<std::string> surfaces;
    std::unordered_map<std::string, int> index;
    int bos_id = -1;
    int newline_id = -1;

    int size() const { return (int)surfaces.size(); }
    bool contains(const std::string& s) const { return index.count(s) != 0; }
    int id(const std::string& s) const;        // throws on unknown surface
    const std::string& surface(int id) const;  // throws on out-of-range id
};

// Characters peeled off the tail of a whitespace-delimited word, each
// becoming its own token.
inline bool is_split_punct(char c) {
    return c == '.' || c == ',' || c == ':' || c == ';' || c == '?' || c == '!';
}

// Word splitter shared by the tokenizer and the span classifier: whitespace
// separated words, '\n' always as its own surface, trailing punctuation
// peeled one character at a time ("moon." -> "moon", ".").
std::vector<std::string> split_words(const std::string& text);

// Inverse rendering of split_words output: single spaces between words, no
// space before split punctuation, '\n' emitted literally with no padding.
std::string join_words(const std::vector<std::string>& words);

std::vector<int> tokenize(const std::string& text, const Vocabulary& vocab);

// Renders ids back to text (join_words rules); the BOS token is dropped.
std::string detokenize(const std::vector<int>& ids, const Vocabulary& vocab);

// Builds a word vocabulary: BOS ("<s>") and "\n" first, then the given
// surfaces deduplicated in first-occurrence order.
Vocabulary make_word_vocab(const std::vector<std::string>& surfaces);

// Every surface split_words can produce from the given texts.
Vocabulary build_vocab_from_texts(const std::vector<std::string>& texts);

Vocabulary load_vocab(const std::string& path);
void save_vocab(const Vocabulary& vocab, const std::string& path);

}  // namespace icl
