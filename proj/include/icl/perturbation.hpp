#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "icl/corpus.hpp"
#include "icl/prompt.hpp"

namespace icl {

enum class TemplateVariantKind { standard, random_fixed, random_nonfixed, swap, named };

struct TemplatePair {
    std::string in;
    std::string out;
};

// Per-entry template assignment: entries[i] wraps demonstration i and the
// last entry wraps the test stub.
struct TemplateVariant {
    TemplateVariantKind kind = TemplateVariantKind::standard;
    std::vector<TemplatePair> entries;
};

// Cue words are the text between a segment start and the ':' that precedes
// each "{}" slot ("Article: {}\n" has the single cue "Article").
std::vector<std::string> extract_cues(const std::string& tmpl);
std::string replace_cues(const std::string& tmpl, const std::vector<std::string>& cues);

// Template with cue words and their colons removed; slots, spacing and
// newlines survive untouched. Two variants share structure exactly when
// their stripped forms are identical strings.
std::string strip_cues(const std::string& tmpl);

TemplateVariant standard_variant(const TaskSpec& task, int demo_count);

// Cues replaced by 15 random lowercase letters; fixed reuses one draw for
// every entry, nonfixed draws per entry. Deterministic in seed.
TemplateVariant gen_random_template(const TaskSpec& task, int demo_count, uint64_t seed,
                                    bool fixed);

// Rotates the cue sequence [template_in cues..., template_out cue] right by
// one, exchanging the two cues of single-slot tasks. Identical cues error.
TemplateVariant swap_templates(const TaskSpec& task, int demo_count);

// Transcribed fixed sets "template1".."template4"; 1 and 3 are
// non-repetitive (distinct cues per entry), 2 and 4 repeat one pair.
// Single-slot tasks only; supports up to 3 demonstrations plus the test.
TemplateVariant named_template_set(const TaskSpec& task, int demo_count,
                                   const std::string& which);

PromptComponents make_components(const TaskSpec& task, const std::vector<DatasetRecord>& demos,
                                 const DatasetRecord& test, const TemplateVariant& variant);

}  // namespace icl
