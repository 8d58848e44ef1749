#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "icl/prompt.hpp"
#include "icl/runtime.hpp"

namespace icl {

enum class AblationMode { representation, token_drop, random_subset };
enum class Direction { keep, drop };

// How the newline token rides along with the coarse classes. mask_if_either
// hides NEWLINE keys whenever STOP or any TEMP subclass is hidden (the
// default); own_class_only moves NEWLINE only when listed explicitly;
// never_mask keeps it visible unconditionally.
enum class NewlinePolicy { mask_if_either, own_class_only, never_mask };
enum class BosPolicy { keep, mask };
enum class DropScope { demos_and_test, demos_only };

// Set over the demo-side maskable classes. "TEMP" expands to TEMP_IN,
// TEMP_OUT, and COLON; NEWLINE may be listed explicitly. LABEL, INSTR, BOS,
// and the TEST classes are governed by dedicated policy fields and are
// rejected here.
struct ClassSet {
    uint32_t bits = 0;

    static ClassSet parse(const std::vector<std::string>& names);
    static ClassSet of(std::initializer_list<TokenClass> classes);

    bool contains(TokenClass c) const { return bits >> (int)c & 1u; }
    void insert(TokenClass c) { bits |= 1u << (int)c; }
    bool empty() const { return bits == 0; }
    bool covers_all_of(std::initializer_list<TokenClass> classes) const;
    std::vector<std::string> names() const;
};

struct SubsetSpec {
    std::string from = "all";  // "all", a coarse name, or a fine class name
    int n = 0;
    uint64_t seed = 0;
};

struct AblationSpec {
    AblationMode mode = AblationMode::representation;
    Direction direction = Direction::drop;
    ClassSet classes;
    bool include_labels = true;
    NewlinePolicy newline_policy = NewlinePolicy::mask_if_either;
    BosPolicy bos_policy = BosPolicy::keep;
    DropScope token_drop_scope = DropScope::demos_and_test;
    bool retain_test_cue = false;
    SubsetSpec subset;
};

// Representation-level plan: demo rows stay full causal; test rows keep the
// test span, INSTR, BOS and LABEL per policy, plus the classes that survive
// the keep/drop resolution. Targeted classes with no members in the prompt
// are recorded as warnings, not errors.
VisibilityPlan build_plan(const BuiltPrompt& prompt, const AblationSpec& spec);

// drop {X, Y} <-> keep {Z} over the partition {CONT, STOP, TEMP}. The input
// must target whole coarse classes; anything else is an error.
AblationSpec complement(const AblationSpec& spec);

// Token-level ablation on the prompt components. STOP and CONT remove words
// from demonstration input texts; TEMP strips cue words and colons from the
// templates of demos and, per scope, the test stub (newlines and labels
// survive; retain_test_cue leaves the stub's template_out untouched). The
// instruction is never modified.
PromptComponents drop_tokens(const PromptComponents& pc, const TaskSpec& task,
                             const AblationSpec& spec);

// Keep set = labels (always) plus a seeded uniform sample of min(n,
// available) positions of the requested class; a shortfall is recorded as a
// warning on the plan.
VisibilityPlan subset_plan(const BuiltPrompt& prompt, const SubsetSpec& subset);

}  // namespace icl
