#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "icl/corpus.hpp"
#include "icl/tokenizer.hpp"

namespace icl {

enum class TokenClass : uint8_t {
    BOS,
    INSTR,
    TEMP_IN,
    TEMP_OUT,
    COLON,
    NEWLINE,
    STOP,
    CONT,
    LABEL,
    TEST_IN,
    TEST_TEMP,
};
constexpr int kNumTokenClasses = 11;

const char* to_string(TokenClass c);
TokenClass token_class_from_string(const std::string& s);

// Which component of the prompt a token's text came from. Classification is
// a pure function of origin, surface, and the task's stopword list.
enum class Origin : uint8_t {
    bos,
    instruction,
    demo_template_in,
    demo_input,
    demo_template_out,
    demo_label,
    test_template_in,
    test_input,
    test_template_out,
};

constexpr int kDemoIndexInstruction = -1;  // BOS and instruction tokens
constexpr int kDemoIndexTest = -2;         // trailing test span

struct SpanMap {
    std::vector<TokenClass> cls;
    std::vector<int> demo_index;
};

struct BuiltPrompt {
    std::vector<int> tokens;
    std::vector<std::string> surfaces;  // parallel to tokens
    std::vector<Origin> origin;         // parallel to tokens
    std::vector<int> demo_index;        // parallel to tokens
    SpanMap spans;
    int test_start = 0;  // first index of the test span
    int label_slot() const { return (int)tokens.size(); }
    int size() const { return (int)tokens.size(); }
};

// One demonstration (or the test stub) together with the template strings
// that wrap it. Kept per entry so template perturbations and token drops can
// differ across positions.
struct PromptEntry {
    std::string template_in;
    std::string template_out;
    std::string text_a;
    std::optional<std::string> text_b;
    std::string label_text;  // empty for the test stub
};

struct PromptComponents {
    std::string instruction;
    std::vector<PromptEntry> demos;
    PromptEntry test;
};

struct TemplatePiece {
    bool is_slot = false;
    std::string text;  // literal text when !is_slot
};

// Splits a template string at its "{}" slots. Throws if there is no slot.
std::vector<TemplatePiece> parse_template(const std::string& tmpl);

// Uniform draw of k records without replacement; order of draw preserved.
std::vector<DatasetRecord> sample_demonstrations(const std::vector<DatasetRecord>& pool, int k,
                                                 uint64_t seed);

PromptComponents make_components(const TaskSpec& task, const std::vector<DatasetRecord>& demos,
                                 const DatasetRecord& test);

// BOS, instruction, k wrapped demonstrations, then the test stub: the test
// input wrapped by template_in plus template_out cut just before its slot.
BuiltPrompt assemble_prompt(const TaskSpec& task, const PromptComponents& pc,
                            const Vocabulary& vocab);

SpanMap classify_spans(const BuiltPrompt& prompt, const TaskSpec& task);

// The raw prompt text the assembly corresponds to (trailing stub spaces
// trimmed, matching the tokenizer's whitespace normalization).
std::string render_text(const PromptComponents& pc);

// {"tokens": [...], "classes": [...], "demo_index": [...]}
std::string dump_prompt_json(const BuiltPrompt& prompt);

}  // namespace icl
