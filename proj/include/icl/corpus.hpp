#pragma once

#include <optional>
#include <string>
#include <vector>

namespace icl {

struct DatasetRecord {
    std::string text_a;
    std::optional<std::string> text_b;
    int label = -1;  // index into TaskSpec::verbalizers
};

struct TaskSpec {
    std::string name;
    std::vector<std::string> verbalizers;  // position = label id
    std::string instruction;               // emitted verbatim before the first demo
    std::string template_in;               // one or two "{}" slots
    std::string template_out;              // exactly one "{}" slot
    std::vector<std::string> stopwords;    // lowercase surfaces, may include "\n"
};

// JSONL ({"text": ..., "text_b"?: ..., "label": ...}) or CSV with a header
// naming text[,text_b],label. Labels are verbalizer strings (exact,
// case-sensitive) or numeric indices. Errors carry path and line number.
std::vector<DatasetRecord> load_dataset(const std::string& path, const TaskSpec& task);

void save_dataset_jsonl(const std::vector<DatasetRecord>& records, const TaskSpec& task,
                        const std::string& path);

// One entry per line; blank lines skipped; the two-character escape "\n"
// denotes the newline token. Entries are lowercased and deduplicated keeping
// the first occurrence. An empty result is an error.
std::vector<std::string> load_stopword_list(const std::string& path);

TaskSpec load_task(const std::string& path);
void save_task(const TaskSpec& task, const std::string& path);

// Structural violations as data; empty means the task is usable.
std::vector<std::string> validate_task(const TaskSpec& task);

int slot_count(const std::string& tmpl);

}  // namespace icl
