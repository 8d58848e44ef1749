#include "icl/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

#include "json.hpp"

namespace icl {

using nlohmann::json;

namespace {

std::string lower_ascii(std::string s) {
    for (auto& c : s) c = (char)std::tolower((unsigned char)c);
    return s;
}

int resolve_label(const json& v, const TaskSpec& task, const std::string& where) {
    if (v.is_string()) {
        const std::string s = v.get<std::string>();
        for (size_t i = 0; i < task.verbalizers.size(); ++i) {
            if (task.verbalizers[i] == s) return (int)i;
        }
        throw std::runtime_error(where + ": unknown label \"" + s + "\"");
    }
    if (v.is_number_integer()) {
        long long i = v.get<long long>();
        if (i < 0 || i >= (long long)task.verbalizers.size())
            throw std::runtime_error(where + ": label index " + std::to_string(i) +
                                     " out of range");
        return (int)i;
    }
    throw std::runtime_error(where + ": label must be a string or an index");
}

int resolve_label_str(const std::string& s, const TaskSpec& task, const std::string& where) {
    for (size_t i = 0; i < task.verbalizers.size(); ++i) {
        if (task.verbalizers[i] == s) return (int)i;
    }
    // numeric fallback mirrors the JSONL path
    if (!s.empty() && s.find_first_not_of("0123456789") == std::string::npos) {
        long long i = std::stoll(s);
        if (i >= 0 && i < (long long)task.verbalizers.size()) return (int)i;
        throw std::runtime_error(where + ": label index " + s + " out of range");
    }
    throw std::runtime_error(where + ": unknown label \"" + s + "\"");
}

void check_text_b(const DatasetRecord& rec, const TaskSpec& task, const std::string& where) {
    int slots = slot_count(task.template_in);
    if (slots == 2 && !rec.text_b.has_value())
        throw std::runtime_error(where + ": record lacks text_b but template_in has two slots");
}

std::vector<DatasetRecord> load_jsonl(const std::string& path, const TaskSpec& task) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open dataset file: " + path);
    std::vector<DatasetRecord> out;
    std::string line;
    int lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const std::string where = path + ":" + std::to_string(lineno);
        json doc;
        try {
            doc = json::parse(line);
        } catch (const std::exception& e) {
            throw std::runtime_error(where + ": invalid JSON: " + e.what());
        }
        if (!doc.contains("text") || !doc["text"].is_string())
            throw std::runtime_error(where + ": record lacks a \"text\" string");
        if (!doc.contains("label")) throw std::runtime_error(where + ": record lacks a label");
        DatasetRecord rec;
        rec.text_a = doc["text"].get<std::string>();
        if (doc.contains("text_b")) rec.text_b = doc["text_b"].get<std::string>();
        rec.label = resolve_label(doc["label"], task, where);
        check_text_b(rec, task, where);
        out.push_back(std::move(rec));
    }
    return out;
}

// Minimal RFC-style CSV: quoted fields may hold commas, doubled quotes, and
// newlines; the record's reported line is the one it starts on.
std::vector<std::vector<std::string>> parse_csv(std::istream& in, std::vector<int>& line_of) {
    std::vector<std::vector<std::string>> rows;
    std::string field;
    std::vector<std::string> row;
    bool quoted = false;
    bool any = false;
    int line = 1;
    int row_line = 1;
    char c;
    auto end_field = [&] {
        row.push_back(field);
        field.clear();
        any = true;
    };
    auto end_row = [&] {
        if (any || !row.empty()) {
            rows.push_back(row);
            line_of.push_back(row_line);
        }
        row.clear();
        any = false;
        row_line = line;
    };
    while (in.get(c)) {
        if (quoted) {
            if (c == '"') {
                if (in.peek() == '"') {
                    in.get(c);
                    field += '"';
                } else {
                    quoted = false;
                }
            } else {
                if (c == '\n') ++line;
                field += c;
            }
        } else if (c == '"') {
            quoted = true;
            any = true;
        } else if (c == ',') {
            end_field();
        } else if (c == '\n') {
            ++line;
            if (any || !field.empty() || !row.empty()) end_field();
            end_row();
        } else if (c != '\r') {
            field += c;
            any = true;
        }
    }
    if (any || !field.empty() || !row.empty()) {
        end_field();
        end_row();
    }
    return rows;
}

std::vector<DatasetRecord> load_csv(const std::string& path, const TaskSpec& task) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open dataset file: " + path);
    std::vector<int> line_of;
    auto rows = parse_csv(f, line_of);
    if (rows.empty()) throw std::runtime_error("dataset file is empty: " + path);
    const auto& header = rows[0];
    int col_text = -1, col_text_b = -1, col_label = -1;
    for (size_t i = 0; i < header.size(); ++i) {
        if (header[i] == "text") col_text = (int)i;
        else if (header[i] == "text_b") col_text_b = (int)i;
        else if (header[i] == "label") col_label = (int)i;
    }
    if (col_text < 0 || col_label < 0)
        throw std::runtime_error(path + ":1: header must name text and label columns");
    std::vector<DatasetRecord> out;
    for (size_t r = 1; r < rows.size(); ++r) {
        const std::string where = path + ":" + std::to_string(line_of[r]);
        const auto& row = rows[r];
        int need = std::max(col_text, col_label);
        if (col_text_b >= 0) need = std::max(need, col_text_b);
        if ((int)row.size() <= need)
            throw std::runtime_error(where + ": row has " + std::to_string(row.size()) +
                                     " fields, header has " + std::to_string(header.size()));
        DatasetRecord rec;
        rec.text_a = row[col_text];
        if (col_text_b >= 0 && !row[col_text_b].empty()) rec.text_b = row[col_text_b];
        rec.label = resolve_label_str(row[col_label], task, where);
        check_text_b(rec, task, where);
        out.push_back(std::move(rec));
    }
    return out;
}

bool has_suffix(const std::string& s, const std::string& suf) {
    return s.size() >= suf.size() && s.compare(s.size() - suf.size(), suf.size(), suf) == 0;
}

}  // namespace

int slot_count(const std::string& tmpl) {
    int n = 0;
    for (size_t pos = tmpl.find("{}"); pos != std::string::npos; pos = tmpl.find("{}", pos + 2))
        ++n;
    return n;
}

std::vector<DatasetRecord> load_dataset(const std::string& path, const TaskSpec& task) {
    std::vector<DatasetRecord> out;
    if (has_suffix(path, ".csv")) {
        out = load_csv(path, task);
    } else {
        out = load_jsonl(path, task);
    }
    if (out.empty()) throw std::runtime_error("dataset file is empty: " + path);
    return out;
}

void save_dataset_jsonl(const std::vector<DatasetRecord>& records, const TaskSpec& task,
                        const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write dataset file: " + path);
    for (const auto& rec : records) {
        json doc;
        doc["text"] = rec.text_a;
        if (rec.text_b) doc["text_b"] = *rec.text_b;
        doc["label"] = task.verbalizers.at(rec.label);
        f << doc.dump() << "\n";
    }
}

std::vector<std::string> load_stopword_list(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open stopword file: " + path);
    std::vector<std::string> out;
    std::unordered_set<std::string> seen;
    std::string line;
    while (std::getline(f, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        std::string entry = line == "\\n" ? "\n" : lower_ascii(line);
        if (seen.insert(entry).second) out.push_back(entry);
    }
    if (out.empty()) throw std::runtime_error("stopword file has no entries: " + path);
    return out;
}

TaskSpec load_task(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open task file: " + path);
    json doc;
    try {
        f >> doc;
    } catch (const std::exception& e) {
        throw std::runtime_error("invalid task JSON in " + path + ": " + e.what());
    }
    TaskSpec t;
    t.name = doc.value("name", "");
    if (doc.contains("verbalizers")) t.verbalizers = doc["verbalizers"].get<std::vector<std::string>>();
    t.instruction = doc.value("instruction", "");
    t.template_in = doc.value("template_in", "");
    t.template_out = doc.value("template_out", "");
    if (doc.contains("stopwords")) t.stopwords = doc["stopwords"].get<std::vector<std::string>>();
    auto violations = validate_task(t);
    if (!violations.empty())
        throw std::runtime_error("task file " + path + " is invalid: " + violations.front());
    return t;
}

void save_task(const TaskSpec& task, const std::string& path) {
    json doc;
    doc["name"] = task.name;
    doc["verbalizers"] = task.verbalizers;
    doc["instruction"] = task.instruction;
    doc["template_in"] = task.template_in;
    doc["template_out"] = task.template_out;
    doc["stopwords"] = task.stopwords;
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write task file: " + path);
    f << doc.dump(1) << "\n";
}

std::vector<std::string> validate_task(const TaskSpec& task) {
    std::vector<std::string> v;
    if (task.name.empty()) v.push_back("task name is empty");
    if (task.verbalizers.size() < 2) v.push_back("task needs at least two verbalizers");
    std::unordered_set<std::string> seen;
    for (const auto& s : task.verbalizers) {
        if (s.empty()) v.push_back("empty verbalizer");
        if (!seen.insert(s).second) v.push_back("duplicate verbalizer \"" + s + "\"");
    }
    int in_slots = slot_count(task.template_in);
    if (in_slots < 1 || in_slots > 2)
        v.push_back("template_in must have one or two {} slots, has " + std::to_string(in_slots));
    if (slot_count(task.template_out) != 1)
        v.push_back("template_out must have exactly one {} slot, has " +
                    std::to_string(slot_count(task.template_out)));
    return v;
}

}  // namespace icl
