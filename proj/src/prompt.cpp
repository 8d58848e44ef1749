#include "icl/prompt.hpp"

#include <cctype>
#include <stdexcept>
#include <unordered_set>

#include "icl/rng.hpp"
#include "json.hpp"

namespace icl {

const char* to_string(TokenClass c) {
    switch (c) {
        case TokenClass::BOS: return "BOS";
        case TokenClass::INSTR: return "INSTR";
        case TokenClass::TEMP_IN: return "TEMP_IN";
        case TokenClass::TEMP_OUT: return "TEMP_OUT";
        case TokenClass::COLON: return "COLON";
        case TokenClass::NEWLINE: return "NEWLINE";
        case TokenClass::STOP: return "STOP";
        case TokenClass::CONT: return "CONT";
        case TokenClass::LABEL: return "LABEL";
        case TokenClass::TEST_IN: return "TEST_IN";
        case TokenClass::TEST_TEMP: return "TEST_TEMP";
    }
    return "?";
}

TokenClass token_class_from_string(const std::string& s) {
    for (int i = 0; i < kNumTokenClasses; ++i) {
        if (s == to_string((TokenClass)i)) return (TokenClass)i;
    }
    throw std::runtime_error("unknown token class name: \"" + s + "\"");
}

std::vector<TemplatePiece> parse_template(const std::string& tmpl) {
    std::vector<TemplatePiece> pieces;
    size_t pos = 0;
    size_t slot = tmpl.find("{}");
    if (slot == std::string::npos)
        throw std::runtime_error("template has no {} slot: \"" + tmpl + "\"");
    while (slot != std::string::npos) {
        if (slot > pos) pieces.push_back({false, tmpl.substr(pos, slot - pos)});
        pieces.push_back({true, ""});
        pos = slot + 2;
        slot = tmpl.find("{}", pos);
    }
    if (pos < tmpl.size()) pieces.push_back({false, tmpl.substr(pos)});
    return pieces;
}

std::vector<DatasetRecord> sample_demonstrations(const std::vector<DatasetRecord>& pool, int k,
                                                 uint64_t seed) {
    if (k < 0) throw std::runtime_error("negative demonstration count");
    if (k > (int)pool.size())
        throw std::runtime_error("requested " + std::to_string(k) + " demonstrations from " +
                                 std::to_string(pool.size()) + " records");
    std::vector<int> idx((int)pool.size());
    for (int i = 0; i < (int)idx.size(); ++i) idx[i] = i;
    Rng rng(seed);
    std::vector<DatasetRecord> out;
    out.reserve(k);
    for (int i = 0; i < k; ++i) {
        int j = i + (int)rng.bounded((uint64_t)(idx.size() - i));
        std::swap(idx[i], idx[j]);
        out.push_back(pool[idx[i]]);
    }
    return out;
}

PromptComponents make_components(const TaskSpec& task, const std::vector<DatasetRecord>& demos,
                                 const DatasetRecord& test) {
    PromptComponents pc;
    pc.instruction = task.instruction;
    for (const auto& d : demos) {
        PromptEntry e;
        e.template_in = task.template_in;
        e.template_out = task.template_out;
        e.text_a = d.text_a;
        e.text_b = d.text_b;
        if (d.label < 0 || d.label >= (int)task.verbalizers.size())
            throw std::runtime_error("demonstration label id " + std::to_string(d.label) +
                                     " out of range");
        e.label_text = task.verbalizers[d.label];
        pc.demos.push_back(std::move(e));
    }
    pc.test.template_in = task.template_in;
    pc.test.template_out = task.template_out;
    pc.test.text_a = test.text_a;
    pc.test.text_b = test.text_b;
    return pc;
}

namespace {

struct Emitter {
    BuiltPrompt& prompt;
    const Vocabulary& vocab;

    void text(const std::string& s, Origin origin, int demo) {
        for (auto& w : split_words(s)) {
            prompt.tokens.push_back(vocab.id(w));
            prompt.surfaces.push_back(std::move(w));
            prompt.origin.push_back(origin);
            prompt.demo_index.push_back(demo);
        }
    }
};

const std::string& slot_text(const PromptEntry& e, int slot_idx) {
    if (slot_idx == 0) return e.text_a;
    if (!e.text_b)
        throw std::runtime_error("template has two slots but the record lacks text_b");
    return *e.text_b;
}

}  // namespace

BuiltPrompt assemble_prompt(const TaskSpec& task, const PromptComponents& pc,
                            const Vocabulary& vocab) {
    BuiltPrompt prompt;
    Emitter emit{prompt, vocab};

    prompt.tokens.push_back(vocab.bos_id);
    prompt.surfaces.push_back(vocab.surface(vocab.bos_id));
    prompt.origin.push_back(Origin::bos);
    prompt.demo_index.push_back(kDemoIndexInstruction);

    emit.text(pc.instruction, Origin::instruction, kDemoIndexInstruction);

    for (int k = 0; k < (int)pc.demos.size(); ++k) {
        const auto& e = pc.demos[k];
        int slot_idx = 0;
        for (const auto& p : parse_template(e.template_in)) {
            if (p.is_slot) {
                emit.text(slot_text(e, slot_idx++), Origin::demo_input, k);
            } else {
                emit.text(p.text, Origin::demo_template_in, k);
            }
        }
        for (const auto& p : parse_template(e.template_out)) {
            if (p.is_slot) {
                emit.text(e.label_text, Origin::demo_label, k);
            } else {
                emit.text(p.text, Origin::demo_template_out, k);
            }
        }
    }

    prompt.test_start = (int)prompt.tokens.size();
    {
        const auto& e = pc.test;
        int slot_idx = 0;
        for (const auto& p : parse_template(e.template_in)) {
            if (p.is_slot) {
                emit.text(slot_text(e, slot_idx++), Origin::test_input, kDemoIndexTest);
            } else {
                emit.text(p.text, Origin::test_template_in, kDemoIndexTest);
            }
        }
        // template_out contributes only its prefix before the label slot
        for (const auto& p : parse_template(e.template_out)) {
            if (p.is_slot) break;
            emit.text(p.text, Origin::test_template_out, kDemoIndexTest);
        }
    }

    prompt.spans = classify_spans(prompt, task);
    return prompt;
}

SpanMap classify_spans(const BuiltPrompt& prompt, const TaskSpec& task) {
    std::unordered_set<std::string> stopset(task.stopwords.begin(), task.stopwords.end());
    auto lower = [](std::string s) {
        for (auto& c : s) c = (char)std::tolower((unsigned char)c);
        return s;
    };
    SpanMap map;
    map.cls.reserve(prompt.tokens.size());
    map.demo_index = prompt.demo_index;
    for (size_t i = 0; i < prompt.tokens.size(); ++i) {
        const std::string& surf = prompt.surfaces[i];
        TokenClass c = TokenClass::CONT;
        switch (prompt.origin[i]) {
            case Origin::bos: c = TokenClass::BOS; break;
            case Origin::instruction: c = TokenClass::INSTR; break;
            case Origin::demo_label: c = TokenClass::LABEL; break;
            case Origin::test_input: c = TokenClass::TEST_IN; break;
            case Origin::test_template_in:
            case Origin::test_template_out: c = TokenClass::TEST_TEMP; break;
            case Origin::demo_input:
                c = stopset.count(lower(surf)) ? TokenClass::STOP : TokenClass::CONT;
                break;
            case Origin::demo_template_in:
            case Origin::demo_template_out:
                if (surf == ":") c = TokenClass::COLON;
                else if (surf == "\n") c = TokenClass::NEWLINE;
                else c = prompt.origin[i] == Origin::demo_template_in ? TokenClass::TEMP_IN
                                                                      : TokenClass::TEMP_OUT;
                break;
        }
        map.cls.push_back(c);
    }
    return map;
}

std::string render_text(const PromptComponents& pc) {
    std::string out = pc.instruction;
    auto fill = [](const PromptEntry& e, bool with_label) {
        std::string s;
        int slot_idx = 0;
        for (const auto& p : parse_template(e.template_in)) {
            if (p.is_slot) {
                s += slot_idx == 0 ? e.text_a : e.text_b.value();
                ++slot_idx;
            } else {
                s += p.text;
            }
        }
        for (const auto& p : parse_template(e.template_out)) {
            if (p.is_slot) {
                if (!with_label) break;
                s += e.label_text;
            } else {
                s += p.text;
            }
        }
        return s;
    };
    for (const auto& d : pc.demos) out += fill(d, true);
    out += fill(pc.test, false);
    while (!out.empty() && (out.back() == ' ' || out.back() == '\t')) out.pop_back();
    return out;
}

std::string dump_prompt_json(const BuiltPrompt& prompt) {
    nlohmann::json doc;
    doc["tokens"] = prompt.surfaces;
    auto& classes = doc["classes"];
    for (auto c : prompt.spans.cls) classes.push_back(to_string(c));
    doc["demo_index"] = prompt.spans.demo_index;
    doc["test_start"] = prompt.test_start;
    return doc.dump(1);
}

}  // namespace icl
