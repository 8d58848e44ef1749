#include "icl/tokenizer.hpp"

#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace icl {

using nlohmann::json;

int Vocabulary::id(const std::string& s) const {
    auto it = index.find(s);
    if (it == index.end()) throw std::runtime_error("unknown token surface: \"" + s + "\"");
    return it->second;
}

const std::string& Vocabulary::surface(int id) const {
    if (id < 0 || id >= (int)surfaces.size())
        throw std::runtime_error("token id out of range: " + std::to_string(id));
    return surfaces[id];
}

std::vector<std::string> split_words(const std::string& text) {
    std::vector<std::string> out;
    std::string cur;
    auto flush = [&] {
        if (cur.empty()) return;
        size_t end = cur.size();
        while (end > 0 && is_split_punct(cur[end - 1])) --end;
        if (end > 0) out.push_back(cur.substr(0, end));
        for (size_t i = end; i < cur.size(); ++i) out.push_back(std::string(1, cur[i]));
        cur.clear();
    };
    for (char c : text) {
        if (c == '\n') {
            flush();
            out.push_back("\n");
        } else if (std::isspace((unsigned char)c)) {
            flush();
        } else {
            cur.push_back(c);
        }
    }
    flush();
    return out;
}

std::string join_words(const std::vector<std::string>& words) {
    std::string out;
    for (const auto& w : words) {
        if (w == "\n") {
            out += '\n';
        } else if (w.size() == 1 && is_split_punct(w[0])) {
            out += w;
        } else {
            if (!out.empty() && out.back() != '\n') out += ' ';
            out += w;
        }
    }
    return out;
}

namespace {

std::vector<int> tokenize_greedy(const std::string& text, const Vocabulary& vocab) {
    size_t max_len = 0;
    for (const auto& s : vocab.surfaces) max_len = std::max(max_len, s.size());
    std::vector<int> out;
    size_t i = 0;
    while (i < text.size()) {
        size_t take = std::min(max_len, text.size() - i);
        int id = -1;
        for (size_t len = take; len >= 1; --len) {
            auto it = vocab.index.find(text.substr(i, len));
            if (it != vocab.index.end()) {
                id = it->second;
                take = len;
                break;
            }
        }
        if (id < 0)
            throw std::runtime_error("no vocabulary surface matches text at byte " +
                                     std::to_string(i) + ": \"" + text.substr(i, 8) + "\"");
        out.push_back(id);
        i += take;
    }
    return out;
}

}  // namespace

std::vector<int> tokenize(const std::string& text, const Vocabulary& vocab) {
    if (vocab.kind == Vocabulary::Kind::subword) return tokenize_greedy(text, vocab);
    std::vector<int> out;
    for (const auto& w : split_words(text)) out.push_back(vocab.id(w));
    return out;
}

std::string detokenize(const std::vector<int>& ids, const Vocabulary& vocab) {
    if (vocab.kind == Vocabulary::Kind::subword) {
        std::string out;
        for (int id : ids) {
            if (id == vocab.bos_id) continue;
            out += vocab.surface(id);
        }
        return out;
    }
    std::vector<std::string> words;
    words.reserve(ids.size());
    for (int id : ids) {
        if (id == vocab.bos_id) continue;
        words.push_back(vocab.surface(id));
    }
    return join_words(words);
}

Vocabulary make_word_vocab(const std::vector<std::string>& surfaces) {
    Vocabulary v;
    v.kind = Vocabulary::Kind::word;
    auto push = [&](const std::string& s) {
        if (v.index.count(s)) return;
        v.index.emplace(s, (int)v.surfaces.size());
        v.surfaces.push_back(s);
    };
    push("<s>");
    push("\n");
    for (const auto& s : surfaces) {
        if (!s.empty()) push(s);
    }
    v.bos_id = v.index.at("<s>");
    v.newline_id = v.index.at("\n");
    return v;
}

Vocabulary build_vocab_from_texts(const std::vector<std::string>& texts) {
    std::vector<std::string> surfaces;
    for (const auto& t : texts) {
        for (auto& w : split_words(t)) surfaces.push_back(std::move(w));
    }
    return make_word_vocab(surfaces);
}

Vocabulary load_vocab(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open vocabulary file: " + path);
    json doc;
    try {
        f >> doc;
    } catch (const std::exception& e) {
        throw std::runtime_error("invalid vocabulary JSON in " + path + ": " + e.what());
    }
    Vocabulary v;
    std::string kind = doc.value("kind", "word");
    if (kind == "word") {
        v.kind = Vocabulary::Kind::word;
    } else if (kind == "subword") {
        v.kind = Vocabulary::Kind::subword;
    } else {
        throw std::runtime_error("unknown vocabulary kind: \"" + kind + "\"");
    }
    if (!doc.contains("surfaces") || !doc["surfaces"].is_array())
        throw std::runtime_error("vocabulary manifest lacks a surfaces array: " + path);
    for (const auto& s : doc["surfaces"]) {
        std::string surf = s.get<std::string>();
        if (v.index.count(surf))
            throw std::runtime_error("duplicate vocabulary surface: \"" + surf + "\"");
        v.index.emplace(surf, (int)v.surfaces.size());
        v.surfaces.push_back(surf);
    }
    if (!doc.contains("specials"))
        throw std::runtime_error("vocabulary manifest lacks specials: " + path);
    const auto& sp = doc["specials"];
    auto special_id = [&](const char* name) {
        if (!sp.contains(name))
            throw std::runtime_error(std::string("vocabulary specials lack \"") + name + "\"");
        std::string surf = sp[name].get<std::string>();
        auto it = v.index.find(surf);
        if (it == v.index.end())
            throw std::runtime_error(std::string("special \"") + name +
                                     "\" names a surface missing from the table");
        return it->second;
    };
    v.bos_id = special_id("bos");
    v.newline_id = special_id("newline");
    return v;
}

void save_vocab(const Vocabulary& vocab, const std::string& path) {
    json doc;
    doc["kind"] = vocab.kind == Vocabulary::Kind::word ? "word" : "subword";
    doc["surfaces"] = vocab.surfaces;
    doc["specials"] = {{"bos", vocab.surface(vocab.bos_id)},
                       {"newline", vocab.surface(vocab.newline_id)}};
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write vocabulary file: " + path);
    f << doc.dump(1) << "\n";
}

}  // namespace icl
