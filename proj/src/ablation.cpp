#include "icl/ablation.hpp"

#include <algorithm>
#include <cctype>
#include <stdexcept>

#include "icl/perturbation.hpp"
#include "icl/rng.hpp"
#include "icl/tokenizer.hpp"

namespace icl {

namespace {

constexpr TokenClass kCoreClasses[] = {TokenClass::CONT, TokenClass::STOP, TokenClass::TEMP_IN,
                                       TokenClass::TEMP_OUT, TokenClass::COLON};

bool is_temp_fine(TokenClass c) {
    return c == TokenClass::TEMP_IN || c == TokenClass::TEMP_OUT || c == TokenClass::COLON;
}

}  // namespace

ClassSet ClassSet::of(std::initializer_list<TokenClass> classes) {
    ClassSet s;
    for (TokenClass c : classes) s.insert(c);
    return s;
}

bool ClassSet::covers_all_of(std::initializer_list<TokenClass> classes) const {
    for (TokenClass c : classes) {
        if (!contains(c)) return false;
    }
    return true;
}

ClassSet ClassSet::parse(const std::vector<std::string>& names) {
    ClassSet s;
    for (const auto& name : names) {
        if (name == "TEMP") {
            s.insert(TokenClass::TEMP_IN);
            s.insert(TokenClass::TEMP_OUT);
            s.insert(TokenClass::COLON);
            continue;
        }
        if (name == "LABEL")
            throw std::runtime_error("LABEL visibility is controlled by include_labels, "
                                     "not the class set");
        if (name == "BOS")
            throw std::runtime_error("BOS visibility is controlled by bos_policy, "
                                     "not the class set");
        if (name == "INSTR" || name == "TEST_IN" || name == "TEST_TEMP")
            throw std::runtime_error("class " + name + " is never ablated");
        TokenClass c = token_class_from_string(name);  // throws on unknown names
        s.insert(c);
    }
    return s;
}

std::vector<std::string> ClassSet::names() const {
    std::vector<std::string> out;
    for (int i = 0; i < kNumTokenClasses; ++i) {
        if (contains((TokenClass)i)) out.push_back(to_string((TokenClass)i));
    }
    return out;
}

// ---- representation-level plans --------------------------------------------

VisibilityPlan build_plan(const BuiltPrompt& prompt, const AblationSpec& spec) {
    if (spec.mode == AblationMode::token_drop)
        throw std::runtime_error("token-level specs rewrite the prompt; "
                                 "build_plan handles representation and subset specs");
    if (spec.mode == AblationMode::random_subset) return subset_plan(prompt, spec.subset);

    const int n = prompt.size();
    VisibilityPlan plan = VisibilityPlan::full_causal(n);
    plan.test_start = prompt.test_start;

    // canonical dropset: the keep direction inverts within the demo-side
    // classes, so drop {X, Y} and keep {Z} land on the same set for any split
    // of {CONT, STOP, TEMP} before the newline policy runs
    ClassSet drops;
    for (TokenClass c : kCoreClasses) {
        bool listed = spec.classes.contains(c);
        if (spec.direction == Direction::drop ? listed : !listed) drops.insert(c);
    }

    bool newline_masked = false;
    switch (spec.newline_policy) {
        case NewlinePolicy::mask_if_either:
            newline_masked = drops.contains(TokenClass::STOP) ||
                             drops.contains(TokenClass::TEMP_IN) ||
                             drops.contains(TokenClass::TEMP_OUT) ||
                             drops.contains(TokenClass::COLON);
            if (spec.classes.contains(TokenClass::NEWLINE))
                plan.warnings.push_back(
                    "newline_policy mask_if_either overrides the explicit NEWLINE listing");
            break;
        case NewlinePolicy::own_class_only:
            newline_masked = spec.direction == Direction::drop &&
                             spec.classes.contains(TokenClass::NEWLINE);
            break;
        case NewlinePolicy::never_mask:
            newline_masked = false;
            if (spec.classes.contains(TokenClass::NEWLINE))
                plan.warnings.push_back(
                    "newline_policy never_mask overrides the explicit NEWLINE listing");
            break;
    }
    if (newline_masked) drops.insert(TokenClass::NEWLINE);

    // targeting a class with no members is a no-op worth flagging, not an error
    for (int i = 0; i < kNumTokenClasses; ++i) {
        TokenClass c = (TokenClass)i;
        if (!spec.classes.contains(c)) continue;
        bool present = false;
        for (int k = 0; k < n && !present; ++k) present = prompt.spans.cls[k] == c;
        if (!present)
            plan.warnings.push_back(std::string("class ") + to_string(c) +
                                    " has no tokens in this prompt");
    }

    for (int q = plan.test_start; q < n; ++q) {
        for (int k = 0; k < plan.test_start && k <= q; ++k) {
            bool keep;
            switch (prompt.spans.cls[k]) {
                case TokenClass::INSTR: keep = true; break;
                case TokenClass::BOS: keep = spec.bos_policy == BosPolicy::keep; break;
                case TokenClass::LABEL: keep = spec.include_labels; break;
                default: keep = !drops.contains(prompt.spans.cls[k]); break;
            }
            if (!keep) plan.allowed[q][k] = 0;
        }
    }
    return plan;
}

AblationSpec complement(const AblationSpec& spec) {
    if (spec.mode == AblationMode::random_subset)
        throw std::runtime_error("subset specs have no complement");
    if (spec.classes.contains(TokenClass::NEWLINE))
        throw std::runtime_error("complement is defined over the partition {CONT, STOP, TEMP}; "
                                 "NEWLINE follows the newline_policy instead");
    bool any_temp = spec.classes.contains(TokenClass::TEMP_IN) ||
                    spec.classes.contains(TokenClass::TEMP_OUT) ||
                    spec.classes.contains(TokenClass::COLON);
    bool all_temp = spec.classes.covers_all_of(
        {TokenClass::TEMP_IN, TokenClass::TEMP_OUT, TokenClass::COLON});
    if (any_temp && !all_temp)
        throw std::runtime_error("complement is defined over the partition {CONT, STOP, TEMP}; "
                                 "partial TEMP subsets have no complement");

    AblationSpec out = spec;
    out.direction = spec.direction == Direction::drop ? Direction::keep : Direction::drop;
    out.classes = ClassSet{};
    if (!spec.classes.contains(TokenClass::CONT)) out.classes.insert(TokenClass::CONT);
    if (!spec.classes.contains(TokenClass::STOP)) out.classes.insert(TokenClass::STOP);
    if (!all_temp) {
        out.classes.insert(TokenClass::TEMP_IN);
        out.classes.insert(TokenClass::TEMP_OUT);
        out.classes.insert(TokenClass::COLON);
    }
    return out;
}

// ---- token-level ablation ----------------------------------------------------

namespace {

// removes words by stopword membership: keep_stop=false strips stopwords
// (STOP drop), keep_stop=true strips everything else (CONT drop)
std::string filter_words(const std::string& text, const TaskSpec& task, bool drop_stop,
                         bool drop_cont) {
    std::vector<std::string> kept;
    for (const auto& w : split_words(text)) {
        std::string lower = w;
        for (auto& ch : lower) ch = (char)std::tolower((unsigned char)ch);
        bool is_stop = std::find(task.stopwords.begin(), task.stopwords.end(), lower) !=
                       task.stopwords.end();
        if (is_stop ? drop_stop : drop_cont) continue;
        kept.push_back(w);
    }
    return join_words(kept);
}

}  // namespace

PromptComponents drop_tokens(const PromptComponents& pc, const TaskSpec& task,
                             const AblationSpec& spec) {
    if (spec.mode != AblationMode::token_drop)
        throw std::runtime_error("drop_tokens needs a token-level spec");
    for (TokenClass c : {TokenClass::NEWLINE, TokenClass::LABEL, TokenClass::BOS,
                         TokenClass::INSTR, TokenClass::TEST_IN, TokenClass::TEST_TEMP}) {
        if (spec.classes.contains(c))
            throw std::runtime_error(std::string("token-level ablation accepts only "
                                                 "{CONT, STOP, TEMP}; got ") +
                                     to_string(c));
    }
    bool any_temp = spec.classes.contains(TokenClass::TEMP_IN) ||
                    spec.classes.contains(TokenClass::TEMP_OUT) ||
                    spec.classes.contains(TokenClass::COLON);
    bool all_temp = spec.classes.covers_all_of(
        {TokenClass::TEMP_IN, TokenClass::TEMP_OUT, TokenClass::COLON});
    if (any_temp && !all_temp)
        throw std::runtime_error("token-level TEMP ablation drops whole templates; "
                                 "partial TEMP subsets are not supported");

    // keep direction = drop of the coarse complement
    bool drop_cont = spec.classes.contains(TokenClass::CONT);
    bool drop_stop = spec.classes.contains(TokenClass::STOP);
    bool drop_temp = all_temp;
    if (spec.direction == Direction::keep) {
        drop_cont = !drop_cont;
        drop_stop = !drop_stop;
        drop_temp = !drop_temp;
    }

    PromptComponents out = pc;  // instruction carried over untouched
    if (drop_stop || drop_cont) {
        for (auto& demo : out.demos) {
            demo.text_a = filter_words(demo.text_a, task, drop_stop, drop_cont);
            if (demo.text_b)
                demo.text_b = filter_words(*demo.text_b, task, drop_stop, drop_cont);
        }
        if (spec.token_drop_scope == DropScope::demos_and_test) {
            out.test.text_a = filter_words(out.test.text_a, task, drop_stop, drop_cont);
            if (out.test.text_b)
                out.test.text_b = filter_words(*out.test.text_b, task, drop_stop, drop_cont);
        }
    }
    if (drop_temp) {
        for (auto& demo : out.demos) {
            demo.template_in = strip_cues(demo.template_in);
            demo.template_out = strip_cues(demo.template_out);
        }
        if (spec.token_drop_scope == DropScope::demos_and_test) {
            out.test.template_in = strip_cues(out.test.template_in);
            if (!spec.retain_test_cue) out.test.template_out = strip_cues(out.test.template_out);
        }
    }
    return out;
}

// ---- fixed-budget random subsets ---------------------------------------------

VisibilityPlan subset_plan(const BuiltPrompt& prompt, const SubsetSpec& subset) {
    if (subset.n < 0) throw std::runtime_error("subset size must be non-negative");

    const int n = prompt.size();
    VisibilityPlan plan = VisibilityPlan::full_causal(n);
    plan.test_start = prompt.test_start;

    auto in_pool = [&](int k) {
        if (prompt.spans.demo_index[k] < 0) return false;  // instruction, BOS, test
        TokenClass c = prompt.spans.cls[k];
        if (c == TokenClass::LABEL) return false;  // labels are always kept
        if (subset.from == "all") return true;
        if (subset.from == "TEMP") return is_temp_fine(c);
        return std::string(to_string(c)) == subset.from;
    };
    if (subset.from != "all" && subset.from != "TEMP") {
        TokenClass c = token_class_from_string(subset.from);  // throws on unknown names
        if (c == TokenClass::LABEL || c == TokenClass::BOS || c == TokenClass::INSTR ||
            c == TokenClass::TEST_IN || c == TokenClass::TEST_TEMP)
            throw std::runtime_error("subset sampling draws from demo-side classes; got " +
                                     subset.from);
    }

    std::vector<int> pool;
    for (int k = 0; k < plan.test_start; ++k) {
        if (in_pool(k)) pool.push_back(k);
    }
    int take = std::min((int)pool.size(), subset.n);
    if (take < subset.n)
        plan.warnings.push_back("requested " + std::to_string(subset.n) + " positions from " +
                                subset.from + ", only " + std::to_string(pool.size()) +
                                " available");

    // seeded partial Fisher-Yates over the pool; first `take` entries win
    Rng rng(subset.seed);
    for (int i = 0; i < take; ++i) {
        int j = i + (int)rng.bounded((uint64_t)(pool.size() - i));
        std::swap(pool[i], pool[j]);
    }
    std::vector<uint8_t> kept(n, 0);
    for (int i = 0; i < take; ++i) kept[pool[i]] = 1;

    for (int q = plan.test_start; q < n; ++q) {
        for (int k = 0; k < plan.test_start && k <= q; ++k) {
            TokenClass c = prompt.spans.cls[k];
            bool keep = c == TokenClass::INSTR || c == TokenClass::BOS ||
                        c == TokenClass::LABEL || kept[k];
            if (!keep) plan.allowed[q][k] = 0;
        }
    }
    return plan;
}

}  // namespace icl
