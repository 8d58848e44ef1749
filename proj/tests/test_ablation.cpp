#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>
#include <string>
#include <vector>

#include "icl/ablation.hpp"
#include "icl/prompt.hpp"

using namespace icl;

namespace {

TaskSpec news_task() {
    TaskSpec t;
    t.name = "news";
    t.verbalizers = {"World", "Sports", "Business", "Technology"};
    t.instruction = "Classify the news.\n\n";
    t.template_in = "Article: {}\n";
    t.template_out = "Answer: {}\n\n";
    t.stopwords = {"the", "into", "of", "and", ",", ".", "\n"};
    return t;
}

BuiltPrompt sample_prompt(const TaskSpec& task) {
    std::vector<DatasetRecord> demos = {{"The cat sat on the mat.", std::nullopt, 2},
                                        {"Dogs chase the ball into parks.", std::nullopt, 1}};
    DatasetRecord test{"First class to the moon.", std::nullopt, 0};
    PromptComponents pc = make_components(task, demos, test);
    std::vector<std::string> texts = {render_text(pc)};
    for (const auto& v : task.verbalizers) texts.push_back(v);
    return assemble_prompt(task, pc, build_vocab_from_texts(texts));
}

// a demo-side column has one visibility for every test row
bool column_visible(const VisibilityPlan& plan, int k) {
    REQUIRE(plan.test_start < plan.length);
    return plan.allowed[plan.test_start][k] != 0;
}

// classes whose demo-side columns the test rows can still see
std::set<TokenClass> visible_classes(const BuiltPrompt& p, const VisibilityPlan& plan) {
    std::set<TokenClass> out;
    for (int k = 0; k < plan.test_start; ++k) {
        if (column_visible(plan, k)) out.insert(p.spans.cls[k]);
    }
    return out;
}

bool has_warning(const VisibilityPlan& plan, const std::string& needle) {
    for (const auto& w : plan.warnings) {
        if (w.find(needle) != std::string::npos) return true;
    }
    return false;
}

AblationSpec rep_spec(Direction dir, std::initializer_list<TokenClass> classes) {
    AblationSpec spec;
    spec.mode = AblationMode::representation;
    spec.direction = dir;
    spec.classes = ClassSet::of(classes);
    return spec;
}

constexpr std::initializer_list<TokenClass> kTemp = {TokenClass::TEMP_IN, TokenClass::TEMP_OUT,
                                                     TokenClass::COLON};

}  // namespace

TEST_CASE("ClassSet parses names and expands TEMP") {
    ClassSet s = ClassSet::parse({"CONT", "STOP"});
    CHECK(s.contains(TokenClass::CONT));
    CHECK(s.contains(TokenClass::STOP));
    CHECK(!s.contains(TokenClass::TEMP_IN));

    ClassSet t = ClassSet::parse({"TEMP"});
    CHECK(t.contains(TokenClass::TEMP_IN));
    CHECK(t.contains(TokenClass::TEMP_OUT));
    CHECK(t.contains(TokenClass::COLON));
    CHECK(t.covers_all_of(kTemp));
    CHECK(!t.contains(TokenClass::NEWLINE));

    CHECK(ClassSet::parse({"NEWLINE"}).contains(TokenClass::NEWLINE));
    CHECK(ClassSet{}.empty());
    CHECK(!t.empty());

    CHECK(t.names() == std::vector<std::string>{"TEMP_IN", "TEMP_OUT", "COLON"});

    CHECK_THROWS_WITH(ClassSet::parse({"LABEL"}),
                      "LABEL visibility is controlled by include_labels, not the class set");
    CHECK_THROWS_WITH(ClassSet::parse({"BOS"}),
                      "BOS visibility is controlled by bos_policy, not the class set");
    CHECK_THROWS_WITH(ClassSet::parse({"INSTR"}), "class INSTR is never ablated");
    CHECK_THROWS_WITH(ClassSet::parse({"TEST_IN"}), "class TEST_IN is never ablated");
    CHECK_THROWS_AS(ClassSet::parse({"BANANA"}), std::runtime_error);
}

TEST_CASE("drop plans hide the targeted demo classes from test rows only") {
    TaskSpec task = news_task();
    BuiltPrompt p = sample_prompt(task);
    VisibilityPlan plan = build_plan(p, rep_spec(Direction::drop, {TokenClass::STOP}));

    CHECK(plan.test_start == p.test_start);
    validate_plan(plan, p.size());

    // demo rows stay full causal
    for (int q = 0; q < plan.test_start; ++q) {
        for (int k = 0; k <= q; ++k) CHECK(plan.allowed[q][k] == 1);
    }

    auto vis = visible_classes(p, plan);
    CHECK(!vis.count(TokenClass::STOP));
    CHECK(!vis.count(TokenClass::NEWLINE));  // mask_if_either rides with STOP
    CHECK(vis.count(TokenClass::CONT));
    CHECK(vis.count(TokenClass::TEMP_IN));
    CHECK(vis.count(TokenClass::TEMP_OUT));
    CHECK(vis.count(TokenClass::COLON));
    CHECK(vis.count(TokenClass::LABEL));
    CHECK(vis.count(TokenClass::INSTR));
    CHECK(vis.count(TokenClass::BOS));

    // test rows always see the test span itself
    for (int q = plan.test_start; q < plan.length; ++q) {
        for (int k = plan.test_start; k <= q; ++k) CHECK(plan.allowed[q][k] == 1);
    }
}

TEST_CASE("dropping CONT leaves newlines visible under mask_if_either") {
    TaskSpec task = news_task();
    BuiltPrompt p = sample_prompt(task);
    auto vis = visible_classes(p, build_plan(p, rep_spec(Direction::drop, {TokenClass::CONT})));
    CHECK(!vis.count(TokenClass::CONT));
    CHECK(vis.count(TokenClass::NEWLINE));  // neither STOP nor TEMP is dropped
    CHECK(vis.count(TokenClass::STOP));
    CHECK(vis.count(TokenClass::TEMP_IN));
}

TEST_CASE("dropping TEMP masks all three fine classes and the newline") {
    TaskSpec task = news_task();
    BuiltPrompt p = sample_prompt(task);
    auto vis = visible_classes(p, build_plan(p, rep_spec(Direction::drop, kTemp)));
    CHECK(!vis.count(TokenClass::TEMP_IN));
    CHECK(!vis.count(TokenClass::TEMP_OUT));
    CHECK(!vis.count(TokenClass::COLON));
    CHECK(!vis.count(TokenClass::NEWLINE));
    CHECK(vis.count(TokenClass::CONT));
    CHECK(vis.count(TokenClass::STOP));
}

TEST_CASE("keep direction inverts over the demo-side classes") {
    TaskSpec task = news_task();
    BuiltPrompt p = sample_prompt(task);
    auto vis = visible_classes(p, build_plan(p, rep_spec(Direction::keep, {TokenClass::CONT})));
    CHECK(vis.count(TokenClass::CONT));
    CHECK(!vis.count(TokenClass::STOP));
    CHECK(!vis.count(TokenClass::TEMP_IN));
    CHECK(!vis.count(TokenClass::TEMP_OUT));
    CHECK(!vis.count(TokenClass::COLON));
    CHECK(!vis.count(TokenClass::NEWLINE));  // STOP and TEMP land in the dropset
    CHECK(vis.count(TokenClass::LABEL));
    CHECK(vis.count(TokenClass::INSTR));
    CHECK(vis.count(TokenClass::BOS));
}

TEST_CASE("label and BOS policies control their columns") {
    TaskSpec task = news_task();
    BuiltPrompt p = sample_prompt(task);

    AblationSpec spec = rep_spec(Direction::drop, {TokenClass::STOP});
    spec.include_labels = false;
    auto vis = visible_classes(p, build_plan(p, spec));
    CHECK(!vis.count(TokenClass::LABEL));

    spec = rep_spec(Direction::drop, {TokenClass::STOP});
    spec.bos_policy = BosPolicy::mask;
    vis = visible_classes(p, build_plan(p, spec));
    CHECK(!vis.count(TokenClass::BOS));
    CHECK(vis.count(TokenClass::INSTR));  // instruction is never maskable
}

TEST_CASE("newline policies") {
    TaskSpec task = news_task();
    BuiltPrompt p = sample_prompt(task);

    // own_class_only: newline moves only when listed, and only when dropping
    AblationSpec spec = rep_spec(Direction::drop, {TokenClass::STOP});
    spec.newline_policy = NewlinePolicy::own_class_only;
    CHECK(visible_classes(p, build_plan(p, spec)).count(TokenClass::NEWLINE));

    spec = rep_spec(Direction::drop, {TokenClass::NEWLINE});
    spec.newline_policy = NewlinePolicy::own_class_only;
    auto vis = visible_classes(p, build_plan(p, spec));
    CHECK(!vis.count(TokenClass::NEWLINE));
    CHECK(vis.count(TokenClass::CONT));  // nothing else moves
    CHECK(vis.count(TokenClass::STOP));

    // keep direction under own_class_only never masks an unlisted newline
    spec = rep_spec(Direction::keep, {TokenClass::CONT});
    spec.newline_policy = NewlinePolicy::own_class_only;
    CHECK(visible_classes(p, build_plan(p, spec)).count(TokenClass::NEWLINE));

    // never_mask pins the newline visible and flags the listing
    spec = rep_spec(Direction::drop, {TokenClass::STOP, TokenClass::NEWLINE});
    spec.newline_policy = NewlinePolicy::never_mask;
    VisibilityPlan plan = build_plan(p, spec);
    CHECK(visible_classes(p, plan).count(TokenClass::NEWLINE));
    CHECK(has_warning(plan, "never_mask overrides the explicit NEWLINE listing"));

    // mask_if_either ignores the listing too, but with its own rule
    spec = rep_spec(Direction::drop, {TokenClass::CONT, TokenClass::NEWLINE});
    spec.newline_policy = NewlinePolicy::mask_if_either;
    plan = build_plan(p, spec);
    CHECK(visible_classes(p, plan).count(TokenClass::NEWLINE));  // CONT does not trigger it
    CHECK(has_warning(plan, "mask_if_either overrides the explicit NEWLINE listing"));
}

TEST_CASE("targeting an absent class is a warning, not an error") {
    TaskSpec task = news_task();
    task.stopwords = {"zzz"};  // nothing in the demos matches
    BuiltPrompt p = sample_prompt(task);
    VisibilityPlan plan = build_plan(p, rep_spec(Direction::drop, {TokenClass::STOP}));
    CHECK(has_warning(plan, "class STOP has no tokens in this prompt"));
}

TEST_CASE("complement flips direction over the coarse partition") {
    TaskSpec task = news_task();
    BuiltPrompt p = sample_prompt(task);

    AblationSpec drop_cont = rep_spec(Direction::drop, {TokenClass::CONT});
    AblationSpec keep_rest = complement(drop_cont);
    CHECK(keep_rest.direction == Direction::keep);
    CHECK(!keep_rest.classes.contains(TokenClass::CONT));
    CHECK(keep_rest.classes.contains(TokenClass::STOP));
    CHECK(keep_rest.classes.covers_all_of(kTemp));
    CHECK(build_plan(p, drop_cont).same_matrix(build_plan(p, keep_rest)));

    AblationSpec drop_two = rep_spec(Direction::drop, {TokenClass::CONT, TokenClass::STOP});
    AblationSpec keep_temp = complement(drop_two);
    CHECK(keep_temp.classes.covers_all_of(kTemp));
    CHECK(!keep_temp.classes.contains(TokenClass::CONT));
    CHECK(build_plan(p, drop_two).same_matrix(build_plan(p, keep_temp)));

    // keep specs complement into drop specs
    AblationSpec keep_cont = rep_spec(Direction::keep, {TokenClass::CONT});
    AblationSpec drop_rest = complement(keep_cont);
    CHECK(drop_rest.direction == Direction::drop);
    CHECK(drop_rest.classes.contains(TokenClass::STOP));
    CHECK(drop_rest.classes.covers_all_of(kTemp));
    CHECK(build_plan(p, keep_cont).same_matrix(build_plan(p, drop_rest)));

    // involution
    AblationSpec back = complement(complement(drop_cont));
    CHECK(back.direction == drop_cont.direction);
    CHECK(back.classes.bits == drop_cont.classes.bits);

    AblationSpec subset;
    subset.mode = AblationMode::random_subset;
    CHECK_THROWS_WITH(complement(subset), "subset specs have no complement");

    AblationSpec with_newline = rep_spec(Direction::drop, {TokenClass::NEWLINE});
    CHECK_THROWS_WITH(complement(with_newline),
                      "complement is defined over the partition {CONT, STOP, TEMP}; "
                      "NEWLINE follows the newline_policy instead");

    AblationSpec partial = rep_spec(Direction::drop, {TokenClass::TEMP_IN});
    CHECK_THROWS_WITH(complement(partial),
                      "complement is defined over the partition {CONT, STOP, TEMP}; "
                      "partial TEMP subsets have no complement");
}

TEST_CASE("build_plan rejects token-level specs") {
    TaskSpec task = news_task();
    BuiltPrompt p = sample_prompt(task);
    AblationSpec spec = rep_spec(Direction::drop, {TokenClass::STOP});
    spec.mode = AblationMode::token_drop;
    CHECK_THROWS_WITH(build_plan(p, spec),
                      "token-level specs rewrite the prompt; "
                      "build_plan handles representation and subset specs");
}

TEST_CASE("token-level STOP drop removes stopwords from demonstration bodies") {
    TaskSpec task = news_task();
    std::vector<DatasetRecord> demos = {{"The cat sat on the mat.", std::nullopt, 2}};
    PromptComponents pc = make_components(task, demos, {"Keep the test.", std::nullopt, 0});

    AblationSpec spec = rep_spec(Direction::drop, {TokenClass::STOP});
    spec.mode = AblationMode::token_drop;
    PromptComponents out = drop_tokens(pc, task, spec);
    CHECK(out.demos[0].text_a == "cat sat on mat");
    CHECK(out.test.text_a == "Keep test");  // demos_and_test scope by default
    CHECK(out.instruction == pc.instruction);
    CHECK(out.demos[0].template_in == task.template_in);
    CHECK(out.demos[0].label_text == "Business");

    spec.token_drop_scope = DropScope::demos_only;
    out = drop_tokens(pc, task, spec);
    CHECK(out.test.text_a == "Keep the test.");
}

TEST_CASE("token-level CONT drop keeps only stopwords") {
    TaskSpec task = news_task();
    PromptComponents pc = make_components(task, {{"The cat sat on the mat.", std::nullopt, 1}},
                                          {"x.", std::nullopt, 0});
    AblationSpec spec = rep_spec(Direction::drop, {TokenClass::CONT});
    spec.mode = AblationMode::token_drop;
    PromptComponents out = drop_tokens(pc, task, spec);
    CHECK(out.demos[0].text_a == "The the.");
}

TEST_CASE("token-level TEMP drop strips cues but keeps structure") {
    TaskSpec task = news_task();
    PromptComponents pc = make_components(task, {{"Some demo.", std::nullopt, 1}},
                                          {"Probe.", std::nullopt, 0});
    AblationSpec spec = rep_spec(Direction::drop, kTemp);
    spec.mode = AblationMode::token_drop;

    PromptComponents out = drop_tokens(pc, task, spec);
    CHECK(out.demos[0].template_in == "{}\n");
    CHECK(out.demos[0].template_out == "{}\n\n");
    CHECK(out.test.template_in == "{}\n");
    CHECK(out.test.template_out == "{}\n\n");
    CHECK(out.demos[0].text_a == "Some demo.");  // bodies untouched

    spec.retain_test_cue = true;
    out = drop_tokens(pc, task, spec);
    CHECK(out.test.template_in == "{}\n");
    CHECK(out.test.template_out == task.template_out);

    spec.retain_test_cue = false;
    spec.token_drop_scope = DropScope::demos_only;
    out = drop_tokens(pc, task, spec);
    CHECK(out.test.template_in == task.template_in);
    CHECK(out.test.template_out == task.template_out);
}

TEST_CASE("token-level keep direction drops the complement") {
    TaskSpec task = news_task();
    PromptComponents pc = make_components(task, {{"The cat sat on the mat.", std::nullopt, 1}},
                                          {"x.", std::nullopt, 0});
    AblationSpec spec = rep_spec(Direction::keep, {TokenClass::CONT});
    spec.mode = AblationMode::token_drop;
    PromptComponents out = drop_tokens(pc, task, spec);
    CHECK(out.demos[0].text_a == "cat sat on mat");  // stopwords dropped
    CHECK(out.demos[0].template_in == "{}\n");       // templates dropped too
}

TEST_CASE("token-level spec validation") {
    TaskSpec task = news_task();
    PromptComponents pc = make_components(task, {{"a.", std::nullopt, 1}}, {"b.", std::nullopt, 0});

    AblationSpec rep = rep_spec(Direction::drop, {TokenClass::STOP});
    CHECK_THROWS_WITH(drop_tokens(pc, task, rep), "drop_tokens needs a token-level spec");

    AblationSpec newline = rep_spec(Direction::drop, {TokenClass::NEWLINE});
    newline.mode = AblationMode::token_drop;
    CHECK_THROWS_WITH(drop_tokens(pc, task, newline),
                      "token-level ablation accepts only {CONT, STOP, TEMP}; got NEWLINE");

    AblationSpec partial = rep_spec(Direction::drop, {TokenClass::COLON});
    partial.mode = AblationMode::token_drop;
    CHECK_THROWS_WITH(drop_tokens(pc, task, partial),
                      "token-level TEMP ablation drops whole templates; "
                      "partial TEMP subsets are not supported");
}

TEST_CASE("subset plans keep labels plus a seeded draw of n positions") {
    TaskSpec task = news_task();
    BuiltPrompt p = sample_prompt(task);

    SubsetSpec subset{"all", 3, 42};
    VisibilityPlan plan = subset_plan(p, subset);
    validate_plan(plan, p.size());

    int kept = 0;
    for (int k = 0; k < plan.test_start; ++k) {
        TokenClass c = p.spans.cls[k];
        bool always = c == TokenClass::INSTR || c == TokenClass::BOS || c == TokenClass::LABEL;
        if (column_visible(plan, k)) {
            if (!always) ++kept;
        } else {
            CHECK(!always);  // policy columns never go dark
        }
    }
    CHECK(kept == 3);

    // deterministic per seed
    CHECK(plan.same_matrix(subset_plan(p, subset)));
    SubsetSpec other{"all", 3, 43};
    CHECK(!plan.same_matrix(subset_plan(p, other)));

    // mode dispatch through build_plan
    AblationSpec spec;
    spec.mode = AblationMode::random_subset;
    spec.subset = subset;
    CHECK(plan.same_matrix(build_plan(p, spec)));
}

TEST_CASE("subset pools can be restricted to one class") {
    TaskSpec task = news_task();
    BuiltPrompt p = sample_prompt(task);

    SubsetSpec temp{"TEMP", 2, 7};
    VisibilityPlan plan = subset_plan(p, temp);
    int kept = 0;
    for (int k = 0; k < plan.test_start; ++k) {
        TokenClass c = p.spans.cls[k];
        bool fine_temp =
            c == TokenClass::TEMP_IN || c == TokenClass::TEMP_OUT || c == TokenClass::COLON;
        bool always = c == TokenClass::INSTR || c == TokenClass::BOS || c == TokenClass::LABEL;
        if (column_visible(plan, k) && !always) {
            CHECK(fine_temp);
            ++kept;
        }
    }
    CHECK(kept == 2);

    SubsetSpec stop{"STOP", 1, 7};
    plan = subset_plan(p, stop);
    for (int k = 0; k < plan.test_start; ++k) {
        bool always = p.spans.cls[k] == TokenClass::INSTR || p.spans.cls[k] == TokenClass::BOS ||
                      p.spans.cls[k] == TokenClass::LABEL;
        if (column_visible(plan, k) && !always) CHECK(p.spans.cls[k] == TokenClass::STOP);
    }
}

TEST_CASE("subset shortfalls warn and clamp") {
    TaskSpec task = news_task();
    BuiltPrompt p = sample_prompt(task);
    SubsetSpec subset{"all", 5000, 1};
    VisibilityPlan plan = subset_plan(p, subset);
    CHECK(has_warning(plan, "requested 5000 positions from all, only"));
    // everything in the pool is kept
    for (int k = 0; k < plan.test_start; ++k) CHECK(column_visible(plan, k));
}

TEST_CASE("subset pool names are validated") {
    TaskSpec task = news_task();
    BuiltPrompt p = sample_prompt(task);
    CHECK_THROWS_WITH(subset_plan(p, {"LABEL", 1, 1}),
                      "subset sampling draws from demo-side classes; got LABEL");
    CHECK_THROWS_WITH(subset_plan(p, {"BOS", 1, 1}),
                      "subset sampling draws from demo-side classes; got BOS");
    CHECK_THROWS_AS(subset_plan(p, {"NOPE", 1, 1}), std::runtime_error);
    CHECK_THROWS_WITH(subset_plan(p, {"all", -1, 1}), "subset size must be non-negative");
}
