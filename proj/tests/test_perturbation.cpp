#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <regex>
#include <set>
#include <string>
#include <vector>

#include "icl/perturbation.hpp"

using namespace icl;

namespace {

TaskSpec news_task() {
    TaskSpec t;
    t.name = "news";
    t.verbalizers = {"World", "Sports"};
    t.instruction = "Classify.\n\n";
    t.template_in = "Article: {}\n";
    t.template_out = "Answer: {}\n\n";
    t.stopwords = {"the", ".", "\n"};
    return t;
}

TaskSpec pair_task() {
    TaskSpec t = news_task();
    t.name = "pairs";
    t.template_in = "Hypothesis: {}\nPremise: {}\n";
    return t;
}

const std::regex cue_re("^[a-z]{15}$");

}  // namespace

TEST_CASE("extract_cues reads the word before each slot's colon") {
    CHECK(extract_cues("Article: {}\n") == std::vector<std::string>{"Article"});
    CHECK(extract_cues("Hypothesis: {}\nPremise: {}\n") ==
          std::vector<std::string>{"Hypothesis", "Premise"});
    CHECK(extract_cues("Answer Type: {}\n\n") == std::vector<std::string>{"Answer Type"});

    CHECK_THROWS_AS(extract_cues("plain text"), std::runtime_error);
    CHECK_THROWS_WITH(extract_cues("{}\n"),
                      "template segment lacks a cue before its slot: \"{}\n\"");
    CHECK_THROWS_WITH(extract_cues(": {}"), "template segment has an empty cue: \": {}\"");
}

TEST_CASE("replace_cues rebuilds the template around new cues") {
    CHECK(replace_cues("Article: {}\n", {"Input"}) == "Input: {}\n");
    CHECK(replace_cues("Hypothesis: {}\nPremise: {}\n", {"A", "B"}) == "A: {}\nB: {}\n");
    CHECK(replace_cues("Answer: {}\n\n", {"label"}) == "label: {}\n\n");
    CHECK_THROWS_WITH(replace_cues("Article: {}\n", {"A", "B"}),
                      "cue count does not match template slots");
}

TEST_CASE("strip_cues removes cue and colon, keeps spacing structure") {
    CHECK(strip_cues("Article: {}\n") == "{}\n");
    CHECK(strip_cues("Answer: {}\n\n") == "{}\n\n");
    CHECK(strip_cues("Hypothesis: {}\nPremise: {}\n") == "{}\n{}\n");
    // two variants share structure exactly when stripped forms match
    CHECK(strip_cues("Article: {}\n") == strip_cues("abcdefghijklmno: {}\n"));
}

TEST_CASE("standard_variant repeats the task templates per entry") {
    TaskSpec task = news_task();
    TemplateVariant v = standard_variant(task, 4);
    CHECK(v.kind == TemplateVariantKind::standard);
    REQUIRE(v.entries.size() == 5);  // demos plus the test stub
    for (const auto& e : v.entries) {
        CHECK(e.in == task.template_in);
        CHECK(e.out == task.template_out);
    }
}

TEST_CASE("random templates are deterministic in the seed") {
    TaskSpec task = news_task();
    TemplateVariant a = gen_random_template(task, 3, 11, true);
    TemplateVariant b = gen_random_template(task, 3, 11, true);
    REQUIRE(a.entries.size() == b.entries.size());
    for (size_t i = 0; i < a.entries.size(); ++i) {
        CHECK(a.entries[i].in == b.entries[i].in);
        CHECK(a.entries[i].out == b.entries[i].out);
    }
    TemplateVariant c = gen_random_template(task, 3, 12, true);
    CHECK(a.entries[0].in != c.entries[0].in);
}

TEST_CASE("random_fixed shares one draw across entries; nonfixed draws per entry") {
    TaskSpec task = news_task();

    TemplateVariant fixed = gen_random_template(task, 4, 5, true);
    CHECK(fixed.kind == TemplateVariantKind::random_fixed);
    REQUIRE(fixed.entries.size() == 5);
    for (const auto& e : fixed.entries) {
        CHECK(e.in == fixed.entries[0].in);
        CHECK(e.out == fixed.entries[0].out);
    }

    TemplateVariant loose = gen_random_template(task, 4, 5, false);
    CHECK(loose.kind == TemplateVariantKind::random_nonfixed);
    std::set<std::string> cues;
    size_t expected = 0;
    for (const auto& e : loose.entries) {
        for (const auto& c : extract_cues(e.in)) {
            CHECK(std::regex_match(c, cue_re));
            cues.insert(c);
            ++expected;
        }
        for (const auto& c : extract_cues(e.out)) {
            CHECK(std::regex_match(c, cue_re));
            cues.insert(c);
            ++expected;
        }
    }
    CHECK(cues.size() == expected);  // pairwise distinct

    // structure survives the cue rewrite
    for (const auto& e : loose.entries) {
        CHECK(strip_cues(e.in) == strip_cues(task.template_in));
        CHECK(strip_cues(e.out) == strip_cues(task.template_out));
    }
}

TEST_CASE("swap exchanges the two cues of a single-slot task") {
    TaskSpec task = news_task();
    TemplateVariant v = swap_templates(task, 2);
    CHECK(v.kind == TemplateVariantKind::swap);
    REQUIRE(v.entries.size() == 3);
    for (const auto& e : v.entries) {
        CHECK(e.in == "Answer: {}\n");
        CHECK(e.out == "Article: {}\n\n");
    }

    // swapping the swapped task restores the original templates
    TaskSpec swapped = task;
    swapped.template_in = v.entries[0].in;
    swapped.template_out = v.entries[0].out;
    TemplateVariant back = swap_templates(swapped, 2);
    CHECK(back.entries[0].in == task.template_in);
    CHECK(back.entries[0].out == task.template_out);
}

TEST_CASE("swap rotates three cues; two passes do not restore them") {
    TaskSpec task = pair_task();
    TemplateVariant v = swap_templates(task, 1);
    // [Hypothesis, Premise, Answer] rotated right -> [Answer, Hypothesis, Premise]
    CHECK(v.entries[0].in == "Answer: {}\nHypothesis: {}\n");
    CHECK(v.entries[0].out == "Premise: {}\n\n");

    TaskSpec once = task;
    once.template_in = v.entries[0].in;
    once.template_out = v.entries[0].out;
    TemplateVariant twice = swap_templates(once, 1);
    CHECK(twice.entries[0].in != task.template_in);  // period three, not two

    TaskSpec again = once;
    again.template_in = twice.entries[0].in;
    again.template_out = twice.entries[0].out;
    TemplateVariant thrice = swap_templates(again, 1);
    CHECK(thrice.entries[0].in == task.template_in);
    CHECK(thrice.entries[0].out == task.template_out);
}

TEST_CASE("swap with identical cues errors") {
    TaskSpec task = news_task();
    task.template_in = "Field: {}\n";
    task.template_out = "Field: {}\n\n";
    CHECK_THROWS_WITH(swap_templates(task, 1), "swap is a no-op: all template cues are \"Field\"");
}

TEST_CASE("named template sets transcribe the fixed cue pairs") {
    TaskSpec task = news_task();

    TemplateVariant t1 = named_template_set(task, 3, "template1");
    CHECK(t1.kind == TemplateVariantKind::named);
    REQUIRE(t1.entries.size() == 4);
    CHECK(t1.entries[0].in == "dog: {}\n");
    CHECK(t1.entries[0].out == "cat: {}\n\n");
    CHECK(t1.entries[1].in == "juice: {}\n");
    CHECK(t1.entries[1].out == "wine: {}\n\n");
    CHECK(t1.entries[2].in == "sleep: {}\n");
    CHECK(t1.entries[2].out == "wake: {}\n\n");
    CHECK(t1.entries[3].in == "bunny: {}\n");
    CHECK(t1.entries[3].out == "easter: {}\n\n");

    TemplateVariant t2 = named_template_set(task, 3, "template2");
    for (const auto& e : t2.entries) {
        CHECK(e.in == "dog: {}\n");
        CHECK(e.out == "cat: {}\n\n");
    }

    TemplateVariant t3 = named_template_set(task, 2, "template3");
    REQUIRE(t3.entries.size() == 3);
    CHECK(t3.entries[0].in == "article: {}\n");
    CHECK(t3.entries[0].out == "answer: {}\n\n");
    CHECK(t3.entries[2].in == "text: {}\n");

    TemplateVariant t4 = named_template_set(task, 1, "template4");
    CHECK(t4.entries[0].in == t4.entries[1].in);

    CHECK_THROWS_WITH(named_template_set(task, 4, "template1"),
                      "named template sets cover at most 3 demonstrations");
    CHECK_THROWS_WITH(named_template_set(task, 1, "template9"),
                      "unknown template set: \"template9\"");
    CHECK_THROWS_WITH(named_template_set(pair_task(), 1, "template1"),
                      "named template sets require single-slot templates");
}

TEST_CASE("make_components applies variant templates per entry") {
    TaskSpec task = news_task();
    std::vector<DatasetRecord> demos = {{"one.", std::nullopt, 0}, {"two.", std::nullopt, 1}};
    DatasetRecord test{"probe.", std::nullopt, 0};

    TemplateVariant v = gen_random_template(task, 2, 3, false);
    PromptComponents pc = make_components(task, demos, test, v);
    REQUIRE(pc.demos.size() == 2);
    CHECK(pc.demos[0].template_in == v.entries[0].in);
    CHECK(pc.demos[1].template_out == v.entries[1].out);
    CHECK(pc.test.template_in == v.entries[2].in);
    CHECK(pc.test.template_out == v.entries[2].out);
    // texts and labels are untouched
    CHECK(pc.demos[0].text_a == "one.");
    CHECK(pc.demos[1].label_text == "Sports");

    TemplateVariant short_v = standard_variant(task, 1);
    CHECK_THROWS_WITH(make_components(task, demos, test, short_v),
                      "template variant has 2 entries for 2 demonstrations");
}
