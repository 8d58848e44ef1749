#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "icl/experiment.hpp"
#include "icl/synth.hpp"

using namespace icl;

namespace {

// scipy.stats.ttest_rel reference values, frozen
struct TTestCase {
    std::vector<double> a, b;
    double t, p;
};

const std::vector<TTestCase> kOracle = {
    {{1, 2, 3, 4, 5}, {0, 0, 0, 0, 0}, 4.242640687119285, 0.013235599563682695},
    {{0.62, 0.58, 0.71, 0.66, 0.59},
     {0.55, 0.60, 0.63, 0.61, 0.50},
     2.7485276322201524,
     0.05145223064196388},
    {{0.812, 0.795, 0.832, 0.801, 0.788, 0.825},
     {0.642, 0.661, 0.69, 0.648, 0.655, 0.671},
     25.55958287930473,
     1.711743497757481e-06},
    {{0.31, 0.29, 0.33, 0.27, 0.35, 0.3, 0.28},
     {0.32, 0.28, 0.34, 0.26, 0.36, 0.29, 0.29},
     -0.35355339059327434,
     0.7357648598798117},
    {{0.55, 0.61, 0.47, 0.52}, {0.59, 0.6, 0.51, 0.5}, -0.7808688094430293, 0.49183212504529256},
    {{0.702, 0.886, 0.606, 0.302, 0.581, 0.196},
     {0.244, 0.617, 0.621, 0.105, 0.652, 0.636},
     0.5172412705954585,
     0.6270474998488904},
    {{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0},
     {0.15, 0.18, 0.33, 0.38, 0.52, 0.58, 0.72, 0.77, 0.93, 0.98},
     -0.43994134506405946,
     0.6703549829056069},
    {{0.42, 0.44, 0.41, 0.43, 0.45, 0.40, 0.46, 0.42},
     {0.38, 0.41, 0.37, 0.40, 0.42, 0.36, 0.43, 0.39},
     18.44451137872729,
     3.4133466886318337e-07},
};

ExperimentConfig tiny_config() {
    SynthBundle b = gen_synthetic(3, 24, 8, 7);
    std::vector<std::string> texts = {b.task.instruction, b.task.template_in, b.task.template_out};
    for (const auto& r : b.train) texts.push_back(r.text_a);
    for (const auto& r : b.test) texts.push_back(r.text_a);
    for (const auto& v : b.task.verbalizers) texts.push_back(v);

    ExperimentConfig cfg;
    cfg.vocab = build_vocab_from_texts(texts);
    ModelConfig mc;
    mc.n_layers = 1;
    mc.n_heads = 2;
    mc.d_model = 16;
    mc.d_ff = 32;
    mc.vocab_size = (int)cfg.vocab.surfaces.size();
    cfg.model = init_weights(mc, 5);
    cfg.datasets.push_back({b.task.name, b.task, b.train, b.test});
    cfg.shots = 2;
    cfg.seeds = {1, 2};
    cfg.n_test = 5;
    cfg.exec = ExecMode::serial;

    SettingSpec standard;
    standard.name = "standard";
    standard.reference = true;
    SettingSpec zero;
    zero.name = "zero_shot";
    zero.shots = 0;
    cfg.settings = {standard, zero};
    return cfg;
}

ResultRow row(const std::string& setting, const std::string& dataset, uint64_t seed, int correct,
              int total) {
    ResultRow r;
    r.setting = setting;
    r.dataset = dataset;
    r.seed = seed;
    r.correct = correct;
    r.total = total;
    return r;
}

}  // namespace

TEST_CASE("paired t-test matches the frozen reference values") {
    for (const auto& c : kOracle) {
        TTestResult r = paired_t_test(c.a, c.b);
        CHECK(r.df == (int)c.a.size() - 1);
        CHECK(std::fabs(r.t - c.t) <= 1e-6);
        CHECK(std::fabs(r.p - c.p) <= 1e-6);
    }
}

TEST_CASE("degenerate difference vectors") {
    // identical vectors: no effect, full p
    TTestResult r = paired_t_test({0.5, 0.5, 0.5, 0.5, 0.5}, {0.5, 0.5, 0.5, 0.5, 0.5});
    CHECK(r.t == 0.0);
    CHECK(r.p == 1.0);
    CHECK(r.df == 4);

    // zero mean with spread: t collapses to ~0
    r = paired_t_test({0.9, 0.1, 0.8, 0.2, 0.7, 0.3}, {0.2, 0.8, 0.3, 0.7, 0.4, 0.6});
    CHECK(std::fabs(r.t) <= 1e-12);
    CHECK(std::fabs(r.p - 1.0) <= 1e-6);

    // constant nonzero difference: infinite t, zero p
    r = paired_t_test({0.6, 0.6, 0.6}, {0.5, 0.5, 0.5});
    CHECK(std::isinf(r.t));
    CHECK(r.t > 0);
    CHECK(r.p == 0.0);
    r = paired_t_test({0.5, 0.5, 0.5}, {0.6, 0.6, 0.6});
    CHECK(std::isinf(r.t));
    CHECK(r.t < 0);
    CHECK(r.p == 0.0);

    CHECK_THROWS_WITH(paired_t_test({1.0}, {0.5}), "paired t-test needs at least two pairs");
    CHECK_THROWS_WITH(paired_t_test({1.0, 2.0}, {0.5}),
                      "paired t-test needs equal-length vectors");
}

TEST_CASE("incomplete beta and t tail") {
    CHECK(betai(0.5, 0.5, 0.5) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(betai(1.0, 1.0, 0.25) == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(betai(2.0, 3.0, 0.0) == 0.0);
    CHECK(betai(2.0, 3.0, 1.0) == 1.0);
    CHECK_THROWS_WITH(betai(1.0, 1.0, -0.1), "betai needs x in [0, 1]");

    // df=1 is a Cauchy: |t|=1 sits at the quartile
    CHECK(student_t_two_sided_p(1.0, 1) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(student_t_two_sided_p(0.0, 3) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(student_t_two_sided_p(std::numeric_limits<double>::infinity(), 3) == 0.0);
    CHECK_THROWS_WITH(student_t_two_sided_p(1.0, 0), "t distribution needs df >= 1");
}

TEST_CASE("pct verdicts on the reference_33b accuracies") {
    // TEMP clears both legs at delta = 10
    CriticalVerdict v = pct_verdict(0.791833, 0.5455, 0.816333, 0.489, 10.0);
    CHECK(v.gain_over_zero_shot == doctest::Approx(24.6333).epsilon(1e-4));
    CHECK(v.loss_under_removal == doctest::Approx(32.7333).epsilon(1e-4));
    CHECK(v.gain_leg);
    CHECK(v.loss_leg);
    CHECK(v.critical);

    // CONT fails the gain leg (keep-only runs below the empty context)
    v = pct_verdict(0.479167, 0.5455, 0.816333, 0.801833, 10.0);
    CHECK(v.gain_over_zero_shot == doctest::Approx(-6.6333).epsilon(1e-4));
    CHECK(!v.gain_leg);
    CHECK(!v.loss_leg);
    CHECK(!v.critical);
}

TEST_CASE("pct margin is inclusive") {
    // 0.625 - 0.5 and 0.75 - 0.625 are exact in binary, so both legs sit
    // precisely on the threshold
    CriticalVerdict v = pct_verdict(0.625, 0.5, 0.75, 0.625, 12.5);
    CHECK(v.gain_over_zero_shot == doctest::Approx(12.5));
    CHECK(v.loss_under_removal == doctest::Approx(12.5));
    CHECK(v.gain_leg);
    CHECK(v.loss_leg);
    CHECK(v.critical);

    v = pct_verdict(0.625, 0.5, 0.75, 0.625, 12.6);
    CHECK(!v.gain_leg);
    CHECK(!v.loss_leg);
    CHECK(!v.critical);
    CHECK(v.delta == 12.6);
}

TEST_CASE("result tables round-trip through CSV") {
    ResultTable t;
    t.rows.push_back(row("standard", "news", 1, 1, 3));
    t.rows.push_back(row("standard", "news", 2, 2, 3));
    t.rows.push_back(row("zero_shot", "news", 1, 0, 3));
    t.rows.push_back(row("zero_shot", "pairs", 5, 3, 7));

    std::string csv = t.to_csv();
    CHECK(csv.substr(0, csv.find('\n')) == "setting,dataset,seed,accuracy");

    ResultTable back = ResultTable::from_csv(csv);
    REQUIRE(back.rows.size() == t.rows.size());
    for (size_t i = 0; i < t.rows.size(); ++i) {
        CHECK(back.rows[i].setting == t.rows[i].setting);
        CHECK(back.rows[i].dataset == t.rows[i].dataset);
        CHECK(back.rows[i].seed == t.rows[i].seed);
        CHECK(std::fabs(back.rows[i].accuracy() - t.rows[i].accuracy()) <= 1e-9);
    }
}

TEST_CASE("CSV parse errors") {
    CHECK_THROWS_WITH(ResultTable::from_csv("oops\n"),
                      "result CSV lacks the setting,dataset,seed,accuracy header");
    CHECK_THROWS_WITH(ResultTable::from_csv("setting,dataset,seed,accuracy\na,b,c\n"),
                      "result CSV line 2: expected 4 fields");
    CHECK_THROWS_WITH(ResultTable::from_csv("setting,dataset,seed,accuracy\na,b,1,1.5\n"),
                      "result CSV line 2: accuracy out of [0, 1]");
    CHECK_THROWS_AS(ResultTable::from_csv("setting,dataset,seed,accuracy\na,b,x,0.5\n"),
                    std::runtime_error);
}

TEST_CASE("table lookups") {
    ResultTable t;
    t.rows.push_back(row("standard", "news", 2, 9, 10));
    t.rows.push_back(row("standard", "news", 1, 8, 10));
    t.rows.push_back(row("zero_shot", "news", 1, 5, 10));
    t.rows.push_back(row("standard", "pairs", 1, 6, 10));
    t.rows.push_back(row("standard", "pairs", 2, 7, 10));
    t.rows.push_back(row("zero_shot", "pairs", 1, 2, 10));

    CHECK(t.mean_accuracy("standard", "news") == doctest::Approx(0.85));
    CHECK_THROWS_WITH(t.mean_accuracy("standard", "ghost"),
                      "no rows for setting \"standard\" dataset \"ghost\"");

    CHECK(t.setting_order() == std::vector<std::string>{"standard", "zero_shot"});
    CHECK(t.dataset_order() == std::vector<std::string>{"news", "pairs"});

    // seeds ascending no matter the insertion order
    CHECK(t.seed_accuracies("standard", "news") == std::vector<double>{0.8, 0.9});

    CHECK(setting_avg(t, "standard") == doctest::Approx((0.85 + 0.65) / 2 * 100));
    CHECK(setting_avg(t, "zero_shot") == doctest::Approx((0.5 + 0.2) / 2 * 100));
    CHECK(delta_avg(t, "standard", "zero_shot") == doctest::Approx(40.0));
}

TEST_CASE("accuracy helper") {
    CHECK(accuracy({1, 0, 2, 1}, {1, 1, 2, 0}) == doctest::Approx(0.5));
    CHECK_THROWS_WITH(accuracy({1}, {1, 2}), "prediction and gold vectors differ in length");
    CHECK_THROWS_WITH(accuracy({}, {}), "cannot take accuracy of nothing");
}

TEST_CASE("resolve_variant honors the setting and mixes seeds") {
    SynthBundle b = gen_synthetic(3, 12, 4, 3);
    const TaskSpec& task = b.task;

    SettingSpec plain;
    TemplateVariant v = resolve_variant(task, 2, plain, 7);
    CHECK(v.kind == TemplateVariantKind::standard);
    REQUIRE(v.entries.size() == 3);
    CHECK(v.entries[0].in == task.template_in);
    CHECK(v.entries[2].out == task.template_out);

    SettingSpec fixed;
    fixed.variant = TemplateVariantSpec{TemplateVariantKind::random_fixed, 4, ""};
    TemplateVariant f1 = resolve_variant(task, 2, fixed, 9);
    TemplateVariant f2 = gen_random_template(task, 2, 4 * 1000003ull + 9, true);
    REQUIRE(f1.entries.size() == f2.entries.size());
    for (size_t i = 0; i < f1.entries.size(); ++i) {
        CHECK(f1.entries[i].in == f2.entries[i].in);
        CHECK(f1.entries[i].out == f2.entries[i].out);
    }
    // a different run seed draws different cues
    TemplateVariant f3 = resolve_variant(task, 2, fixed, 10);
    CHECK(f1.entries[0].in != f3.entries[0].in);

    SettingSpec swapped;
    swapped.variant = TemplateVariantSpec{TemplateVariantKind::swap, 1, ""};
    TemplateVariant s1 = resolve_variant(task, 2, swapped, 1);
    TemplateVariant s2 = swap_templates(task, 2);
    CHECK(s1.entries[0].in == s2.entries[0].in);
    CHECK(s1.entries[0].out == s2.entries[0].out);

    SettingSpec named;
    named.variant = TemplateVariantSpec{TemplateVariantKind::named, 1, "template2"};
    TemplateVariant n1 = resolve_variant(task, 2, named, 1);
    TemplateVariant n2 = named_template_set(task, 2, "template2");
    CHECK(n1.entries[1].in == n2.entries[1].in);
}

TEST_CASE("run_suite is deterministic across repeats and thread modes") {
    ExperimentConfig cfg = tiny_config();
    ResultTable t1 = run_suite(cfg);

    REQUIRE(t1.rows.size() == 4);  // 2 settings x 2 seeds x 1 dataset
    for (const auto& r : t1.rows) {
        CHECK(r.total == 5);
        CHECK(r.correct >= 0);
        CHECK(r.correct <= 5);
    }
    CHECK(t1.setting_order() == std::vector<std::string>{"standard", "zero_shot"});
    CHECK(t1.dataset_order() == std::vector<std::string>{"synth"});
    CHECK(t1.seed_accuracies("standard", "synth").size() == 2);

    CHECK(run_suite(cfg).to_csv() == t1.to_csv());

    ExperimentConfig par = tiny_config();
    par.exec = ExecMode::parallel;
    CHECK(run_suite(par).to_csv() == t1.to_csv());
}

TEST_CASE("run_suite applies ablations and double precision") {
    ExperimentConfig cfg = tiny_config();
    cfg.seeds = {1};
    cfg.precision = Precision::f64;

    AblationSpec minus_stop;
    minus_stop.direction = Direction::drop;
    minus_stop.classes = ClassSet::of({TokenClass::STOP});

    AblationSpec token_temp;
    token_temp.mode = AblationMode::token_drop;
    token_temp.direction = Direction::drop;
    token_temp.classes = ClassSet::parse({"TEMP"});

    AblationSpec subset;
    subset.mode = AblationMode::random_subset;
    subset.subset = SubsetSpec{"all", 4, 11};

    cfg.settings.clear();
    for (auto [name, spec] : std::initializer_list<std::pair<const char*, AblationSpec>>{
             {"minus_stop", minus_stop}, {"token_temp", token_temp}, {"subset4", subset}}) {
        SettingSpec s;
        s.name = name;
        s.ablation = spec;
        cfg.settings.push_back(s);
    }

    ResultTable t = run_suite(cfg);
    REQUIRE(t.rows.size() == 3);
    for (const auto& r : t.rows) CHECK(r.total == 5);
    CHECK(run_suite(cfg).to_csv() == t.to_csv());
}

TEST_CASE("run_suite wraps cell failures with setting and seed") {
    ExperimentConfig cfg = tiny_config();
    AblationSpec bad;
    bad.mode = AblationMode::token_drop;
    bad.classes = ClassSet::of({TokenClass::COLON});
    SettingSpec s;
    s.name = "bad";
    s.ablation = bad;
    cfg.settings = {s};
    CHECK_THROWS_WITH(run_suite(cfg),
                      "setting \"bad\" seed 1: token-level TEMP ablation drops whole templates; "
                      "partial TEMP subsets are not supported");

    ExperimentConfig empty_settings = tiny_config();
    empty_settings.settings.clear();
    CHECK_THROWS_WITH(run_suite(empty_settings), "no settings configured");

    ExperimentConfig empty_seeds = tiny_config();
    empty_seeds.seeds.clear();
    CHECK_THROWS_WITH(run_suite(empty_seeds), "no seeds configured");

    ExperimentConfig no_test = tiny_config();
    no_test.datasets[0].test.clear();
    CHECK_THROWS_WITH(run_suite(no_test), "dataset synth has no test records");
}

TEST_CASE("standard_prompts builds one prompt per seed over a fixed test record") {
    ExperimentConfig cfg = tiny_config();
    std::vector<BuiltPrompt> prompts = standard_prompts(cfg, cfg.datasets[0]);
    REQUIRE(prompts.size() == cfg.seeds.size());

    // both end in the same test span
    const BuiltPrompt& a = prompts[0];
    const BuiltPrompt& b = prompts[1];
    std::vector<int> tail_a(a.tokens.begin() + a.test_start, a.tokens.end());
    std::vector<int> tail_b(b.tokens.begin() + b.test_start, b.tokens.end());
    CHECK(tail_a == tail_b);
    CHECK(a.tokens != b.tokens);  // demo draws differ by seed
}

TEST_CASE("token counts cover every class, present or not") {
    ExperimentConfig cfg = tiny_config();
    std::vector<BuiltPrompt> prompts = standard_prompts(cfg, cfg.datasets[0]);
    auto mean = token_count_report(prompts);
    CHECK((int)mean.size() == kNumTokenClasses);
    CHECK(mean[TokenClass::BOS] == 1.0);
    CHECK(mean[TokenClass::LABEL] == (double)cfg.shots);
    CHECK(mean[TokenClass::INSTR] > 0.0);
    CHECK(mean[TokenClass::TEST_IN] > 0.0);

    // a zero-shot prompt still reports the demo-side classes, as zeros
    PromptComponents pc =
        make_components(cfg.datasets[0].task, {}, cfg.datasets[0].test[0]);
    BuiltPrompt zero = assemble_prompt(cfg.datasets[0].task, pc, cfg.vocab);
    auto solo = token_count_report({zero});
    CHECK((int)solo.size() == kNumTokenClasses);
    CHECK(solo[TokenClass::LABEL] == 0.0);
    CHECK(solo[TokenClass::CONT] == 0.0);
    CHECK(solo[TokenClass::BOS] == 1.0);

    CHECK_THROWS_WITH(token_count_report({}), "no prompts to count");
}
