#include "icl/report.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "icl/prompt.hpp"
#include "icl/rng.hpp"
#include "icl/synth.hpp"
#include "json.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace icl {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr const char* kToolVersion = "0.1.0";

}  // namespace

// ---- rendering -----------------------------------------------------------------

ReportLayout report_layout_from_string(const std::string& s) {
    if (s == "rep_ablation") return ReportLayout::rep_ablation;
    if (s == "token_ablation") return ReportLayout::token_ablation;
    if (s == "perturbation") return ReportLayout::perturbation;
    throw std::runtime_error("unknown report layout: \"" + s + "\"");
}

std::string render_pct(double percent) {
    long long tenths = std::llround(percent * 10.0);  // half away from zero
    bool neg = tenths < 0;
    long long v = neg ? -tenths : tenths;
    return (neg ? "-" : "") + std::to_string(v / 10) + "." + std::to_string(v % 10);
}

std::string render_delta(double pp) {
    long long tenths = std::llround(pp * 10.0);
    if (tenths < 0) return render_pct(pp);
    return "+" + render_pct(pp);
}

std::string emit_markdown(const ResultTable& table, const std::vector<std::string>& references,
                          ReportLayout layout) {
    const std::vector<std::string> settings = table.setting_order();
    const std::vector<std::string> datasets = table.dataset_order();
    if (settings.empty()) throw std::runtime_error("empty result table");

    auto is_ref = [&](const std::string& s) {
        return std::find(references.begin(), references.end(), s) != references.end();
    };

    // group = a reference row plus the rows that follow it; rows before the
    // first reference form an anchorless group
    const int ns = (int)settings.size();
    std::vector<int> anchor(ns, -1);
    for (int i = 0, cur = -1; i < ns; ++i) {
        if (is_ref(settings[i])) cur = i;
        anchor[i] = cur;
    }

    bool want_delta = layout != ReportLayout::perturbation;
    if (want_delta) {
        bool any_follower = false;
        for (int i = 0; i < ns; ++i) any_follower |= anchor[i] >= 0 && anchor[i] != i;
        want_delta = any_follower;
    }

    // cell values in percent; Avg appended as a final pseudo-dataset column
    const int nc = (int)datasets.size() + 1;
    std::vector<std::vector<double>> val(ns, std::vector<double>(nc));
    for (int i = 0; i < ns; ++i) {
        for (int j = 0; j < (int)datasets.size(); ++j)
            val[i][j] = table.mean_accuracy(settings[i], datasets[j]) * 100.0;
        val[i][nc - 1] = setting_avg(table, settings[i]);
    }

    std::vector<std::vector<bool>> bold(ns, std::vector<bool>(nc, false));
    std::vector<std::vector<bool>> underline(ns, std::vector<bool>(nc, false));
    for (int start = 0; start < ns;) {
        int end = start + 1;
        while (end < ns && anchor[end] == anchor[start]) ++end;
        for (int j = 0; j < nc; ++j) {
            long long best = std::llround(val[start][j] * 10.0);
            for (int i = start + 1; i < end; ++i)
                best = std::max(best, std::llround(val[i][j] * 10.0));
            for (int i = start; i < end; ++i)
                bold[i][j] = std::llround(val[i][j] * 10.0) == best;
            // deepest fall against the group's reference row
            int ref = anchor[start];
            if (ref >= 0 && layout != ReportLayout::perturbation) {
                int worst = -1;
                double worst_drop = 0.0;
                for (int i = start; i < end; ++i) {
                    if (i == ref) continue;
                    double drop = val[ref][j] - val[i][j];
                    if (drop > worst_drop) {
                        worst_drop = drop;
                        worst = i;
                    }
                }
                if (worst >= 0) underline[worst][j] = true;
            }
        }
        start = end;
    }

    std::ostringstream os;
    switch (layout) {
        case ReportLayout::rep_ablation: os << "## Attention ablation (representation level)\n\n"; break;
        case ReportLayout::token_ablation: os << "## Token-level ablation\n\n"; break;
        case ReportLayout::perturbation: os << "## Template perturbation\n\n"; break;
    }
    os << "| Setting |";
    for (const auto& ds : datasets) os << " " << ds << " |";
    os << " Avg |";
    if (want_delta) os << " ΔAvg |";
    os << "\n|---|";
    for (size_t j = 0; j < datasets.size(); ++j) os << "---|";
    os << "---|";
    if (want_delta) os << "---|";
    os << "\n";

    for (int i = 0; i < ns; ++i) {
        os << "| " << settings[i] << " |";
        for (int j = 0; j < nc; ++j) {
            std::string cell = render_pct(val[i][j]);
            if (bold[i][j]) cell = "**" + cell + "**";
            if (underline[i][j]) cell = "<u>" + cell + "</u>";
            os << " " << cell << " |";
        }
        if (want_delta) {
            if (anchor[i] < 0 || anchor[i] == i) os << " - |";
            else os << " " << render_delta(val[i][nc - 1] - val[anchor[i]][nc - 1]) << " |";
        }
        os << "\n";
    }
    return os.str();
}

// ---- digests -------------------------------------------------------------------

uint64_t fnv1a64(const void* data, size_t n) {
    const unsigned char* p = (const unsigned char*)data;
    uint64_t h = 14695981039346656037ull;
    for (size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 1099511628211ull;
    }
    return h;
}

uint64_t fnv1a64_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open for digest: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    std::string bytes = buf.str();
    return fnv1a64(bytes.data(), bytes.size());
}

// ---- config loading --------------------------------------------------------------

namespace {

std::string hex64(uint64_t v) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", (unsigned long long)v);
    return buf;
}

std::string resolve_path(const std::string& config_path, const std::string& p) {
    fs::path fp(p);
    if (fp.is_absolute()) return p;
    return (fs::path(config_path).parent_path() / fp).string();
}

json parse_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config: " + path);
    try {
        json doc;
        in >> doc;
        return doc;
    } catch (const std::exception& e) {
        throw std::runtime_error("config " + path + ": " + e.what());
    }
}

AblationSpec parse_ablation(const json& j) {
    AblationSpec spec;
    std::string mode = j.value("mode", "representation");
    if (mode == "representation") spec.mode = AblationMode::representation;
    else if (mode == "token_drop") spec.mode = AblationMode::token_drop;
    else if (mode == "random_subset") spec.mode = AblationMode::random_subset;
    else throw std::runtime_error("unknown ablation mode: \"" + mode + "\"");

    std::string dir = j.value("direction", "drop");
    if (dir == "drop") spec.direction = Direction::drop;
    else if (dir == "keep") spec.direction = Direction::keep;
    else throw std::runtime_error("unknown ablation direction: \"" + dir + "\"");

    if (j.contains("classes"))
        spec.classes = ClassSet::parse(j.at("classes").get<std::vector<std::string>>());
    spec.include_labels = j.value("include_labels", true);

    std::string nl = j.value("newline_policy", "mask_if_either");
    if (nl == "mask_if_either") spec.newline_policy = NewlinePolicy::mask_if_either;
    else if (nl == "own_class_only") spec.newline_policy = NewlinePolicy::own_class_only;
    else if (nl == "never_mask") spec.newline_policy = NewlinePolicy::never_mask;
    else throw std::runtime_error("unknown newline_policy: \"" + nl + "\"");

    std::string bos = j.value("bos_policy", "keep");
    if (bos == "keep") spec.bos_policy = BosPolicy::keep;
    else if (bos == "mask") spec.bos_policy = BosPolicy::mask;
    else throw std::runtime_error("unknown bos_policy: \"" + bos + "\"");

    std::string scope = j.value("scope", "demos_and_test");
    if (scope == "demos_and_test") spec.token_drop_scope = DropScope::demos_and_test;
    else if (scope == "demos_only") spec.token_drop_scope = DropScope::demos_only;
    else throw std::runtime_error("unknown token drop scope: \"" + scope + "\"");

    spec.retain_test_cue = j.value("retain_test_cue", false);
    spec.subset.from = j.value("from", "all");
    spec.subset.n = j.value("n", 0);
    spec.subset.seed = j.value("seed", (uint64_t)0);
    return spec;
}

TemplateVariantSpec parse_variant(const json& j) {
    TemplateVariantSpec v;
    std::string kind = j.value("kind", "standard");
    if (kind == "standard") v.kind = TemplateVariantKind::standard;
    else if (kind == "random_fixed") v.kind = TemplateVariantKind::random_fixed;
    else if (kind == "random_nonfixed") v.kind = TemplateVariantKind::random_nonfixed;
    else if (kind == "swap") v.kind = TemplateVariantKind::swap;
    else if (kind == "named") v.kind = TemplateVariantKind::named;
    else throw std::runtime_error("unknown template kind: \"" + kind + "\"");
    v.seed = j.value("seed", (uint64_t)1);
    v.which = j.value("which", "");
    if (v.kind == TemplateVariantKind::named && v.which.empty())
        throw std::runtime_error("named template variant needs \"which\"");
    return v;
}

// everything except the weight archive, which gen-weights creates after the
// fact; `doc_out` hands the raw document back for layout/t-test extras
ExperimentConfig load_config_core(const std::string& path, std::vector<std::string>* input_paths,
                                  json* doc_out) {
    json doc = parse_json_file(path);
    if (input_paths) input_paths->push_back(path);

    ExperimentConfig cfg;
    cfg.shots = doc.value("shots", 4);
    if (doc.contains("seeds")) cfg.seeds = doc.at("seeds").get<std::vector<uint64_t>>();
    else for (uint64_t s = 1; s <= 15; ++s) cfg.seeds.push_back(s);
    cfg.n_test = doc.value("n_test", 500);
    cfg.test_shuffle_seed = doc.value("test_shuffle_seed", (uint64_t)1);

    std::string precision = doc.value("precision", "f32");
    if (precision == "f32") cfg.precision = Precision::f32;
    else if (precision == "f64") cfg.precision = Precision::f64;
    else throw std::runtime_error("unknown precision: \"" + precision + "\"");

    std::string scoring = doc.value("scoring", "full_verbalizer");
    if (scoring == "full_verbalizer") cfg.scoring = ScoringRule::full_verbalizer;
    else if (scoring == "first_token") cfg.scoring = ScoringRule::first_token;
    else throw std::runtime_error("unknown scoring rule: \"" + scoring + "\"");

    std::string exec = doc.value("exec", "parallel");
    if (exec == "parallel") cfg.exec = ExecMode::parallel;
    else if (exec == "serial") cfg.exec = ExecMode::serial;
    else throw std::runtime_error("unknown exec mode: \"" + exec + "\"");

    if (!doc.contains("datasets") || doc.at("datasets").empty())
        throw std::runtime_error("config lists no datasets");
    for (const auto& dj : doc.at("datasets")) {
        DatasetEntry ds;
        ds.name = dj.at("name").get<std::string>();
        std::string task_path = resolve_path(path, dj.at("task").get<std::string>());
        std::string train_path = resolve_path(path, dj.at("train").get<std::string>());
        std::string test_path = resolve_path(path, dj.at("test").get<std::string>());
        ds.task = load_task(task_path);
        ds.train = load_dataset(train_path, ds.task);
        ds.test = load_dataset(test_path, ds.task);
        if (input_paths) {
            input_paths->push_back(task_path);
            input_paths->push_back(train_path);
            input_paths->push_back(test_path);
        }
        cfg.datasets.push_back(std::move(ds));
    }

    if (!doc.contains("settings") || doc.at("settings").empty())
        throw std::runtime_error("config lists no settings");
    for (const auto& sj : doc.at("settings")) {
        SettingSpec s;
        s.name = sj.at("name").get<std::string>();
        if (sj.contains("shots")) s.shots = sj.at("shots").get<int>();
        if (sj.contains("template")) s.variant = parse_variant(sj.at("template"));
        if (sj.contains("ablation")) s.ablation = parse_ablation(sj.at("ablation"));
        s.reference = sj.value("reference", false);
        for (const auto& prior : cfg.settings) {
            if (prior.name == s.name)
                throw std::runtime_error("duplicate setting name: \"" + s.name + "\"");
        }
        cfg.settings.push_back(std::move(s));
    }

    auto known_setting = [&](const std::string& name) {
        for (const auto& s : cfg.settings)
            if (s.name == name) return true;
        return false;
    };
    for (const auto& pj : doc.value("pct", json::array())) {
        PctRequest r;
        r.subset_name = pj.at("subset").get<std::string>();
        r.keep_setting = pj.at("keep").get<std::string>();
        r.zero_setting = pj.at("zero").get<std::string>();
        r.standard_setting = pj.at("standard").get<std::string>();
        r.drop_setting = pj.at("drop").get<std::string>();
        for (const auto& name :
             {r.keep_setting, r.zero_setting, r.standard_setting, r.drop_setting}) {
            if (!known_setting(name))
                throw std::runtime_error("pct request references unknown setting \"" + name +
                                         "\"");
        }
        cfg.pct.push_back(std::move(r));
    }
    cfg.pct_delta = doc.value("pct_delta", 10.0);

    if (doc_out) *doc_out = std::move(doc);
    return cfg;
}

std::string model_dir_of(const json& doc, const std::string& config_path) {
    if (!doc.contains("model")) throw std::runtime_error("config lacks a \"model\" directory");
    return resolve_path(config_path, doc.at("model").get<std::string>());
}

}  // namespace

ExperimentConfig load_experiment_config(const std::string& path,
                                        std::vector<std::string>* input_paths) {
    json doc;
    ExperimentConfig cfg = load_config_core(path, input_paths, &doc);
    std::string model_dir = model_dir_of(doc, path);
    cfg.model = load_weights(model_dir);
    cfg.vocab = load_vocab((fs::path(model_dir) / "vocab.json").string());
    if (cfg.model.config.vocab_size != cfg.vocab.size())
        throw std::runtime_error("weight archive vocab_size " +
                                 std::to_string(cfg.model.config.vocab_size) +
                                 " does not match vocabulary size " +
                                 std::to_string(cfg.vocab.size()));
    if (input_paths) {
        input_paths->push_back((fs::path(model_dir) / "manifest.json").string());
        input_paths->push_back((fs::path(model_dir) / "weights.bin").string());
        input_paths->push_back((fs::path(model_dir) / "vocab.json").string());
    }
    return cfg;
}

// ---- commands ---------------------------------------------------------------------

namespace {

std::string iso8601_now() {
    std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[32];
    std::tm tm_utc;
    gmtime_r(&t, &tm_utc);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    return buf;
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << text;
}

int fail(const std::string& message, int code = 1) {
    std::cerr << "error: " << message << "\n";
    return code;
}

json aggregates_json(const ResultTable& table, const ExperimentConfig& cfg, const json& doc) {
    json out;
    // settings with group anchors resolved in declaration order
    json settings = json::array();
    std::string current_ref;
    for (const auto& s : cfg.settings) {
        if (s.reference) current_ref = s.name;
        json sj;
        sj["name"] = s.name;
        json per;
        for (const auto& ds : table.dataset_order())
            per[ds] = table.mean_accuracy(s.name, ds);
        sj["per_dataset"] = per;
        sj["avg_pct"] = setting_avg(table, s.name);
        if (!current_ref.empty() && current_ref != s.name) {
            sj["reference"] = current_ref;
            sj["delta_avg_pct"] = delta_avg(table, s.name, current_ref);
        } else {
            sj["reference"] = nullptr;
            sj["delta_avg_pct"] = nullptr;
        }
        settings.push_back(sj);
    }
    out["settings"] = settings;

    json pct = json::array();
    for (const auto& r : cfg.pct) {
        CriticalVerdict v = pct_verdict(setting_avg(table, r.keep_setting) / 100.0,
                                        setting_avg(table, r.zero_setting) / 100.0,
                                        setting_avg(table, r.standard_setting) / 100.0,
                                        setting_avg(table, r.drop_setting) / 100.0,
                                        cfg.pct_delta);
        json vj;
        vj["subset"] = r.subset_name;
        vj["gain_over_zero_shot_pp"] = v.gain_over_zero_shot;
        vj["loss_under_removal_pp"] = v.loss_under_removal;
        vj["delta_pp"] = v.delta;
        vj["gain_leg"] = v.gain_leg;
        vj["loss_leg"] = v.loss_leg;
        vj["critical"] = v.critical;
        pct.push_back(vj);
    }
    out["pct"] = pct;

    json ttests = json::array();
    for (const auto& tj : doc.value("t_tests", json::array())) {
        std::string a = tj.at("a").get<std::string>();
        std::string b = tj.at("b").get<std::string>();
        for (const auto& ds : table.dataset_order()) {
            std::vector<double> av = table.seed_accuracies(a, ds);
            std::vector<double> bv = table.seed_accuracies(b, ds);
            TTestResult r = paired_t_test(av, bv);
            json rj;
            rj["a"] = a;
            rj["b"] = b;
            rj["dataset"] = ds;
            rj["t"] = r.t;
            rj["p"] = r.p;
            rj["df"] = r.df;
            rj["significant"] = r.p < 0.05;
            ttests.push_back(rj);
        }
    }
    out["t_tests"] = ttests;
    return out;
}

}  // namespace

int cmd_run(const std::string& config_path, const std::string& out_dir, int threads) {
    try {
#ifdef _OPENMP
        if (threads > 0) omp_set_num_threads(threads);
#else
        (void)threads;
#endif
        // the weight archive gets a dedicated exit code so scripted pipelines
        // can tell "run gen-weights first" from a broken config
        json probe = parse_json_file(config_path);
        std::string model_dir = model_dir_of(probe, config_path);
        if (!fs::exists(fs::path(model_dir) / "manifest.json") ||
            !fs::exists(fs::path(model_dir) / "weights.bin"))
            return fail("weight archive not found: " + model_dir, 2);

        std::vector<std::string> input_paths;
        json doc;
        ExperimentConfig cfg = load_config_core(config_path, &input_paths, &doc);
        std::string dir = model_dir_of(doc, config_path);
        cfg.model = load_weights(dir);
        cfg.vocab = load_vocab((fs::path(dir) / "vocab.json").string());
        if (cfg.model.config.vocab_size != cfg.vocab.size())
            return fail("weight archive vocab_size does not match vocabulary size");
        input_paths.push_back((fs::path(dir) / "manifest.json").string());
        input_paths.push_back((fs::path(dir) / "weights.bin").string());
        input_paths.push_back((fs::path(dir) / "vocab.json").string());

        std::string started = iso8601_now();
        std::string csv = run_suite(cfg).to_csv();
        // aggregates and report re-derive everything from the published rows
        ResultTable table = ResultTable::from_csv(csv);

        fs::create_directories(out_dir);
        write_text_file((fs::path(out_dir) / "results.csv").string(), csv);

        json aggregates = aggregates_json(table, cfg, doc);
        write_text_file((fs::path(out_dir) / "aggregates.json").string(),
                        aggregates.dump(1) + "\n");

        std::vector<std::string> references;
        for (const auto& s : cfg.settings)
            if (s.reference) references.push_back(s.name);
        ReportLayout layout = report_layout_from_string(doc.value("layout", "rep_ablation"));
        write_text_file((fs::path(out_dir) / "report.md").string(),
                        emit_markdown(table, references, layout));

        json manifest;
        manifest["tool_version"] = kToolVersion;
        manifest["config"] = config_path;
        manifest["config_fnv1a64"] = hex64(fnv1a64_file(config_path));
        manifest["started"] = started;
        manifest["finished"] = iso8601_now();
        json inputs = json::array();
        for (const auto& p : input_paths) {
            json ij;
            ij["path"] = p;
            ij["fnv1a64"] = hex64(fnv1a64_file(p));
            inputs.push_back(ij);
        }
        manifest["inputs"] = inputs;
        manifest["outputs"] = {"results.csv", "aggregates.json", "report.md", "manifest.json"};
        write_text_file((fs::path(out_dir) / "manifest.json").string(),
                        manifest.dump(1) + "\n");
        return 0;
    } catch (const std::exception& e) {
        return fail(e.what());
    }
}

int cmd_inspect(const std::string& task_path, const std::string& train_path,
                const std::string& test_path, int shots, uint64_t seed, int test_index,
                bool as_json, std::string* out) {
    try {
        TaskSpec task = load_task(task_path);
        std::vector<DatasetRecord> train = load_dataset(train_path, task);
        std::vector<DatasetRecord> test = load_dataset(test_path, task);
        if (test_index < 0 || test_index >= (int)test.size())
            throw std::runtime_error("test index " + std::to_string(test_index) +
                                     " outside 0.." + std::to_string(test.size() - 1));

        std::vector<DatasetRecord> demos = sample_demonstrations(train, shots, seed);
        PromptComponents pc = make_components(task, demos, test[test_index]);

        std::vector<std::string> texts = {render_text(pc)};
        for (const auto& v : task.verbalizers) texts.push_back(v);
        Vocabulary vocab = build_vocab_from_texts(texts);
        BuiltPrompt prompt = assemble_prompt(task, pc, vocab);

        std::ostringstream os;
        if (as_json) {
            os << dump_prompt_json(prompt) << "\n";
        } else {
            os << "idx   token            class      demo\n";
            for (int i = 0; i < prompt.size(); ++i) {
                std::string surface = prompt.surfaces[i];
                if (surface == "\n") surface = "\\n";
                char line[96];
                std::snprintf(line, sizeof(line), "%-5d %-16s %-10s %d\n", i, surface.c_str(),
                              to_string(prompt.spans.cls[i]), prompt.spans.demo_index[i]);
                os << line;
            }
        }
        if (out) *out = os.str();
        else std::cout << os.str();
        return 0;
    } catch (const std::exception& e) {
        return fail(e.what());
    }
}

int cmd_report(const std::string& csv_path, const std::string& out_path,
               const std::string& layout, const std::vector<std::string>& references) {
    try {
        std::ifstream in(csv_path, std::ios::binary);
        if (!in) throw std::runtime_error("cannot open results: " + csv_path);
        std::ostringstream buf;
        buf << in.rdbuf();
        ResultTable table = ResultTable::from_csv(buf.str());
        std::string text = emit_markdown(table, references, report_layout_from_string(layout));
        if (out_path == "-") std::cout << text;
        else write_text_file(out_path, text);
        return 0;
    } catch (const std::exception& e) {
        return fail(e.what());
    }
}

int cmd_gen_weights(const std::string& config_path, const std::string& out_dir, uint64_t seed) {
    try {
        json doc;
        ExperimentConfig cfg = load_config_core(config_path, nullptr, &doc);
        // no --out means "where the config's run command will look"
        std::string dir = out_dir.empty() ? model_dir_of(doc, config_path) : out_dir;

        // the vocabulary must cover every surface any configured setting can
        // put into a prompt, including seeded random template cues
        std::vector<std::string> texts;
        auto add_template = [&](const std::string& tmpl) {
            for (const auto& piece : parse_template(tmpl))
                if (!piece.is_slot) texts.push_back(piece.text);
        };
        for (const auto& ds : cfg.datasets) {
            texts.push_back(ds.task.instruction);
            for (const auto& v : ds.task.verbalizers) texts.push_back(v);
            add_template(ds.task.template_in);
            add_template(ds.task.template_out);
            for (const auto& rec : ds.train) {
                texts.push_back(rec.text_a);
                if (rec.text_b) texts.push_back(*rec.text_b);
            }
            for (const auto& rec : ds.test) {
                texts.push_back(rec.text_a);
                if (rec.text_b) texts.push_back(*rec.text_b);
            }
            for (const auto& setting : cfg.settings) {
                if (!setting.variant) continue;
                int shots = setting.shots.value_or(cfg.shots);
                for (uint64_t run_seed : cfg.seeds) {
                    TemplateVariant variant =
                        resolve_variant(ds.task, shots, setting, run_seed);
                    for (const auto& entry : variant.entries) {
                        add_template(entry.in);
                        add_template(entry.out);
                    }
                }
            }
        }
        Vocabulary vocab = build_vocab_from_texts(texts);

        ModelConfig arch;
        if (doc.contains("model_arch")) arch = parse_model_config(doc.at("model_arch").dump());
        arch.vocab_size = vocab.size();

        WeightArchive archive = init_weights(arch, seed);
        fs::create_directories(dir);
        save_weights(archive, dir);
        save_vocab(vocab, (fs::path(dir) / "vocab.json").string());
        std::cout << "wrote " << archive.tensors.size() << " tensors, vocabulary of "
                  << vocab.size() << " surfaces to " << dir << "\n";
        return 0;
    } catch (const std::exception& e) {
        return fail(e.what());
    }
}

int cmd_gen_synthetic(const std::string& out_dir, int classes, int n_train, int n_test,
                      uint64_t seed, const std::string& name) {
    try {
        SynthBundle bundle = gen_synthetic(classes, n_train, n_test, seed, name);
        fs::create_directories(out_dir);
        save_task(bundle.task, (fs::path(out_dir) / "task.json").string());
        save_dataset_jsonl(bundle.train, bundle.task,
                           (fs::path(out_dir) / "train.jsonl").string());
        save_dataset_jsonl(bundle.test, bundle.task, (fs::path(out_dir) / "test.jsonl").string());

        // a ready-to-run sweep over the eight canonical settings
        json config;
        config["model"] = "weights";
        config["model_arch"] = {{"n_layers", 2}, {"n_heads", 4}, {"d_model", 64},
                                {"d_ff", 256},   {"pos_encoding", "rotary"}};
        config["shots"] = 4;
        config["seeds"] = {1, 2, 3};
        config["n_test"] = n_test;
        config["layout"] = "rep_ablation";
        config["datasets"] = json::array(
            {{{"name", name}, {"task", "task.json"}, {"train", "train.jsonl"}, {"test", "test.jsonl"}}});
        json settings = json::array();
        settings.push_back({{"name", "zero_shot"}, {"shots", 0}, {"reference", true}});
        for (const char* cls : {"CONT", "STOP", "TEMP"}) {
            std::string lower = cls;
            for (auto& c : lower) c = (char)std::tolower((unsigned char)c);
            settings.push_back({{"name", "plus_" + lower},
                                {"ablation",
                                 {{"mode", "representation"},
                                  {"direction", "keep"},
                                  {"classes", {cls}}}}});
        }
        settings.push_back({{"name", "standard"}, {"reference", true}});
        for (const char* cls : {"CONT", "STOP", "TEMP"}) {
            std::string lower = cls;
            for (auto& c : lower) c = (char)std::tolower((unsigned char)c);
            settings.push_back({{"name", "minus_" + lower},
                                {"ablation",
                                 {{"mode", "representation"},
                                  {"direction", "drop"},
                                  {"classes", {cls}}}}});
        }
        config["settings"] = settings;
        json pct = json::array();
        for (const char* cls : {"CONT", "STOP", "TEMP"}) {
            std::string lower = cls;
            for (auto& c : lower) c = (char)std::tolower((unsigned char)c);
            pct.push_back({{"subset", cls},
                           {"keep", "plus_" + lower},
                           {"zero", "zero_shot"},
                           {"standard", "standard"},
                           {"drop", "minus_" + lower}});
        }
        config["pct"] = pct;
        config["t_tests"] = json::array({{{"a", "standard"}, {"b", "minus_temp"}}});
        write_text_file((fs::path(out_dir) / "run_config.json").string(),
                        config.dump(1) + "\n");
        std::cout << "wrote task.json, train.jsonl, test.jsonl, run_config.json to " << out_dir
                  << "\n";
        return 0;
    } catch (const std::exception& e) {
        return fail(e.what());
    }
}

}  // namespace icl
