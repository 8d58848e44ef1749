#include "icl/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "icl/rng.hpp"

namespace icl {

namespace {

std::string format_accuracy(double acc) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", acc);
    return buf;
}

// one (setting, seed) cell over the sampled test records
int run_cell(const ExperimentConfig& cfg, const DatasetEntry& ds,
             const std::vector<const DatasetRecord*>& sample,
             const std::vector<std::vector<int>>& label_tokens, const SettingSpec& setting,
             uint64_t seed) {
    int shots = setting.shots.value_or(cfg.shots);
    std::vector<DatasetRecord> demos = sample_demonstrations(ds.train, shots, seed);
    TemplateVariant variant = resolve_variant(ds.task, shots, setting, seed);
    const AblationSpec* ab = setting.ablation ? &*setting.ablation : nullptr;

    const int n = (int)sample.size();
    int correct = 0;
    std::string err;
    bool outer_parallel = cfg.exec == ExecMode::parallel;
#pragma omp parallel for schedule(static) reduction(+ : correct) if (outer_parallel)
    for (int i = 0; i < n; ++i) {
        try {
            const DatasetRecord& rec = *sample[i];
            PromptComponents pc = make_components(ds.task, demos, rec, variant);
            if (ab && ab->mode == AblationMode::token_drop) pc = drop_tokens(pc, ds.task, *ab);
            BuiltPrompt prompt = assemble_prompt(ds.task, pc, cfg.vocab);
            VisibilityPlan plan;
            const VisibilityPlan* plan_ptr = nullptr;
            if (ab && ab->mode != AblationMode::token_drop) {
                plan = build_plan(prompt, *ab);
                plan_ptr = &plan;
            }
            // examples run in parallel, so each forward pass stays serial
            std::vector<double> scores =
                cfg.precision == Precision::f32
                    ? score_labels<float>(prompt.tokens, cfg.model, plan_ptr, label_tokens,
                                          cfg.scoring, ExecMode::serial)
                    : score_labels<double>(prompt.tokens, cfg.model, plan_ptr, label_tokens,
                                           cfg.scoring, ExecMode::serial);
            if (argmax_label(scores) == rec.label) ++correct;
        } catch (const std::exception& e) {
#pragma omp critical
            if (err.empty()) err = e.what();
        }
    }
    if (!err.empty()) throw std::runtime_error(err);
    return correct;
}

}  // namespace

TemplateVariant resolve_variant(const TaskSpec& task, int shots, const SettingSpec& setting,
                                uint64_t run_seed) {
    if (!setting.variant) return standard_variant(task, shots);
    const TemplateVariantSpec& v = *setting.variant;
    // random draws stay deterministic but differ across run seeds
    uint64_t vseed = v.seed * 1000003ull + run_seed;
    switch (v.kind) {
        case TemplateVariantKind::standard: return standard_variant(task, shots);
        case TemplateVariantKind::random_fixed:
            return gen_random_template(task, shots, vseed, true);
        case TemplateVariantKind::random_nonfixed:
            return gen_random_template(task, shots, vseed, false);
        case TemplateVariantKind::swap: return swap_templates(task, shots);
        case TemplateVariantKind::named: return named_template_set(task, shots, v.which);
    }
    throw std::runtime_error("unhandled template variant kind");
}

ResultTable run_suite(const ExperimentConfig& cfg) {
    if (cfg.settings.empty()) throw std::runtime_error("no settings configured");
    if (cfg.seeds.empty()) throw std::runtime_error("no seeds configured");
    ResultTable table;
    for (const auto& ds : cfg.datasets) {
        if (ds.test.empty()) throw std::runtime_error("dataset " + ds.name + " has no test records");
        std::vector<int> order = shuffled_indices((int)ds.test.size(), cfg.test_shuffle_seed);
        int n_test = std::min((int)ds.test.size(), cfg.n_test);
        std::vector<const DatasetRecord*> sample;
        sample.reserve(n_test);
        for (int i = 0; i < n_test; ++i) sample.push_back(&ds.test[order[i]]);

        std::vector<std::vector<int>> label_tokens;
        for (const auto& v : ds.task.verbalizers) label_tokens.push_back(tokenize(v, cfg.vocab));

        for (const auto& setting : cfg.settings) {
            for (uint64_t seed : cfg.seeds) {
                ResultRow row;
                row.setting = setting.name;
                row.dataset = ds.name;
                row.seed = seed;
                row.total = n_test;
                try {
                    row.correct = run_cell(cfg, ds, sample, label_tokens, setting, seed);
                } catch (const std::exception& e) {
                    throw std::runtime_error("setting \"" + setting.name + "\" seed " +
                                             std::to_string(seed) + ": " + e.what());
                }
                table.rows.push_back(std::move(row));
            }
        }
    }
    return table;
}

// ---- result tables -----------------------------------------------------------

std::string ResultTable::to_csv() const {
    std::string out = "setting,dataset,seed,accuracy\n";
    for (const auto& r : rows) {
        out += r.setting + "," + r.dataset + "," + std::to_string(r.seed) + "," +
               format_accuracy(r.accuracy()) + "\n";
    }
    return out;
}

ResultTable ResultTable::from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != "setting,dataset,seed,accuracy")
        throw std::runtime_error("result CSV lacks the setting,dataset,seed,accuracy header");
    ResultTable table;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<std::string> fields;
        size_t start = 0;
        while (fields.size() < 3) {
            size_t comma = line.find(',', start);
            if (comma == std::string::npos)
                throw std::runtime_error("result CSV line " + std::to_string(lineno) +
                                         ": expected 4 fields");
            fields.push_back(line.substr(start, comma - start));
            start = comma + 1;
        }
        fields.push_back(line.substr(start));
        ResultRow row;
        row.setting = fields[0];
        row.dataset = fields[1];
        try {
            row.seed = std::stoull(fields[2]);
            double acc = std::stod(fields[3]);
            if (acc < 0.0 || acc > 1.0) throw std::runtime_error("accuracy out of [0, 1]");
            // accuracies round-trip as parts per billion
            row.correct = (int)std::llround(acc * 1000000000.0);
            row.total = 1000000000;
        } catch (const std::exception& e) {
            throw std::runtime_error("result CSV line " + std::to_string(lineno) + ": " +
                                     e.what());
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

double ResultTable::mean_accuracy(const std::string& setting, const std::string& dataset) const {
    double sum = 0.0;
    int n = 0;
    for (const auto& r : rows) {
        if (r.setting == setting && r.dataset == dataset) {
            sum += r.accuracy();
            ++n;
        }
    }
    if (n == 0)
        throw std::runtime_error("no rows for setting \"" + setting + "\" dataset \"" + dataset +
                                 "\"");
    return sum / n;
}

std::vector<std::string> ResultTable::setting_order() const {
    std::vector<std::string> out;
    for (const auto& r : rows) {
        if (std::find(out.begin(), out.end(), r.setting) == out.end()) out.push_back(r.setting);
    }
    return out;
}

std::vector<std::string> ResultTable::dataset_order() const {
    std::vector<std::string> out;
    for (const auto& r : rows) {
        if (std::find(out.begin(), out.end(), r.dataset) == out.end()) out.push_back(r.dataset);
    }
    return out;
}

std::vector<double> ResultTable::seed_accuracies(const std::string& setting,
                                                 const std::string& dataset) const {
    std::vector<std::pair<uint64_t, double>> hits;
    for (const auto& r : rows) {
        if (r.setting == setting && r.dataset == dataset) hits.push_back({r.seed, r.accuracy()});
    }
    std::sort(hits.begin(), hits.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<double> out;
    for (const auto& [seed, acc] : hits) out.push_back(acc);
    return out;
}

// ---- aggregates ----------------------------------------------------------------

double accuracy(const std::vector<int>& predictions, const std::vector<int>& gold) {
    if (predictions.size() != gold.size())
        throw std::runtime_error("prediction and gold vectors differ in length");
    if (predictions.empty()) throw std::runtime_error("cannot take accuracy of nothing");
    int correct = 0;
    for (size_t i = 0; i < predictions.size(); ++i) correct += predictions[i] == gold[i];
    return (double)correct / predictions.size();
}

double setting_avg(const ResultTable& table, const std::string& setting) {
    std::vector<std::string> datasets = table.dataset_order();
    if (datasets.empty()) throw std::runtime_error("empty result table");
    double sum = 0.0;
    for (const auto& ds : datasets) sum += table.mean_accuracy(setting, ds);
    return sum / datasets.size() * 100.0;
}

double delta_avg(const ResultTable& table, const std::string& setting,
                 const std::string& reference) {
    return setting_avg(table, setting) - setting_avg(table, reference);
}

std::map<TokenClass, double> token_count_report(const std::vector<BuiltPrompt>& prompts) {
    if (prompts.empty()) throw std::runtime_error("no prompts to count");
    std::map<TokenClass, double> mean;
    for (int c = 0; c < kNumTokenClasses; ++c) mean[(TokenClass)c] = 0.0;
    for (const auto& p : prompts) {
        for (TokenClass c : p.spans.cls) mean[c] += 1.0;
    }
    for (auto& [c, v] : mean) v /= prompts.size();
    return mean;
}

std::vector<BuiltPrompt> standard_prompts(const ExperimentConfig& cfg, const DatasetEntry& ds) {
    if (ds.test.empty()) throw std::runtime_error("dataset " + ds.name + " has no test records");
    std::vector<int> order = shuffled_indices((int)ds.test.size(), cfg.test_shuffle_seed);
    const DatasetRecord& test = ds.test[order[0]];
    std::vector<BuiltPrompt> out;
    for (uint64_t seed : cfg.seeds) {
        std::vector<DatasetRecord> demos = sample_demonstrations(ds.train, cfg.shots, seed);
        PromptComponents pc = make_components(ds.task, demos, test);
        out.push_back(assemble_prompt(ds.task, pc, cfg.vocab));
    }
    return out;
}

}  // namespace icl
