#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "icl/ablation.hpp"
#include "icl/corpus.hpp"
#include "icl/perturbation.hpp"
#include "icl/runtime.hpp"
#include "icl/stats.hpp"

namespace icl {

enum class Precision { f32, f64 };

struct TemplateVariantSpec {
    TemplateVariantKind kind = TemplateVariantKind::standard;
    uint64_t seed = 1;
    std::string which;  // named sets only
};

struct SettingSpec {
    std::string name;
    std::optional<int> shots;  // overrides the config default; 0 = empty context
    std::optional<TemplateVariantSpec> variant;
    std::optional<AblationSpec> ablation;
    bool reference = false;  // anchors a report group
};

struct DatasetEntry {
    std::string name;
    TaskSpec task;
    std::vector<DatasetRecord> train;
    std::vector<DatasetRecord> test;
};

struct PctRequest {
    std::string subset_name;  // e.g. "TEMP"
    std::string keep_setting;
    std::string zero_setting;
    std::string standard_setting;
    std::string drop_setting;
};

struct ExperimentConfig {
    std::vector<DatasetEntry> datasets;
    WeightArchive model;
    Vocabulary vocab;
    int shots = 4;
    std::vector<uint64_t> seeds;  // default 1..15
    int n_test = 500;
    uint64_t test_shuffle_seed = 1;
    Precision precision = Precision::f32;
    ScoringRule scoring = ScoringRule::full_verbalizer;
    ExecMode exec = ExecMode::parallel;
    std::vector<SettingSpec> settings;
    std::vector<PctRequest> pct;
    double pct_delta = 10.0;
};

struct ResultRow {
    std::string setting;
    std::string dataset;
    uint64_t seed = 0;
    int correct = 0;
    int total = 0;
    double accuracy() const { return total == 0 ? 0.0 : (double)correct / total; }
};

struct ResultTable {
    std::vector<ResultRow> rows;

    std::string to_csv() const;  // header setting,dataset,seed,accuracy
    static ResultTable from_csv(const std::string& text);

    // mean accuracy over seeds, as a fraction; errors if no rows match
    double mean_accuracy(const std::string& setting, const std::string& dataset) const;
    std::vector<std::string> setting_order() const;  // first-appearance order
    std::vector<std::string> dataset_order() const;
    // per-seed accuracies for a (setting, dataset), seeds ascending
    std::vector<double> seed_accuracies(const std::string& setting,
                                        const std::string& dataset) const;
};

// Deterministic sweep over settings x seeds x sampled test records. Errors
// are rethrown with the (setting, seed) that produced them.
ResultTable run_suite(const ExperimentConfig& cfg);

// The template assignment a setting uses for one run seed. Random kinds mix
// the variant seed with the run seed so repeated runs stay reproducible.
TemplateVariant resolve_variant(const TaskSpec& task, int shots, const SettingSpec& setting,
                                uint64_t run_seed);

double accuracy(const std::vector<int>& predictions, const std::vector<int>& gold);

// Mean over datasets of per-dataset mean accuracy, in percent.
double setting_avg(const ResultTable& table, const std::string& setting);

// setting_avg(setting) - setting_avg(reference), percentage points.
double delta_avg(const ResultTable& table, const std::string& setting,
                 const std::string& reference);

// Mean token count per class over the given prompts.
std::map<TokenClass, double> token_count_report(const std::vector<BuiltPrompt>& prompts);

// Prompts the standard (unablated) setting would build: one per seed, using
// the first sampled test record of the dataset.
std::vector<BuiltPrompt> standard_prompts(const ExperimentConfig& cfg, const DatasetEntry& ds);

}  // namespace icl
