#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "icl/experiment.hpp"

namespace icl {

enum class ReportLayout { rep_ablation, token_ablation, perturbation };

ReportLayout report_layout_from_string(const std::string& s);

// Accuracy percent with one decimal, half rounded away from zero.
std::string render_pct(double percent);
// Same with an explicit sign, for delta columns.
std::string render_delta(double pp);

// Settings as rows, datasets as columns, Avg and (when more than one setting
// shares a group) a trailing delta column against the group's reference row.
// Groups start at each reference row; the best value per column in a group
// is bold and the largest drop against the reference is underlined.
std::string emit_markdown(const ResultTable& table, const std::vector<std::string>& references,
                          ReportLayout layout);

uint64_t fnv1a64(const void* data, size_t n);
uint64_t fnv1a64_file(const std::string& path);  // throws if unreadable

// cmd_* return process exit codes and print machine-parsable single-line
// errors to stderr. cmd_run writes results.csv, aggregates.json, report.md,
// and manifest.json into out_dir; a missing weight archive exits with 2.
int cmd_run(const std::string& config_path, const std::string& out_dir, int threads = 0);
int cmd_inspect(const std::string& task_path, const std::string& train_path,
                const std::string& test_path, int shots, uint64_t seed, int test_index,
                bool as_json, std::string* out = nullptr);
int cmd_report(const std::string& csv_path, const std::string& out_path,
               const std::string& layout, const std::vector<std::string>& references);
int cmd_gen_weights(const std::string& config_path, const std::string& out_dir, uint64_t seed);
int cmd_gen_synthetic(const std::string& out_dir, int classes, int n_train, int n_test,
                      uint64_t seed, const std::string& name);

// Loads the run config JSON and every asset it references. input_paths, when
// given, receives every file the run depends on (for the manifest digests).
ExperimentConfig load_experiment_config(const std::string& path,
                                        std::vector<std::string>* input_paths = nullptr);

}  // namespace icl
