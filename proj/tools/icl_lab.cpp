// icl-lab: build structured few-shot prompts, ablate token classes at the
// representation or token level, sweep settings over seeds, and render
// reports. Everything is deterministic given the config and weight archive.

#include <cstdlib>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "icl/report.hpp"

int main(int argc, char** argv) {
    CLI::App app{"prompt-token ablation lab for in-context learning"};
    app.require_subcommand(1);

    const char* env_out = std::getenv("ICL_LAB_OUT");
    std::string default_out = env_out ? env_out : "out";

    auto* run = app.add_subcommand("run", "execute a configured sweep and write artifacts");
    std::string run_config;
    std::string run_out = default_out;
    int run_threads = 0;
    run->add_option("--config", run_config, "experiment config JSON")->required();
    run->add_option("--out", run_out, "output directory (default $ICL_LAB_OUT or ./out)");
    run->add_option("--threads", run_threads, "worker threads, 0 = runtime default");

    auto* inspect =
        app.add_subcommand("inspect", "print one prompt as token / class / demo-index rows");
    std::string ins_task, ins_train, ins_test;
    int ins_shots = 4;
    uint64_t ins_seed = 1;
    int ins_index = 0;
    bool ins_json = false;
    inspect->add_option("--task", ins_task, "task spec JSON")->required();
    inspect->add_option("--train", ins_train, "demonstration pool (JSONL or CSV)")->required();
    inspect->add_option("--test", ins_test, "test split (JSONL or CSV)")->required();
    inspect->add_option("--shots", ins_shots, "demonstrations to sample");
    inspect->add_option("--seed", ins_seed, "demonstration sampling seed");
    inspect->add_option("--test-index", ins_index, "which test record to wrap");
    inspect->add_flag("--json", ins_json, "emit the span map as JSON");

    auto* report = app.add_subcommand("report", "render a markdown table from a results CSV");
    std::string rep_csv, rep_out = "-", rep_layout = "rep_ablation";
    std::vector<std::string> rep_refs;
    report->add_option("--results", rep_csv, "results.csv from a run")->required();
    report->add_option("--out", rep_out, "markdown path, - for stdout");
    report->add_option("--layout", rep_layout, "rep_ablation | token_ablation | perturbation");
    report->add_option("--reference", rep_refs, "setting names anchoring report groups");

    auto* genw = app.add_subcommand(
        "gen-weights", "write a deterministic random-init weight archive sized to a config");
    std::string gw_config, gw_out;
    uint64_t gw_seed = 1;
    genw->add_option("--config", gw_config, "experiment config JSON")->required();
    genw->add_option("--out", gw_out, "archive directory (default: the config's model path)");
    genw->add_option("--seed", gw_seed, "init seed");

    auto* gens = app.add_subcommand("gen-synthetic",
                                    "emit a toy classification dataset plus a ready run config");
    std::string gs_out = default_out, gs_name = "synth";
    int gs_classes = 4, gs_train = 64, gs_test = 200;
    uint64_t gs_seed = 1;
    gens->add_option("--out", gs_out, "output directory (default $ICL_LAB_OUT or ./out)");
    gens->add_option("--classes", gs_classes, "label count (2..8)");
    gens->add_option("--train", gs_train, "training records");
    gens->add_option("--test", gs_test, "test records");
    gens->add_option("--seed", gs_seed, "generation seed");
    gens->add_option("--name", gs_name, "task name");

    CLI11_PARSE(app, argc, argv);

    if (run->parsed()) return icl::cmd_run(run_config, run_out, run_threads);
    if (inspect->parsed())
        return icl::cmd_inspect(ins_task, ins_train, ins_test, ins_shots, ins_seed, ins_index,
                                ins_json);
    if (report->parsed()) return icl::cmd_report(rep_csv, rep_out, rep_layout, rep_refs);
    if (genw->parsed()) return icl::cmd_gen_weights(gw_config, gw_out, gw_seed);
    if (gens->parsed())
        return icl::cmd_gen_synthetic(gs_out, gs_classes, gs_train, gs_test, gs_seed, gs_name);
    return 1;
}
