#include <exception>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "orch/pipeline.hpp"

namespace {

// Exit codes: 0 success, 1 IO/internal, 2 config, 3 missing input,
// 4 schema-version mismatch.
int exit_code_for(const orch::OrchError& e) {
    switch (e.code()) {
        case orch::ErrorCode::InvalidConfig:
        case orch::ErrorCode::FieldCountOutOfRange:
            return 2;
        case orch::ErrorCode::MissingInput:
            return 3;
        case orch::ErrorCode::SchemaVersionMismatch:
            return 4;
        default:
            return 1;
    }
}

struct CommonArgs {
    std::string config_path;
    std::string workdir;
    std::vector<std::pair<std::string, std::string>> overrides;
};

void add_override(CommonArgs& args, const std::string& key, const std::string& value) {
    args.overrides.emplace_back(key, value);
}

// Registers a flag that, when given, lands in the override list.
void add_opt(CLI::App* cmd, CommonArgs& args, const std::string& flag, const std::string& key,
             const std::string& help) {
    cmd->add_option_function<std::string>(
           flag, [&args, key](const std::string& v) { add_override(args, key, v); }, help)
        ->expected(1);
}

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "flat key=value config file");
    cmd->add_option_function<std::string>(
        "--workdir", [&args](const std::string& v) { add_override(args, "workdir", v); },
        "directory all relative paths resolve against");
    add_opt(cmd, args, "--seed", "seed", "seed for every stage (overrides ORCH_SEED)");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"seedable warehouse-orchestration benchmark pipeline"};
    app.require_subcommand(1);

    CommonArgs args;
    std::string train_policy = "dqn";
    std::string eval_policy;
    std::string sweep_out = "sweep.csv";

    auto* generate = app.add_subcommand("generate", "write the synthetic dataset + manifest");
    add_common(generate, args);
    add_opt(generate, args, "--n", "n", "number of records (default 300000)");
    add_opt(generate, args, "--disruption-rate", "disruption_rate", "disrupted fraction (default 0.05)");
    add_opt(generate, args, "--multilingual-rate", "multilingual_rate", "Spanish fraction (default 0.10)");
    add_opt(generate, args, "--missing-rate", "missing_rate", "absent-priority fraction (default 0.03)");
    add_opt(generate, args, "--outlier-rate", "outlier_rate", "outlier-quantity fraction (default 0.01)");
    add_opt(generate, args, "--fields", "fields", "total schema width incl. 14 core fields (default 900)");
    add_opt(generate, args, "--workers", "workers", "scenario worker count (default 8)");
    add_opt(generate, args, "--out", "dataset", "output JSONL path (default data.jsonl)");

    auto* preprocess = app.add_subcommand("preprocess", "clean + encode features from the dataset");
    add_common(preprocess, args);
    add_opt(preprocess, args, "--in", "dataset", "dataset JSONL path");
    add_opt(preprocess, args, "--out", "features", "features CSV path (default features.csv)");
    add_opt(preprocess, args, "--meta", "features_meta", "sidecar JSON path");
    add_opt(preprocess, args, "--normalize", "normalize", "lexicon normalization on/off");
    add_opt(preprocess, args, "--feature-limit", "feature_limit", "post-pruning column budget (default 100)");

    auto* train = app.add_subcommand("train", "train a policy on the train shifts");
    add_common(train, args);
    train->add_option("--policy", train_policy, "dqn or forest")->required();
    add_opt(train, args, "--steps", "train_steps", "DQN training steps");
    add_opt(train, args, "--learning-rate", "learning_rate", "DQN learning rate (default 0.01)");
    add_opt(train, args, "--hidden-layers", "hidden_layers", "hidden layer count (default 5)");
    add_opt(train, args, "--hidden-width", "hidden_width", "hidden layer width (default 64)");
    add_opt(train, args, "--grid-learning-rates", "grid_learning_rates",
            "comma list; grid-search axis over learning rates");
    add_opt(train, args, "--grid-hidden-widths", "grid_hidden_widths",
            "comma list; grid-search axis over hidden widths");
    add_opt(train, args, "--trees", "n_trees", "forest size (default 50)");
    add_opt(train, args, "--max-depth", "max_depth", "tree depth limit (default 8)");
    add_opt(train, args, "--normalize", "normalize", "lexicon normalization on/off");

    auto* evaluate = app.add_subcommand("evaluate", "run one policy over the test shifts");
    add_common(evaluate, args);
    evaluate->add_option("--policy", eval_policy, "dqn, forest or rule")->required();
    add_opt(evaluate, args, "--normalize", "normalize", "lexicon normalization on/off");

    auto* sweep = app.add_subcommand("sweep", "schema-complexity sweep (full pipeline per point)");
    add_common(sweep, args);
    add_opt(sweep, args, "--fields", "sweep_fields", "comma list of field counts");
    add_opt(sweep, args, "--n", "sweep_n", "records per sweep point (default 3000)");
    add_opt(sweep, args, "--steps", "sweep_train_steps", "DQN steps per sweep point");
    sweep->add_option("--out", sweep_out, "output CSV (default sweep.csv)");

    auto* report = app.add_subcommand("report", "assemble metrics.csv, heatmap.csv and summary.txt");
    add_common(report, args);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_name() == "CallForHelp" || e.get_name() == "CallForAllHelp") {
            return app.exit(e);
        }
        std::cerr << e.what() << '\n';
        return 2;
    }

    try {
        const orch::RunConfig cfg = orch::load_run_config(args.config_path, args.overrides);
        if (generate->parsed()) orch::run_generate(cfg);
        if (preprocess->parsed()) orch::run_preprocess(cfg);
        if (train->parsed()) orch::run_train(cfg, train_policy);
        if (evaluate->parsed()) orch::run_evaluate(cfg, eval_policy);
        if (sweep->parsed()) orch::run_sweep(cfg, sweep_out);
        if (report->parsed()) orch::run_report(cfg);
        return 0;
    } catch (const orch::OrchError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_code_for(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
