#pragma once

#include <string>
#include <utility>
#include <vector>

#include "orch/baselines.hpp"
#include "orch/datagen.hpp"
#include "orch/dqn.hpp"

namespace orch {

// Merged run configuration. Source precedence: CLI flag > ORCH_SEED env
// var (seed only) > config file > built-in default. Unknown keys are
// errors; every consumed key is validated before any stage runs.
struct RunConfig {
    GenConfig gen;
    int shift_minutes = 480;
    bool normalize = true;
    Hyperparams hp;
    int n_trees = 50;
    int max_depth = 8;
    int min_samples_split = 5;
    RulePolicyConfig rule;
    double train_frac = 0.8;
    int cv_folds = 5;
    int feature_limit = 100;

    std::vector<double> grid_learning_rates; // optional grid-search axes
    std::vector<int> grid_hidden_widths;

    std::vector<int> sweep_fields = {100, 300, 500, 700, 900};
    int64_t sweep_n = 3000;
    int64_t sweep_train_steps = 12000;

    std::string workdir = ".";
    std::string dataset_path = "data.jsonl";
    std::string features_path = "features.csv";
    std::string features_meta_path = "features.meta.json";
    std::string dqn_checkpoint_path = "dqn_checkpoint.json";
    std::string forest_checkpoint_path = "forest_checkpoint.json";
    std::string curve_path = "training_curve.csv";

    // Applies one key=value pair; throws InvalidConfig on unknown keys or
    // unparseable values.
    void apply(const std::string& key, const std::string& value);
    void validate() const;

    std::string resolve(const std::string& relpath) const;
};

// Flat key=value lines, '#' comments, blank lines ignored.
std::vector<std::pair<std::string, std::string>> parse_config_file(const std::string& path);

// defaults -> file -> ORCH_SEED -> overrides (CLI flags).
RunConfig load_run_config(const std::string& config_path,
                          const std::vector<std::pair<std::string, std::string>>& overrides);

} // namespace orch
