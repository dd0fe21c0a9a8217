#pragma once

#include <memory>
#include <string>
#include <vector>

#include "orch/config.hpp"
#include "orch/eval.hpp"

namespace orch {

using SlicePtr = std::shared_ptr<const std::vector<TransactionRecord>>;

// Rows grouped into shift_minutes-wide arrival windows, in timeline order.
std::vector<std::vector<size_t>> shift_row_groups(const Dataset& ds, int shift_minutes);

// One copied record slice per selected shift.
std::vector<SlicePtr> make_shift_slices(const Dataset& ds,
                                        const std::vector<std::vector<size_t>>& groups,
                                        const std::vector<size_t>& shift_indices);

// Shift-level 80/20 + k folds, stratified on "shift contains a disruption".
SplitSpec split_shifts(const Dataset& ds, const std::vector<std::vector<size_t>>& groups,
                       double train_frac, int k, uint64_t seed);

// Episode adapter the trainer drives; episodes cycle the slices in order.
class WarehouseTrainEnv final : public TrainEnv {
public:
    WarehouseTrainEnv(std::vector<SlicePtr> slices, ScenarioParams scenario);

    void start_episode(int64_t episode_index) override;
    bool done() const override;
    StateVector observe(const QNetwork& net) const override;
    std::pair<double, bool> apply(int action_index) override;
    int action_dim() const override;
    int state_dim() const override { return StateVector::kDim + scenario_.n_workers; }

    Environment& env() { return *env_; }

private:
    std::vector<SlicePtr> slices_;
    ScenarioParams scenario_;
    std::unique_ptr<Environment> env_;
};

// In-memory end-to-end run shared by the sweep, the ablation, and the
// acceptance suite. Results come back in policy order {dqn, forest, rule}.
struct PipelineRun {
    Dataset dataset;
    PreprocessOutput pre;
    SplitSpec shift_split;
    ScenarioParams scenario;
    QNetwork dqn;
    std::vector<double> dqn_episode_rewards;
    Forest forest;
    std::vector<EvalResult> results;
};

PipelineRun run_full_pipeline(const RunConfig& cfg);

// File-based stages behind the CLI subcommands. Each stage reads only its
// declared inputs and writes only its declared outputs.
void run_generate(const RunConfig& cfg);
void run_preprocess(const RunConfig& cfg);
void run_train(const RunConfig& cfg, const std::string& policy); // "dqn" | "forest"
void run_evaluate(const RunConfig& cfg, const std::string& policy); // adds "rule"
void run_report(const RunConfig& cfg);
void run_sweep(const RunConfig& cfg, const std::string& out_csv = "sweep.csv");

} // namespace orch
