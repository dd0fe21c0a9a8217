#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "orch/baselines.hpp"
#include "orch/dqn.hpp"
#include "orch/sim.hpp"

namespace orch {

struct ConfusionCounts {
    int64_t tp = 0;
    int64_t fp = 0;
    int64_t fn = 0;
    int64_t tn = 0;

    int64_t total() const { return tp + fp + fn + tn; }
};

struct Metrics {
    double accuracy = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    bool undefined_precision = false; // tp + fp == 0
};

// Standard formulas; precision 0 (flagged undefined) when nothing was
// flagged, f1 0 when precision + recall is 0. Throws EmptyCounts.
Metrics metrics(const ConfusionCounts& c);

struct RocCurve {
    std::vector<std::pair<double, double>> points; // (fpr, tpr), threshold descending
    std::vector<double> thresholds;                // one per point past the origin
    double auc = 0.5;
};

// Threshold sweep over distinct scores descending, ties grouped;
// trapezoidal AUC. Throws SingleClassLabels.
RocCurve roc(const std::vector<double>& scores, const std::vector<uint8_t>& labels);

inline constexpr std::array<const char*, 5> kHeatmapCategories = {
    "priority", "location", "quantity", "timing", "equipment"};

// record-type rows x field-category columns of mis-handled disrupted
// tasks; the attribution rule picks the first matching evidence field.
struct Heatmap {
    std::array<std::array<int64_t, 5>, 3> counts{}; // [record_type][category]

    int64_t total() const;
};

// 100 * (baseline - policy) / baseline. Throws ZeroBaseline.
double time_reduction(double policy_mean_minutes, double baseline_mean_minutes);

// Per-decision interface evaluate_policy drives. flag_score is the
// continuous remediation affinity used for the ROC sweep.
class PolicyAgent {
public:
    virtual ~PolicyAgent() = default;
    virtual std::string name() const = 0;
    virtual ActionSpec decide(const Environment& env) = 0;
    virtual double flag_score(const Environment& env) = 0;
};

std::unique_ptr<PolicyAgent> make_rule_agent(const RulePolicyConfig& cfg = {});
std::unique_ptr<PolicyAgent> make_forest_agent(Forest forest, FeatureTransform transform,
                                               ExtraSchema schema, bool normalize_tokens);
std::unique_ptr<PolicyAgent> make_dqn_agent(QNetwork net);

struct TaskEval {
    uint64_t record_id = 0;
    bool disrupted = false;
    bool flagged = false;
    bool deadline_met = false;
    double score = 0.0;
    int64_t completion_minutes = 0; // completed_at - arrival
};

struct EvalResult {
    std::string policy;
    ConfusionCounts confusion;
    int64_t recovered_disrupted = 0;
    int64_t total_disrupted = 0;
    double accuracy_recovery = 0.0;     // recovered / total disrupted
    double accuracy_classification = 0.0; // (tp + tn) / n
    Metrics classification;
    RocCurve roc;
    double mean_completion_minutes = 0.0;
    Heatmap heatmap;
    std::vector<TaskEval> tasks;
    std::vector<EpisodeLog> episodes;
};

// Greedy rollout of the policy over the given episode slices; verifies the
// conservation invariants (outcome counts, confusion totals, heatmap
// totals) and throws if they fail.
EvalResult evaluate_policy(PolicyAgent& agent,
                           const std::vector<std::shared_ptr<const std::vector<TransactionRecord>>>& episodes,
                           const ScenarioParams& scenario);

// --- report artifacts ----------------------------------------------------

struct SweepPoint {
    int field_count = 0;
    std::string policy;
    double accuracy = 0.0; // recovery accuracy
};

// Runs the supplied pipeline runner per field count; output sorted by
// ascending field count, policies in the runner's order.
std::vector<SweepPoint> schema_sweep(
    std::vector<int> field_counts,
    const std::function<std::vector<SweepPoint>(int)>& run_at_field_count);

std::string metrics_csv(const std::vector<EvalResult>& results, double baseline_mean_minutes);
std::string roc_csv(const RocCurve& curve);
std::string heatmap_csv(const Heatmap& heatmap);
std::string sweep_csv(const std::vector<SweepPoint>& points);
std::string summary_text(const std::vector<EvalResult>& results, double baseline_mean_minutes);

std::string eval_result_json(const EvalResult& r);
EvalResult eval_result_from_json(const std::string& text);

} // namespace orch
