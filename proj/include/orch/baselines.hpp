#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "orch/preprocess.hpp"
#include "orch/sim.hpp"

namespace orch {

struct RulePolicyConfig {
    bool remediate_on_equipment_flag = true;
    int surge_threshold = 5; // arrivals per 10-minute window

    void validate() const;
};

// Static scheduling logic: reroute on an observable equipment flag,
// expedite on a burst at or above the threshold (once per task), assign
// the head task to the lowest-index idle worker, otherwise defer.
ActionSpec rule_policy(const Environment& env, const RulePolicyConfig& cfg = {});

// --- random forest -------------------------------------------------------

struct ForestConfig {
    int n_trees = 50;
    int max_depth = 8;
    int min_samples_split = 5;
    uint64_t seed = 0;
};

struct TreeNode {
    int feature = -1; // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    int64_t count_neg = 0;
    int64_t count_pos = 0;

    bool is_leaf() const { return feature < 0; }
};

struct DecisionTree {
    std::vector<TreeNode> nodes; // nodes[0] is the root

    // Leaf vote: true when positives strictly outnumber negatives.
    bool predict(const Eigen::VectorXd& x) const;
};

struct Forest {
    std::vector<DecisionTree> trees;
    ForestConfig config;
    int feature_count = 0;
};

// Gini impurity from integer class counts; the split oracle in the tests
// computes the same closed form, so chosen splits compare exactly.
double gini_impurity(int64_t neg, int64_t pos);

struct SplitCandidate {
    int feature = -1;
    double threshold = 0.0;
    double gain = 0.0;
};

// Best (feature, threshold) over the given candidate features by Gini
// gain; ties break to the lower feature index, then lower threshold.
// Thresholds are midpoints of consecutive distinct sorted values; rows go
// left when x[feature] < threshold. Returns nullopt when no split gains.
std::optional<SplitCandidate> best_split(const Eigen::MatrixXd& X,
                                         const std::vector<uint8_t>& y,
                                         const std::vector<size_t>& rows,
                                         const std::vector<int>& candidate_features);

// Bootstrap rows for one tree, reproducible per (seed, tree index).
std::vector<size_t> bootstrap_sample(uint64_t seed, int tree_index, size_t n);

// sqrt(F) features per node, Gini splits, stop at depth/pure/< min samples.
// Throws SingleClassInput.
Forest train_forest(const Eigen::MatrixXd& X, const std::vector<uint8_t>& y,
                    const ForestConfig& cfg);

// Majority vote; ties (even tree count) resolve negative. Score is the
// fraction of trees voting positive.
std::pair<bool, double> forest_predict(const Forest& f, const Eigen::VectorXd& x);

// Wraps the classifier into the action interface: a positive prediction
// remediates once (reroute on equipment evidence, expedite otherwise),
// then the rule assignment logic takes over.
ActionSpec forest_policy(const Forest& f, const Eigen::VectorXd& head_features,
                         const Environment& env);

void save_forest_checkpoint(const Forest& f, const FeatureTransform& transform,
                            const std::string& path);

struct ForestCheckpoint {
    Forest forest;
    FeatureTransform transform;
};

ForestCheckpoint load_forest_checkpoint(const std::string& path);

} // namespace orch
