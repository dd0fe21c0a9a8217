#include "orch/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

namespace orch {

using ordered_json = nlohmann::ordered_json;

void RulePolicyConfig::validate() const {
    if (surge_threshold < 1) throw OrchError(ErrorCode::InvalidConfig, "surge_threshold >= 1");
}

ActionSpec rule_policy(const Environment& env, const RulePolicyConfig& cfg) {
    const auto flags = env.equipment_flags();
    if (cfg.remediate_on_equipment_flag && !env.head_rerouted() &&
        (flags[0] || flags[1] || flags[2])) {
        return ActionSpec::reroute();
    }
    if (env.arrivals_last_10min() >= cfg.surge_threshold && !env.head_expedited()) {
        return ActionSpec::expedite();
    }
    if (const auto idle = env.lowest_idle_worker()) {
        return ActionSpec::assign(*idle);
    }
    return ActionSpec::defer();
}

double gini_impurity(int64_t neg, int64_t pos) {
    const int64_t n = neg + pos;
    if (n == 0) return 0.0;
    const double pn = static_cast<double>(neg) / static_cast<double>(n);
    const double pp = static_cast<double>(pos) / static_cast<double>(n);
    return 1.0 - pn * pn - pp * pp;
}

std::optional<SplitCandidate> best_split(const Eigen::MatrixXd& X,
                                         const std::vector<uint8_t>& y,
                                         const std::vector<size_t>& rows,
                                         const std::vector<int>& candidate_features) {
    const int64_t n = static_cast<int64_t>(rows.size());
    int64_t parent_pos = 0;
    for (size_t r : rows) parent_pos += y[r];
    const int64_t parent_neg = n - parent_pos;
    const double parent_impurity = gini_impurity(parent_neg, parent_pos);

    // Candidates evaluated in ascending feature order so ties are stable.
    std::vector<int> features = candidate_features;
    std::sort(features.begin(), features.end());
    features.erase(std::unique(features.begin(), features.end()), features.end());

    std::optional<SplitCandidate> best;
    std::vector<std::pair<double, uint8_t>> sorted;
    sorted.reserve(rows.size());
    for (int f : features) {
        sorted.clear();
        for (size_t r : rows) {
            sorted.emplace_back(X(static_cast<Eigen::Index>(r), f), y[r]);
        }
        std::sort(sorted.begin(), sorted.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });

        int64_t left_pos = 0, left_n = 0;
        for (int64_t i = 0; i + 1 < n; ++i) {
            left_pos += sorted[static_cast<size_t>(i)].second;
            ++left_n;
            const double v = sorted[static_cast<size_t>(i)].first;
            const double next = sorted[static_cast<size_t>(i + 1)].first;
            if (v == next) continue;
            const double threshold = (v + next) / 2.0;
            const int64_t left_neg = left_n - left_pos;
            const int64_t right_pos = parent_pos - left_pos;
            const int64_t right_neg = parent_neg - left_neg;
            const double weighted =
                (static_cast<double>(left_n) * gini_impurity(left_neg, left_pos) +
                 static_cast<double>(n - left_n) * gini_impurity(right_neg, right_pos)) /
                static_cast<double>(n);
            const double gain = parent_impurity - weighted;
            if (gain <= 0.0) continue;
            if (!best || gain > best->gain ||
                (gain == best->gain &&
                 (f < best->feature || (f == best->feature && threshold < best->threshold)))) {
                best = SplitCandidate{f, threshold, gain};
            }
        }
    }
    return best;
}

std::vector<size_t> bootstrap_sample(uint64_t seed, int tree_index, size_t n) {
    Rng rng(derive_seed(seed, stream_tag::forest));
    Rng tree_rng = rng.derive(static_cast<uint64_t>(tree_index) + 1);
    std::vector<size_t> rows(n);
    for (auto& r : rows) r = static_cast<size_t>(tree_rng.below(n));
    return rows;
}

namespace {

struct TreeBuilder {
    const Eigen::MatrixXd& X;
    const std::vector<uint8_t>& y;
    const ForestConfig& cfg;
    int feature_count;
    Rng feature_rng;
    DecisionTree tree;

    int build(std::vector<size_t> rows, int depth) {
        int64_t pos = 0;
        for (size_t r : rows) pos += y[r];
        const int64_t neg = static_cast<int64_t>(rows.size()) - pos;

        TreeNode node;
        node.count_neg = neg;
        node.count_pos = pos;
        const int index = static_cast<int>(tree.nodes.size());
        tree.nodes.push_back(node);

        const bool pure = (pos == 0 || neg == 0);
        if (depth >= cfg.max_depth || pure ||
            rows.size() < static_cast<size_t>(cfg.min_samples_split)) {
            return index;
        }

        // sqrt(F) features drawn without replacement per node.
        const int subset = std::max(1, static_cast<int>(std::lround(std::sqrt(
                               static_cast<double>(feature_count)))));
        std::vector<int> all(static_cast<size_t>(feature_count));
        for (int f = 0; f < feature_count; ++f) all[static_cast<size_t>(f)] = f;
        feature_rng.shuffle(all);
        all.resize(static_cast<size_t>(subset));

        const auto split = best_split(X, y, rows, all);
        if (!split) return index;

        std::vector<size_t> left_rows, right_rows;
        for (size_t r : rows) {
            if (X(static_cast<Eigen::Index>(r), split->feature) < split->threshold) {
                left_rows.push_back(r);
            } else {
                right_rows.push_back(r);
            }
        }
        if (left_rows.empty() || right_rows.empty()) return index;

        rows.clear();
        rows.shrink_to_fit();
        const int left = build(std::move(left_rows), depth + 1);
        const int right = build(std::move(right_rows), depth + 1);
        tree.nodes[static_cast<size_t>(index)].feature = split->feature;
        tree.nodes[static_cast<size_t>(index)].threshold = split->threshold;
        tree.nodes[static_cast<size_t>(index)].left = left;
        tree.nodes[static_cast<size_t>(index)].right = right;
        return index;
    }
};

} // namespace

bool DecisionTree::predict(const Eigen::VectorXd& x) const {
    int i = 0;
    while (!nodes[static_cast<size_t>(i)].is_leaf()) {
        const auto& node = nodes[static_cast<size_t>(i)];
        i = x[node.feature] < node.threshold ? node.left : node.right;
    }
    const auto& leaf = nodes[static_cast<size_t>(i)];
    return leaf.count_pos > leaf.count_neg;
}

Forest train_forest(const Eigen::MatrixXd& X, const std::vector<uint8_t>& y,
                    const ForestConfig& cfg) {
    if (static_cast<size_t>(X.rows()) != y.size() || y.empty()) {
        throw OrchError(ErrorCode::DimensionMismatch, "rows/labels mismatch");
    }
    const int64_t pos = std::count(y.begin(), y.end(), uint8_t{1});
    if (pos == 0 || pos == static_cast<int64_t>(y.size())) {
        throw OrchError(ErrorCode::SingleClassInput, "training labels are single-class");
    }

    Forest forest;
    forest.config = cfg;
    forest.feature_count = static_cast<int>(X.cols());
    forest.trees.reserve(static_cast<size_t>(cfg.n_trees));
    Rng root(derive_seed(cfg.seed, stream_tag::forest));
    for (int t = 0; t < cfg.n_trees; ++t) {
        TreeBuilder builder{X, y, cfg, forest.feature_count,
                            root.derive(1000 + static_cast<uint64_t>(t)), {}};
        builder.build(bootstrap_sample(cfg.seed, t, y.size()), 0);
        forest.trees.push_back(std::move(builder.tree));
    }
    return forest;
}

std::pair<bool, double> forest_predict(const Forest& f, const Eigen::VectorXd& x) {
    if (x.size() != f.feature_count) {
        throw OrchError(ErrorCode::DimensionMismatch,
                        "feature vector " + std::to_string(x.size()) + " vs forest " +
                            std::to_string(f.feature_count));
    }
    int64_t votes = 0;
    for (const auto& tree : f.trees) votes += tree.predict(x) ? 1 : 0;
    const double score = static_cast<double>(votes) / static_cast<double>(f.trees.size());
    return {votes * 2 > static_cast<int64_t>(f.trees.size()), score};
}

ActionSpec forest_policy(const Forest& f, const Eigen::VectorXd& head_features,
                         const Environment& env) {
    const auto [disrupted, score] = forest_predict(f, head_features);
    (void)score;
    if (disrupted && !env.head_flagged()) {
        const auto flags = env.equipment_flags();
        if (flags[0] || flags[1] || flags[2]) return ActionSpec::reroute();
        return ActionSpec::expedite();
    }
    if (const auto idle = env.lowest_idle_worker()) {
        return ActionSpec::assign(*idle);
    }
    return ActionSpec::defer();
}

void save_forest_checkpoint(const Forest& f, const FeatureTransform& transform,
                            const std::string& path) {
    ordered_json j;
    j["schema_version"] = 1;
    j["kind"] = "forest";
    ordered_json cfg;
    cfg["n_trees"] = f.config.n_trees;
    cfg["max_depth"] = f.config.max_depth;
    cfg["min_samples_split"] = f.config.min_samples_split;
    cfg["seed"] = f.config.seed;
    j["config"] = std::move(cfg);
    j["feature_count"] = f.feature_count;
    ordered_json trees = ordered_json::array();
    for (const auto& tree : f.trees) {
        ordered_json nodes = ordered_json::array();
        for (const auto& n : tree.nodes) {
            nodes.push_back({n.feature, n.threshold, n.left, n.right, n.count_neg, n.count_pos});
        }
        trees.push_back(std::move(nodes));
    }
    j["trees"] = std::move(trees);
    ordered_json cols = ordered_json::array();
    for (const auto& col : transform.cols) {
        ordered_json c;
        c["name"] = col.name;
        c["type"] = col.numeric ? "numeric" : "categorical";
        if (col.numeric) {
            c["cap_value"] = col.cap_value;
        } else {
            c["impute_value"] = col.impute_value;
            c["levels"] = col.levels;
        }
        cols.push_back(std::move(c));
    }
    j["transform"] = std::move(cols);

    std::ofstream out(path, std::ios::binary);
    if (!out) throw OrchError(ErrorCode::IoError, "cannot open " + path);
    out << j.dump(2) << '\n';
    if (!out) throw OrchError(ErrorCode::IoError, "write failed: " + path);
}

ForestCheckpoint load_forest_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw OrchError(ErrorCode::MissingInput, "checkpoint not found: " + path);
    const auto j = ordered_json::parse(in);
    const int version = j.at("schema_version").get<int>();
    if (version != 1) {
        throw OrchError(ErrorCode::SchemaVersionMismatch,
                        "checkpoint schema_version " + std::to_string(version));
    }
    if (j.at("kind").get<std::string>() != "forest") {
        throw OrchError(ErrorCode::SchemaVersionMismatch, "not a forest checkpoint");
    }
    ForestCheckpoint ck;
    const auto& cfg = j.at("config");
    ck.forest.config.n_trees = cfg.at("n_trees").get<int>();
    ck.forest.config.max_depth = cfg.at("max_depth").get<int>();
    ck.forest.config.min_samples_split = cfg.at("min_samples_split").get<int>();
    ck.forest.config.seed = cfg.at("seed").get<uint64_t>();
    ck.forest.feature_count = j.at("feature_count").get<int>();
    for (const auto& tree : j.at("trees")) {
        DecisionTree t;
        for (const auto& n : tree) {
            TreeNode node;
            node.feature = n[0].get<int>();
            node.threshold = n[1].get<double>();
            node.left = n[2].get<int>();
            node.right = n[3].get<int>();
            node.count_neg = n[4].get<int64_t>();
            node.count_pos = n[5].get<int64_t>();
            t.nodes.push_back(node);
        }
        ck.forest.trees.push_back(std::move(t));
    }
    for (const auto& c : j.at("transform")) {
        FeatureTransform::Col col;
        col.name = c.at("name").get<std::string>();
        col.numeric = c.at("type").get<std::string>() == "numeric";
        if (col.numeric) {
            col.cap_value = c.at("cap_value").get<double>();
        } else {
            col.impute_value = c.at("impute_value").get<std::string>();
            col.levels = c.at("levels").get<std::vector<std::string>>();
        }
        ck.transform.cols.push_back(std::move(col));
    }
    return ck;
}

} // namespace orch
