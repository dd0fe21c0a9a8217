#include "orch/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

#include <nlohmann/json.hpp>

#include "orch/lexicon.hpp"

namespace orch {

using ordered_json = nlohmann::ordered_json;

Metrics metrics(const ConfusionCounts& c) {
    if (c.total() == 0) throw OrchError(ErrorCode::EmptyCounts, "no evaluated tasks");
    Metrics m;
    m.accuracy = static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total());
    if (c.tp + c.fp == 0) {
        m.precision = 0.0;
        m.undefined_precision = true;
    } else {
        m.precision = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
    }
    m.recall = (c.tp + c.fn == 0) ? 0.0
                                  : static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
    m.f1 = (m.precision + m.recall == 0.0)
               ? 0.0
               : 2.0 * m.precision * m.recall / (m.precision + m.recall);
    return m;
}

RocCurve roc(const std::vector<double>& scores, const std::vector<uint8_t>& labels) {
    if (scores.size() != labels.size() || scores.empty()) {
        throw OrchError(ErrorCode::DimensionMismatch, "scores/labels mismatch");
    }
    int64_t pos = 0;
    for (uint8_t l : labels) pos += l;
    const int64_t neg = static_cast<int64_t>(labels.size()) - pos;
    if (pos == 0 || neg == 0) {
        throw OrchError(ErrorCode::SingleClassLabels, "roc needs both classes");
    }

    std::vector<size_t> order(scores.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) { return scores[a] > scores[b]; });

    RocCurve curve;
    curve.points.emplace_back(0.0, 0.0);
    int64_t tp = 0, fp = 0;
    double auc = 0.0;
    size_t i = 0;
    while (i < order.size()) {
        const double threshold = scores[order[i]];
        // Tied scores fall into one threshold step.
        while (i < order.size() && scores[order[i]] == threshold) {
            if (labels[order[i]]) ++tp; else ++fp;
            ++i;
        }
        const double tpr = static_cast<double>(tp) / static_cast<double>(pos);
        const double fpr = static_cast<double>(fp) / static_cast<double>(neg);
        const auto& prev = curve.points.back();
        auc += (fpr - prev.first) * (tpr + prev.second) / 2.0;
        curve.points.emplace_back(fpr, tpr);
        curve.thresholds.push_back(threshold);
    }
    curve.auc = auc;
    return curve;
}

int64_t Heatmap::total() const {
    int64_t t = 0;
    for (const auto& row : counts) {
        for (int64_t c : row) t += c;
    }
    return t;
}

double time_reduction(double policy_mean_minutes, double baseline_mean_minutes) {
    if (baseline_mean_minutes <= 0.0) {
        throw OrchError(ErrorCode::ZeroBaseline, "baseline mean must be positive");
    }
    return 100.0 * (baseline_mean_minutes - policy_mean_minutes) / baseline_mean_minutes;
}

namespace {

class RuleAgent final : public PolicyAgent {
public:
    explicit RuleAgent(RulePolicyConfig cfg) : cfg_(cfg) { cfg_.validate(); }

    std::string name() const override { return "rule"; }

    ActionSpec decide(const Environment& env) override { return rule_policy(env, cfg_); }

    double flag_score(const Environment& env) override {
        // Binary flag decision: the rule policy has no continuous score,
        // which collapses its ROC to two effective points.
        return rule_policy(env, cfg_).is_remediation() ? 1.0 : 0.0;
    }

private:
    RulePolicyConfig cfg_;
};

class ForestAgent final : public PolicyAgent {
public:
    ForestAgent(Forest forest, FeatureTransform transform, ExtraSchema schema, bool normalize)
        : forest_(std::move(forest)), transform_(std::move(transform)),
          schema_(std::move(schema)), normalize_(normalize) {}

    std::string name() const override { return "forest"; }

    ActionSpec decide(const Environment& env) override {
        return forest_policy(forest_, encode_head(env), env);
    }

    double flag_score(const Environment& env) override {
        return forest_predict(forest_, encode_head(env)).second;
    }

private:
    Eigen::VectorXd encode_head(const Environment& env) const {
        const RecordView view = env.head_view();
        return encode_feature_row(transform_, view, env.head_inter_arrival(),
                                  env.arrivals_last_10min(), schema_, normalize_);
    }

    Forest forest_;
    FeatureTransform transform_;
    ExtraSchema schema_;
    bool normalize_;
};

class DqnAgent final : public PolicyAgent {
public:
    explicit DqnAgent(QNetwork net) : net_(std::move(net)) {}

    std::string name() const override { return "dqn"; }

    ActionSpec decide(const Environment& env) override {
        const int a = greedy_action(net_, env.observe(net_.embedding));
        return action_from_index(a, env.n_workers());
    }

    double flag_score(const Environment& env) override {
        return q_margin(net_, env.observe(net_.embedding), env.n_workers());
    }

private:
    QNetwork net_;
};

int heatmap_category(const TransactionRecord& r, bool normalize) {
    const bool priority_evidence =
        !r.priority.has_value() || *r.priority == Priority::High || *r.priority == Priority::Urgent;
    if (priority_evidence) return 0; // priority
    const std::string status =
        normalize ? Lexicon::shipped().normalize(r.status_label) : r.status_label;
    if (r.equipment_down || status == "down") return 4; // equipment
    if (r.arrival_burst_count >= 5) return 3;           // timing
    if (r.quantity >= 800) return 2;                    // quantity
    return 1;                                           // location
}

} // namespace

std::unique_ptr<PolicyAgent> make_rule_agent(const RulePolicyConfig& cfg) {
    return std::make_unique<RuleAgent>(cfg);
}

std::unique_ptr<PolicyAgent> make_forest_agent(Forest forest, FeatureTransform transform,
                                               ExtraSchema schema, bool normalize_tokens) {
    return std::make_unique<ForestAgent>(std::move(forest), std::move(transform),
                                         std::move(schema), normalize_tokens);
}

std::unique_ptr<PolicyAgent> make_dqn_agent(QNetwork net) {
    return std::make_unique<DqnAgent>(std::move(net));
}

EvalResult evaluate_policy(
    PolicyAgent& agent,
    const std::vector<std::shared_ptr<const std::vector<TransactionRecord>>>& episodes,
    const ScenarioParams& scenario) {
    if (episodes.empty()) throw OrchError(ErrorCode::EmptySlice, "no evaluation episodes");

    EvalResult result;
    result.policy = agent.name();

    struct TaskState {
        const TransactionRecord* record = nullptr;
        int64_t arrival = 0;
        bool flagged = false;
        double score = -1e300;
        bool seen_outcome = false;
        bool deadline_met = false;
        int64_t completed_at = 0;
    };

    size_t presented = 0;
    for (const auto& slice : episodes) {
        Environment env(slice, scenario);
        presented += slice->size();

        std::map<uint64_t, TaskState> tasks;
        const int64_t epoch = env.clock(); // 0 by construction
        (void)epoch;
        int64_t slice_min_ts = (*slice)[0].timestamp;
        for (const auto& r : *slice) slice_min_ts = std::min(slice_min_ts, r.timestamp);
        for (const auto& r : *slice) {
            TaskState t;
            t.record = &r;
            t.arrival = r.timestamp - slice_min_ts;
            tasks[r.record_id] = t;
        }

        while (!env.done()) {
            const uint64_t head_id = env.head_view().record_id;
            auto& task = tasks[head_id];
            task.score = std::max(task.score, agent.flag_score(env));
            const ActionSpec action = agent.decide(env);
            if (action.is_remediation()) task.flagged = true;
            env.step(action);
        }

        const EpisodeLog& log = env.log();
        if (log.outcomes.size() != slice->size()) {
            throw OrchError(ErrorCode::InvalidConfig,
                            "conservation violated: outcomes " +
                                std::to_string(log.outcomes.size()) + " vs presented " +
                                std::to_string(slice->size()));
        }
        for (const auto& o : log.outcomes) {
            auto& task = tasks[o.record_id];
            task.seen_outcome = true;
            task.deadline_met = o.deadline_met;
            task.completed_at = o.completed_at;
            if (o.remediated) task.flagged = true;
        }
        result.episodes.push_back(log);

        for (const auto& [id, t] : tasks) {
            TaskEval te;
            te.record_id = id;
            te.disrupted = t.record->truth_disrupted;
            te.flagged = t.flagged;
            te.deadline_met = t.deadline_met;
            te.score = t.score;
            te.completion_minutes = t.completed_at - t.arrival;
            result.tasks.push_back(te);

            if (t.flagged && te.disrupted) ++result.confusion.tp;
            if (t.flagged && !te.disrupted) ++result.confusion.fp;
            if (!t.flagged && te.disrupted) ++result.confusion.fn;
            if (!t.flagged && !te.disrupted) ++result.confusion.tn;
            if (te.disrupted) {
                ++result.total_disrupted;
                if (t.flagged && t.deadline_met) {
                    ++result.recovered_disrupted;
                } else {
                    const int cat = heatmap_category(*t.record, scenario.normalize_tokens);
                    ++result.heatmap.counts[static_cast<size_t>(t.record->record_type)]
                                           [static_cast<size_t>(cat)];
                }
            }
        }
    }

    if (result.confusion.total() != static_cast<int64_t>(presented)) {
        throw OrchError(ErrorCode::InvalidConfig, "conservation violated: confusion total");
    }
    if (result.heatmap.total() != result.total_disrupted - result.recovered_disrupted) {
        throw OrchError(ErrorCode::InvalidConfig, "conservation violated: heatmap total");
    }

    result.classification = metrics(result.confusion);
    result.accuracy_classification = result.classification.accuracy;
    result.accuracy_recovery =
        result.total_disrupted == 0
            ? 0.0
            : static_cast<double>(result.recovered_disrupted) /
                  static_cast<double>(result.total_disrupted);

    double total_minutes = 0.0;
    for (const auto& t : result.tasks) total_minutes += static_cast<double>(t.completion_minutes);
    result.mean_completion_minutes =
        result.tasks.empty() ? 0.0 : total_minutes / static_cast<double>(result.tasks.size());

    std::vector<double> scores;
    std::vector<uint8_t> labels;
    scores.reserve(result.tasks.size());
    for (const auto& t : result.tasks) {
        scores.push_back(t.score);
        labels.push_back(t.disrupted ? 1 : 0);
    }
    result.roc = roc(scores, labels);
    return result;
}

std::vector<SweepPoint> schema_sweep(
    std::vector<int> field_counts,
    const std::function<std::vector<SweepPoint>(int)>& run_at_field_count) {
    std::sort(field_counts.begin(), field_counts.end());
    field_counts.erase(std::unique(field_counts.begin(), field_counts.end()), field_counts.end());
    std::vector<SweepPoint> out;
    for (int fc : field_counts) {
        for (auto& p : run_at_field_count(fc)) {
            p.field_count = fc;
            out.push_back(std::move(p));
        }
    }
    return out;
}

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

} // namespace

std::string metrics_csv(const std::vector<EvalResult>& results, double baseline_mean_minutes) {
    std::string out =
        "policy,accuracy_cls,accuracy_recovery,precision,recall,f1,auc,mean_completion,"
        "time_reduction_pct\n";
    for (const auto& r : results) {
        out += r.policy;
        out += ',';
        out += fmt(r.accuracy_classification);
        out += ',';
        out += fmt(r.accuracy_recovery);
        out += ',';
        out += fmt(r.classification.precision);
        out += ',';
        out += fmt(r.classification.recall);
        out += ',';
        out += fmt(r.classification.f1);
        out += ',';
        out += fmt(r.roc.auc);
        out += ',';
        out += fmt(r.mean_completion_minutes);
        out += ',';
        out += fmt(time_reduction(r.mean_completion_minutes, baseline_mean_minutes));
        out += '\n';
    }
    return out;
}

std::string roc_csv(const RocCurve& curve) {
    std::string out = "threshold,fpr,tpr\n";
    for (size_t i = 1; i < curve.points.size(); ++i) {
        out += fmt(curve.thresholds[i - 1]);
        out += ',';
        out += fmt(curve.points[i].first);
        out += ',';
        out += fmt(curve.points[i].second);
        out += '\n';
    }
    return out;
}

std::string heatmap_csv(const Heatmap& heatmap) {
    std::string out = "record_type,field_category,count\n";
    static constexpr const char* kRows[3] = {"task", "inventory", "order"};
    for (size_t r = 0; r < 3; ++r) {
        for (size_t c = 0; c < kHeatmapCategories.size(); ++c) {
            out += kRows[r];
            out += ',';
            out += kHeatmapCategories[c];
            out += ',';
            out += std::to_string(heatmap.counts[r][c]);
            out += '\n';
        }
    }
    return out;
}

std::string sweep_csv(const std::vector<SweepPoint>& points) {
    std::string out = "field_count,policy,accuracy\n";
    for (const auto& p : points) {
        out += std::to_string(p.field_count);
        out += ',';
        out += p.policy;
        out += ',';
        out += fmt(p.accuracy);
        out += '\n';
    }
    return out;
}

std::string summary_text(const std::vector<EvalResult>& results, double baseline_mean_minutes) {
    std::string out;
    out += "Model comparison (disruption flagging over the test shifts)\n";
    out += "\n";
    char line[256];
    std::snprintf(line, sizeof line, "%-12s %9s %9s %9s %9s %9s %7s %12s\n", "policy",
                  "acc(cls)", "acc(rec)", "precision", "recall", "f1", "auc", "reduction%%");
    out += line;
    for (const auto& r : results) {
        std::snprintf(line, sizeof line, "%-12s %9.4f %9.4f %9.4f %9.4f %9.4f %7.4f %12.2f\n",
                      r.policy.c_str(), r.accuracy_classification, r.accuracy_recovery,
                      r.classification.precision, r.classification.recall, r.classification.f1,
                      r.roc.auc, time_reduction(r.mean_completion_minutes, baseline_mean_minutes));
        out += line;
    }
    out += "\n";
    out += "acc(cls) counts flagged-vs-disrupted agreement over all tasks;\n";
    out += "acc(rec) counts disrupted tasks that were flagged and still met their deadline.\n";
    out += "reduction% compares mean simulated completion minutes against the rule baseline.\n";
    return out;
}

std::string eval_result_json(const EvalResult& r) {
    ordered_json j;
    j["schema_version"] = 1;
    j["policy"] = r.policy;
    j["confusion"] = {{"tp", r.confusion.tp}, {"fp", r.confusion.fp},
                      {"fn", r.confusion.fn}, {"tn", r.confusion.tn}};
    j["recovered_disrupted"] = r.recovered_disrupted;
    j["total_disrupted"] = r.total_disrupted;
    j["accuracy_recovery"] = r.accuracy_recovery;
    j["accuracy_classification"] = r.accuracy_classification;
    j["precision"] = r.classification.precision;
    j["recall"] = r.classification.recall;
    j["f1"] = r.classification.f1;
    j["undefined_precision"] = r.classification.undefined_precision;
    j["auc"] = r.roc.auc;
    j["mean_completion_minutes"] = r.mean_completion_minutes;
    ordered_json pts = ordered_json::array();
    for (size_t i = 0; i < r.roc.points.size(); ++i) {
        ordered_json p;
        p["fpr"] = r.roc.points[i].first;
        p["tpr"] = r.roc.points[i].second;
        if (i > 0) p["threshold"] = r.roc.thresholds[i - 1];
        pts.push_back(std::move(p));
    }
    j["roc_points"] = std::move(pts);
    ordered_json hm = ordered_json::array();
    static constexpr const char* kRows[3] = {"task", "inventory", "order"};
    for (size_t row = 0; row < 3; ++row) {
        for (size_t c = 0; c < kHeatmapCategories.size(); ++c) {
            ordered_json cell;
            cell["record_type"] = kRows[row];
            cell["field_category"] = kHeatmapCategories[c];
            cell["count"] = r.heatmap.counts[row][c];
            hm.push_back(std::move(cell));
        }
    }
    j["heatmap"] = std::move(hm);
    return j.dump(2) + "\n";
}

EvalResult eval_result_from_json(const std::string& text) {
    const auto j = ordered_json::parse(text);
    const int version = j.at("schema_version").get<int>();
    if (version != 1) {
        throw OrchError(ErrorCode::SchemaVersionMismatch,
                        "eval schema_version " + std::to_string(version));
    }
    EvalResult r;
    r.policy = j.at("policy").get<std::string>();
    r.confusion.tp = j.at("confusion").at("tp").get<int64_t>();
    r.confusion.fp = j.at("confusion").at("fp").get<int64_t>();
    r.confusion.fn = j.at("confusion").at("fn").get<int64_t>();
    r.confusion.tn = j.at("confusion").at("tn").get<int64_t>();
    r.recovered_disrupted = j.at("recovered_disrupted").get<int64_t>();
    r.total_disrupted = j.at("total_disrupted").get<int64_t>();
    r.accuracy_recovery = j.at("accuracy_recovery").get<double>();
    r.accuracy_classification = j.at("accuracy_classification").get<double>();
    r.classification.accuracy = r.accuracy_classification;
    r.classification.precision = j.at("precision").get<double>();
    r.classification.recall = j.at("recall").get<double>();
    r.classification.f1 = j.at("f1").get<double>();
    r.classification.undefined_precision = j.at("undefined_precision").get<bool>();
    r.roc.auc = j.at("auc").get<double>();
    r.mean_completion_minutes = j.at("mean_completion_minutes").get<double>();
    for (const auto& p : j.at("roc_points")) {
        r.roc.points.emplace_back(p.at("fpr").get<double>(), p.at("tpr").get<double>());
        if (p.contains("threshold")) r.roc.thresholds.push_back(p.at("threshold").get<double>());
    }
    std::map<std::string, size_t> row_index{{"task", 0}, {"inventory", 1}, {"order", 2}};
    std::map<std::string, size_t> cat_index;
    for (size_t c = 0; c < kHeatmapCategories.size(); ++c) cat_index[kHeatmapCategories[c]] = c;
    for (const auto& cell : j.at("heatmap")) {
        r.heatmap.counts[row_index[cell.at("record_type").get<std::string>()]]
                        [cat_index[cell.at("field_category").get<std::string>()]] =
            cell.at("count").get<int64_t>();
    }
    return r;
}

} // namespace orch
