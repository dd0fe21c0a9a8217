#include "orch/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

namespace orch {

using ordered_json = nlohmann::ordered_json;

std::vector<std::string> FeatureMatrix::column_names() const {
    std::vector<std::string> names;
    names.reserve(columns.size());
    for (const auto& c : columns) names.push_back(c.name);
    return names;
}

const FeatureColumn* FeatureMatrix::find(const std::string& name) const {
    for (const auto& c : columns) {
        if (c.name == name) return &c;
    }
    return nullptr;
}

StateVector encode_state(const RecordView& r, const EncodeContext& ctx, const EmbeddingTable& emb) {
    if (!r.priority.has_value()) {
        throw OrchError(ErrorCode::MissingPriority, "encode_state requires an imputed priority");
    }
    StateVector sv;
    sv.values = Eigen::VectorXd::Zero(StateVector::kDim +
                                      static_cast<Eigen::Index>(ctx.worker_idle.size()));
    sv.task_bucket = static_cast<int>(r.task_id->as_integer() % kEmbeddingBuckets);
    sv.values.segment<StateVector::kEmbeddingWidth>(StateVector::kEmbeddingOffset) =
        emb.row(sv.task_bucket).transpose();
    sv.values[StateVector::kPriorityOffset + static_cast<int>(*r.priority)] = 1.0;
    sv.values[StateVector::kRecordTypeOffset + static_cast<int>(r.record_type)] = 1.0;
    for (int e = 0; e < 3; ++e) {
        if (ctx.equipment_flags[e]) sv.values[StateVector::kEquipmentOffset + e] = 1.0;
    }
    sv.values[StateVector::kQueueOffset] =
        std::min(1.0, static_cast<double>(ctx.queue_length) / kQueueLengthNorm);
    sv.values[StateVector::kQueueOffset + 1] =
        std::min(1.0, static_cast<double>(ctx.arrivals_last_10min) / kArrivalsNorm);
    const double to_deadline = static_cast<double>(r.deadline - ctx.clock);
    sv.values[StateVector::kDeadlineOffset] =
        std::clamp(to_deadline / kDeadlineNormMinutes, 0.0, 1.0);
    const double p99 = ctx.p99_planned_minutes > 0.0 ? ctx.p99_planned_minutes : 1.0;
    sv.values[StateVector::kPlannedOffset] = std::min(1.0, r.planned_minutes / p99);
    for (size_t w = 0; w < ctx.worker_idle.size(); ++w) {
        sv.values[StateVector::kDim + static_cast<Eigen::Index>(w)] =
            ctx.worker_idle[w] ? 1.0 : 0.0;
    }
    return sv;
}

std::vector<std::string> impute_mode(std::vector<std::string> column) {
    std::map<std::string, size_t> counts;
    for (const auto& v : column) {
        if (!v.empty()) ++counts[v];
    }
    if (counts.empty()) {
        throw OrchError(ErrorCode::AllValuesMissing, "no present value to impute from");
    }
    // std::map iterates keys in lexicographic order, so the first maximal
    // count is the lexicographically smallest mode.
    std::string mode;
    size_t best = 0;
    for (const auto& [value, count] : counts) {
        if (count > best) {
            best = count;
            mode = value;
        }
    }
    for (auto& v : column) {
        if (v.empty()) v = mode;
    }
    return column;
}

double quantile_nearest_rank(const std::vector<double>& column, double pct) {
    if (column.empty()) throw OrchError(ErrorCode::EmptyColumn, "quantile of empty column");
    if (!(pct > 0.0 && pct < 1.0)) {
        throw OrchError(ErrorCode::InvalidConfig, "quantile pct must be in (0,1)");
    }
    std::vector<double> sorted = column;
    std::sort(sorted.begin(), sorted.end());
    const auto n = static_cast<double>(sorted.size());
    auto rank = static_cast<size_t>(std::ceil(pct * n)); // 1-based
    rank = std::clamp<size_t>(rank, 1, sorted.size());
    return sorted[rank - 1];
}

std::vector<double> cap_outliers(std::vector<double> column, double pct) {
    const double cap = quantile_nearest_rank(column, pct);
    for (auto& v : column) {
        if (v > cap) v = cap;
    }
    return column;
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size() || a.empty()) {
        throw OrchError(ErrorCode::DimensionMismatch, "pearson needs equal nonempty columns");
    }
    const auto n = static_cast<Eigen::Index>(a.size());
    Eigen::Map<const Eigen::VectorXd> va(a.data(), n);
    Eigen::Map<const Eigen::VectorXd> vb(b.data(), n);
    const Eigen::VectorXd ca = va.array() - va.mean();
    const Eigen::VectorXd cb = vb.array() - vb.mean();
    const double denom = std::sqrt(ca.squaredNorm() * cb.squaredNorm());
    if (denom == 0.0) return 0.0; // undefined (constant column) treated as 0
    return ca.dot(cb) / denom;
}

std::pair<FeatureMatrix, std::vector<std::string>> prune_correlated(FeatureMatrix m,
                                                                    double r_threshold) {
    std::vector<std::string> removed;
    std::vector<size_t> numeric_survivors;
    std::vector<bool> keep(m.columns.size(), true);
    for (size_t j = 0; j < m.columns.size(); ++j) {
        if (!m.columns[j].is_numeric) continue;
        bool dead = false;
        for (size_t i : numeric_survivors) {
            if (std::abs(pearson(m.columns[i].numeric, m.columns[j].numeric)) > r_threshold) {
                dead = true;
                break;
            }
        }
        if (dead) {
            keep[j] = false;
            removed.push_back(m.columns[j].name);
        } else {
            numeric_survivors.push_back(j);
        }
    }
    FeatureMatrix out;
    out.row_count = m.row_count;
    for (size_t j = 0; j < m.columns.size(); ++j) {
        if (keep[j]) out.columns.push_back(std::move(m.columns[j]));
    }
    return {std::move(out), std::move(removed)};
}

double efficiency_score(const TransactionRecord& r, double actual_minutes) {
    if (!(actual_minutes > 0.0)) {
        throw OrchError(ErrorCode::NonPositiveActual, "actual_minutes must be positive");
    }
    return std::clamp(r.planned_minutes / actual_minutes, 0.0, 2.0);
}

TemporalFeatures temporal_features(const std::vector<int64_t>& sorted_timestamps) {
    TemporalFeatures out;
    const size_t n = sorted_timestamps.size();
    out.inter_arrival_minutes.resize(n);
    out.rolling_arrival_count_10min.resize(n);
    size_t window_start = 0;
    for (size_t i = 0; i < n; ++i) {
        if (i > 0 && sorted_timestamps[i] < sorted_timestamps[i - 1]) {
            throw OrchError(ErrorCode::UnsortedInput, "timestamps must be non-decreasing");
        }
        out.inter_arrival_minutes[i] =
            i == 0 ? 0.0 : static_cast<double>(sorted_timestamps[i] - sorted_timestamps[i - 1]);
        while (sorted_timestamps[window_start] < sorted_timestamps[i] - 10) ++window_start;
        out.rolling_arrival_count_10min[i] = static_cast<int64_t>(i - window_start + 1);
    }
    return out;
}

TemporalFeatures temporal_features(const std::vector<TransactionRecord>& sorted_records) {
    std::vector<int64_t> ts;
    ts.reserve(sorted_records.size());
    for (const auto& r : sorted_records) ts.push_back(r.timestamp);
    return temporal_features(ts);
}

SplitSpec split(const std::vector<uint8_t>& labels, double train_frac, int k, uint64_t seed) {
    const auto n = static_cast<int64_t>(labels.size());
    if (k < 1 || n < k) throw OrchError(ErrorCode::TooFewRows, "need at least k rows");
    if (!(train_frac > 0.0 && train_frac < 1.0)) {
        throw OrchError(ErrorCode::InvalidConfig, "train_frac must be in (0,1)");
    }

    Rng root(derive_seed(seed, stream_tag::split));
    std::vector<size_t> pos, neg;
    for (size_t i = 0; i < labels.size(); ++i) {
        (labels[i] ? pos : neg).push_back(i);
    }
    Rng pos_rng = root.derive(1);
    Rng neg_rng = root.derive(2);
    pos_rng.shuffle(pos);
    neg_rng.shuffle(neg);

    const int64_t n_train = std::llround(train_frac * static_cast<double>(n));
    const int64_t n_test = n - n_train;
    int64_t test_pos = std::llround((1.0 - train_frac) * static_cast<double>(pos.size()));
    test_pos = std::clamp<int64_t>(test_pos, std::max<int64_t>(0, n_test - static_cast<int64_t>(neg.size())),
                                   std::min<int64_t>(static_cast<int64_t>(pos.size()), n_test));
    const int64_t test_neg = n_test - test_pos;

    SplitSpec spec;
    spec.seed = seed;
    spec.test_indices.insert(spec.test_indices.end(), pos.begin(), pos.begin() + test_pos);
    spec.test_indices.insert(spec.test_indices.end(), neg.begin(), neg.begin() + test_neg);
    std::vector<size_t> train_pos(pos.begin() + test_pos, pos.end());
    std::vector<size_t> train_neg(neg.begin() + test_neg, neg.end());
    spec.train_indices = train_pos;
    spec.train_indices.insert(spec.train_indices.end(), train_neg.begin(), train_neg.end());

    // Deal each class round-robin so fold rates stay within one record.
    spec.folds.assign(static_cast<size_t>(k), {});
    size_t fold = 0;
    for (size_t idx : train_pos) {
        spec.folds[fold].push_back(idx);
        fold = (fold + 1) % static_cast<size_t>(k);
    }
    for (size_t idx : train_neg) {
        spec.folds[fold].push_back(idx);
        fold = (fold + 1) % static_cast<size_t>(k);
    }

    std::sort(spec.train_indices.begin(), spec.train_indices.end());
    std::sort(spec.test_indices.begin(), spec.test_indices.end());
    for (auto& f : spec.folds) std::sort(f.begin(), f.end());
    return spec;
}

SplitSpec split(const Dataset& ds, double train_frac, int k, uint64_t seed) {
    return split(disruption_labels(ds), train_frac, k, seed);
}

std::vector<uint8_t> disruption_labels(const Dataset& ds) {
    std::vector<uint8_t> labels;
    labels.reserve(ds.records.size());
    for (const auto& r : ds.records) labels.push_back(r.truth_disrupted ? 1 : 0);
    return labels;
}

namespace {

FeatureColumn numeric_column(std::string name, std::vector<double> values) {
    FeatureColumn c;
    c.name = std::move(name);
    c.is_numeric = true;
    c.numeric = std::move(values);
    return c;
}

FeatureColumn categorical_column(std::string name, std::vector<std::string> values) {
    FeatureColumn c;
    c.name = std::move(name);
    c.is_numeric = false;
    c.categorical = std::move(values);
    return c;
}

} // namespace

FeatureMatrix build_features(const Dataset& ds, bool normalize_tokens) {
    const auto& records = ds.records;
    const size_t n = records.size();
    const auto& lexicon = Lexicon::shipped();
    const TemporalFeatures temporal = temporal_features(records);

    std::vector<double> ts(n), quantity(n), planned(n), slack(n), burst(n), equip_flag(n);
    std::vector<std::string> rtype(n), priority(n), equipment(n), language(n), status(n);
    for (size_t i = 0; i < n; ++i) {
        const auto& r = records[i];
        ts[i] = static_cast<double>(r.timestamp);
        quantity[i] = static_cast<double>(r.quantity);
        planned[i] = r.planned_minutes;
        slack[i] = static_cast<double>(r.deadline - r.timestamp);
        burst[i] = static_cast<double>(r.arrival_burst_count);
        equip_flag[i] = r.equipment_down ? 1.0 : 0.0;
        rtype[i] = to_token(r.record_type);
        priority[i] = r.priority.has_value() ? to_token(*r.priority) : "";
        equipment[i] = to_token(r.required_equipment);
        language[i] = to_token(r.language);
        status[i] = normalize_tokens ? lexicon.normalize(r.status_label) : r.status_label;
    }

    FeatureMatrix m;
    m.row_count = n;
    m.columns.push_back(numeric_column("timestamp", std::move(ts)));
    m.columns.push_back(numeric_column("quantity", std::move(quantity)));
    m.columns.push_back(numeric_column("planned_minutes", std::move(planned)));
    m.columns.push_back(numeric_column("deadline_slack", std::move(slack)));
    m.columns.push_back(numeric_column("arrival_burst_count", std::move(burst)));
    m.columns.push_back(numeric_column("inter_arrival", temporal.inter_arrival_minutes));
    {
        std::vector<double> rolling(n);
        for (size_t i = 0; i < n; ++i) {
            rolling[i] = static_cast<double>(temporal.rolling_arrival_count_10min[i]);
        }
        m.columns.push_back(numeric_column("rolling_count_10min", std::move(rolling)));
    }
    m.columns.push_back(numeric_column("equipment_down", std::move(equip_flag)));
    m.columns.push_back(categorical_column("record_type", std::move(rtype)));
    m.columns.push_back(categorical_column("priority", std::move(priority)));
    m.columns.push_back(categorical_column("required_equipment", std::move(equipment)));
    m.columns.push_back(categorical_column("language", std::move(language)));
    m.columns.push_back(categorical_column("status", std::move(status)));

    for (size_t f = 0; f < ds.extra_schema.size(); ++f) {
        const auto& def = ds.extra_schema[f];
        if (def.numeric) {
            std::vector<double> values(n);
            for (size_t i = 0; i < n; ++i) values[i] = std::get<double>(records[i].extra_values[f]);
            m.columns.push_back(numeric_column(def.name, std::move(values)));
        } else {
            std::vector<std::string> values(n);
            for (size_t i = 0; i < n; ++i) values[i] = std::get<std::string>(records[i].extra_values[f]);
            m.columns.push_back(categorical_column(def.name, std::move(values)));
        }
    }
    return m;
}

namespace {

bool is_core_column(const std::string& name) { return name.rfind("x_", 0) != 0; }

double column_variance(const FeatureColumn& c) {
    if (c.is_numeric) {
        const auto n = static_cast<Eigen::Index>(c.numeric.size());
        if (n == 0) return 0.0;
        Eigen::Map<const Eigen::VectorXd> v(c.numeric.data(), n);
        const Eigen::ArrayXd centered = v.array() - v.mean();
        return centered.square().mean();
    }
    // Level-code variance over the sorted codebook.
    std::set<std::string> levels(c.categorical.begin(), c.categorical.end());
    std::map<std::string, double> code;
    double next = 0.0;
    for (const auto& l : levels) code[l] = next++;
    Eigen::ArrayXd v(static_cast<Eigen::Index>(c.categorical.size()));
    for (size_t i = 0; i < c.categorical.size(); ++i) v[static_cast<Eigen::Index>(i)] = code[c.categorical[i]];
    return (v - v.mean()).square().mean();
}

FeatureMatrix select_features(FeatureMatrix m, size_t limit) {
    if (m.columns.size() <= limit) return m;
    size_t core_count = 0;
    for (const auto& c : m.columns) {
        if (is_core_column(c.name)) ++core_count;
    }
    const size_t budget = limit > core_count ? limit - core_count : 0;

    struct Ranked {
        size_t index;
        double variance;
        const std::string* name;
    };
    std::vector<Ranked> padding;
    for (size_t j = 0; j < m.columns.size(); ++j) {
        if (!is_core_column(m.columns[j].name)) {
            padding.push_back({j, column_variance(m.columns[j]), &m.columns[j].name});
        }
    }
    std::sort(padding.begin(), padding.end(), [](const Ranked& a, const Ranked& b) {
        if (a.variance != b.variance) return a.variance > b.variance;
        return *a.name < *b.name;
    });

    std::vector<bool> keep(m.columns.size(), false);
    for (size_t j = 0; j < m.columns.size(); ++j) {
        if (is_core_column(m.columns[j].name)) keep[j] = true;
    }
    for (size_t r = 0; r < padding.size() && r < budget; ++r) keep[padding[r].index] = true;

    FeatureMatrix out;
    out.row_count = m.row_count;
    for (size_t j = 0; j < m.columns.size(); ++j) {
        if (keep[j]) out.columns.push_back(std::move(m.columns[j]));
    }
    return out;
}

FeatureTransform fit_transform(const FeatureMatrix& m, const FeatureMatrix& uncapped) {
    FeatureTransform t;
    for (const auto& c : m.columns) {
        FeatureTransform::Col col;
        col.name = c.name;
        col.numeric = c.is_numeric;
        if (c.is_numeric) {
            const FeatureColumn* raw = uncapped.find(c.name);
            col.cap_value = quantile_nearest_rank(raw ? raw->numeric : c.numeric, 0.99);
        } else {
            std::set<std::string> levels(c.categorical.begin(), c.categorical.end());
            levels.erase("");
            col.levels.assign(levels.begin(), levels.end());
            col.impute_value = col.levels.empty() ? "" : col.levels.front();
            // Mode for imputation, smallest level on ties.
            std::map<std::string, size_t> counts;
            for (const auto& v : c.categorical) {
                if (!v.empty()) ++counts[v];
            }
            size_t best = 0;
            for (const auto& [value, count] : counts) {
                if (count > best) {
                    best = count;
                    col.impute_value = value;
                }
            }
        }
        t.cols.push_back(std::move(col));
    }
    return t;
}

double encode_categorical(const FeatureTransform::Col& col, const std::string& value) {
    const std::string& v = value.empty() ? col.impute_value : value;
    const auto it = std::lower_bound(col.levels.begin(), col.levels.end(), v);
    if (it != col.levels.end() && *it == v) {
        return static_cast<double>(it - col.levels.begin());
    }
    return -1.0; // unseen level
}

} // namespace

Eigen::MatrixXd FeatureTransform::apply(const FeatureMatrix& m) const {
    Eigen::MatrixXd X(static_cast<Eigen::Index>(m.row_count), static_cast<Eigen::Index>(cols.size()));
    for (size_t j = 0; j < cols.size(); ++j) {
        const auto& col = cols[j];
        const FeatureColumn* c = m.find(col.name);
        if (c == nullptr) throw OrchError(ErrorCode::DimensionMismatch, "missing column " + col.name);
        for (size_t i = 0; i < m.row_count; ++i) {
            double v;
            if (col.numeric) {
                v = std::min(c->numeric[i], col.cap_value);
            } else {
                v = encode_categorical(col, c->categorical[i]);
            }
            X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
        }
    }
    return X;
}

PreprocessOutput preprocess_dataset(const Dataset& ds, bool normalize_tokens, size_t feature_limit) {
    PreprocessOutput out;
    FeatureMatrix raw = build_features(ds, normalize_tokens);

    FeatureMatrix cleaned;
    cleaned.row_count = raw.row_count;
    for (auto& c : raw.columns) {
        if (c.is_numeric) {
            FeatureColumn capped = c;
            capped.numeric = cap_outliers(std::move(capped.numeric), 0.99);
            cleaned.columns.push_back(std::move(capped));
        } else {
            FeatureColumn imputed = c;
            bool has_absent = false;
            for (const auto& v : imputed.categorical) {
                if (v.empty()) {
                    has_absent = true;
                    break;
                }
            }
            if (has_absent) imputed.categorical = impute_mode(std::move(imputed.categorical));
            cleaned.columns.push_back(std::move(imputed));
        }
    }

    auto [pruned, removed] = prune_correlated(std::move(cleaned), 0.8);
    out.pruned_columns = std::move(removed);
    out.matrix = select_features(std::move(pruned), feature_limit);
    out.transform = fit_transform(out.matrix, raw);
    out.labels = disruption_labels(ds);
    return out;
}

Eigen::VectorXd encode_feature_row(const FeatureTransform& t, const RecordView& r,
                                   double inter_arrival, int64_t rolling_count_10min,
                                   const ExtraSchema& schema, bool normalize_tokens) {
    const auto& lexicon = Lexicon::shipped();
    Eigen::VectorXd x(static_cast<Eigen::Index>(t.cols.size()));
    for (size_t j = 0; j < t.cols.size(); ++j) {
        const auto& col = t.cols[j];
        double v = 0.0;
        if (col.name == "timestamp") {
            v = std::min(static_cast<double>(r.timestamp), col.cap_value);
        } else if (col.name == "quantity") {
            v = std::min(static_cast<double>(r.quantity), col.cap_value);
        } else if (col.name == "planned_minutes") {
            v = std::min(r.planned_minutes, col.cap_value);
        } else if (col.name == "deadline_slack") {
            v = std::min(static_cast<double>(r.deadline - r.timestamp), col.cap_value);
        } else if (col.name == "arrival_burst_count") {
            v = std::min(static_cast<double>(r.arrival_burst_count), col.cap_value);
        } else if (col.name == "inter_arrival") {
            v = std::min(inter_arrival, col.cap_value);
        } else if (col.name == "rolling_count_10min") {
            v = std::min(static_cast<double>(rolling_count_10min), col.cap_value);
        } else if (col.name == "equipment_down") {
            v = std::min(r.equipment_down ? 1.0 : 0.0, col.cap_value);
        } else if (col.name == "record_type") {
            v = encode_categorical(col, to_token(r.record_type));
        } else if (col.name == "priority") {
            v = encode_categorical(col, r.priority.has_value() ? to_token(*r.priority) : "");
        } else if (col.name == "required_equipment") {
            v = encode_categorical(col, to_token(r.required_equipment));
        } else if (col.name == "language") {
            v = encode_categorical(col, to_token(r.language));
        } else if (col.name == "status") {
            v = encode_categorical(col,
                                   normalize_tokens ? lexicon.normalize(*r.status_label) : *r.status_label);
        } else {
            // Padding column: resolve against the dataset's extra schema.
            size_t idx = schema.size();
            for (size_t f = 0; f < schema.size(); ++f) {
                if (schema[f].name == col.name) {
                    idx = f;
                    break;
                }
            }
            if (idx == schema.size() || idx >= r.extra_values->size()) {
                v = col.numeric ? 0.0 : -1.0;
            } else if (col.numeric) {
                v = std::min(std::get<double>((*r.extra_values)[idx]), col.cap_value);
            } else {
                v = encode_categorical(col, std::get<std::string>((*r.extra_values)[idx]));
            }
        }
        x[static_cast<Eigen::Index>(j)] = v;
    }
    return x;
}

namespace {

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace

void write_feature_matrix(const FeatureMatrix& m, const FeatureTransform& t,
                          const std::string& csv_path, const std::string& sidecar_path) {
    std::ofstream out(csv_path, std::ios::binary);
    if (!out) throw OrchError(ErrorCode::IoError, "cannot open " + csv_path);
    for (size_t j = 0; j < m.columns.size(); ++j) {
        if (j) out << ',';
        out << m.columns[j].name;
    }
    out << '\n';
    for (size_t i = 0; i < m.row_count; ++i) {
        for (size_t j = 0; j < m.columns.size(); ++j) {
            if (j) out << ',';
            const auto& c = m.columns[j];
            if (c.is_numeric) {
                out << fmt_double(c.numeric[i]);
            } else {
                out << c.categorical[i];
            }
        }
        out << '\n';
    }
    if (!out) throw OrchError(ErrorCode::IoError, "write failed: " + csv_path);

    ordered_json j;
    j["schema_version"] = 1;
    j["row_count"] = m.row_count;
    ordered_json cols = ordered_json::array();
    for (const auto& col : t.cols) {
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
    j["columns"] = std::move(cols);
    ordered_json layout;
    layout["task_embedding"] = StateVector::kEmbeddingWidth;
    layout["priority_onehot"] = StateVector::kPriorityWidth;
    layout["record_type_onehot"] = StateVector::kRecordTypeWidth;
    layout["equipment_flags"] = StateVector::kEquipmentWidth;
    layout["queue_stats"] = StateVector::kQueueWidth;
    layout["time_to_deadline"] = 1;
    layout["processing_time_norm"] = 1;
    layout["total"] = StateVector::kDim;
    j["state_vector_layout"] = std::move(layout);

    std::ofstream sout(sidecar_path, std::ios::binary);
    if (!sout) throw OrchError(ErrorCode::IoError, "cannot open " + sidecar_path);
    sout << j.dump(2) << '\n';
    if (!sout) throw OrchError(ErrorCode::IoError, "write failed: " + sidecar_path);
}

LoadedFeatures load_feature_matrix(const std::string& csv_path, const std::string& sidecar_path) {
    std::ifstream sin(sidecar_path, std::ios::binary);
    if (!sin) throw OrchError(ErrorCode::MissingInput, "sidecar not found: " + sidecar_path);
    const auto j = ordered_json::parse(sin);
    const int version = j.at("schema_version").get<int>();
    if (version != 1) {
        throw OrchError(ErrorCode::SchemaVersionMismatch,
                        "sidecar schema_version " + std::to_string(version));
    }

    LoadedFeatures out;
    for (const auto& c : j.at("columns")) {
        FeatureTransform::Col col;
        col.name = c.at("name").get<std::string>();
        col.numeric = c.at("type").get<std::string>() == "numeric";
        if (col.numeric) {
            col.cap_value = c.at("cap_value").get<double>();
        } else {
            col.impute_value = c.at("impute_value").get<std::string>();
            col.levels = c.at("levels").get<std::vector<std::string>>();
        }
        out.transform.cols.push_back(std::move(col));
    }

    std::ifstream in(csv_path, std::ios::binary);
    if (!in) throw OrchError(ErrorCode::MissingInput, "features not found: " + csv_path);
    std::string line;
    if (!std::getline(in, line)) throw OrchError(ErrorCode::MissingInput, "empty features file");

    std::vector<std::string> names;
    {
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) names.push_back(cell);
    }
    if (names.size() != out.transform.cols.size()) {
        throw OrchError(ErrorCode::DimensionMismatch, "csv/sidecar column count mismatch");
    }
    out.matrix.columns.resize(names.size());
    for (size_t k = 0; k < names.size(); ++k) {
        out.matrix.columns[k].name = names[k];
        out.matrix.columns[k].is_numeric = out.transform.cols[k].numeric;
    }
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        size_t k = 0;
        while (std::getline(ss, cell, ',')) {
            if (k >= names.size()) break;
            auto& c = out.matrix.columns[k];
            if (c.is_numeric) {
                c.numeric.push_back(std::stod(cell));
            } else {
                c.categorical.push_back(cell);
            }
            ++k;
        }
        ++out.matrix.row_count;
    }
    return out;
}

} // namespace orch
