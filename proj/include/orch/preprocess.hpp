#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "orch/datagen.hpp"
#include "orch/domain.hpp"
#include "orch/lexicon.hpp"

namespace orch {

// Column-oriented feature store. Absent categorical cells are "".
struct FeatureColumn {
    std::string name;
    bool is_numeric = true;
    std::vector<double> numeric;
    std::vector<std::string> categorical;

    size_t size() const { return is_numeric ? numeric.size() : categorical.size(); }
};

struct FeatureMatrix {
    std::vector<FeatureColumn> columns;
    size_t row_count = 0;

    std::vector<std::string> column_names() const;
    const FeatureColumn* find(const std::string& name) const;
};

// Encoded-state layout, base D = 22:
//   [0,8)   task id embedding (bucket = id mod 64 into a learned 64x8 table)
//   [8,12)  priority one-hot (low, normal, high, urgent)
//   [12,15) record type one-hot (task, inventory, order)
//   [15,18) equipment flags (conveyor, forklift, scanner)
//   [18,20) queue stats (queue length / 64, arrivals in 10-min window / 20)
//   [20]    time to deadline / 480, floored at 0
//   [21]    planned minutes / p99 planned, capped at 1
//   [22,..) worker availability, one 0/1 per scenario worker (the paper's
//           "resource availability"; width = EncodeContext::worker_idle size,
//           zero-width outside a simulation context)
struct StateVector {
    static constexpr int kEmbeddingOffset = 0;
    static constexpr int kEmbeddingWidth = 8;
    static constexpr int kPriorityOffset = 8;
    static constexpr int kPriorityWidth = 4;
    static constexpr int kRecordTypeOffset = 12;
    static constexpr int kRecordTypeWidth = 3;
    static constexpr int kEquipmentOffset = 15;
    static constexpr int kEquipmentWidth = 3;
    static constexpr int kQueueOffset = 18;
    static constexpr int kQueueWidth = 2;
    static constexpr int kDeadlineOffset = 20;
    static constexpr int kPlannedOffset = 21;
    static constexpr int kDim = 22;

    Eigen::VectorXd values;
    // Embedding row behind values[0..8); -1 when the vector has no
    // embedded span (plain feature vectors, toy MDP states).
    int task_bucket = -1;
};

inline constexpr int kEmbeddingBuckets = 64;
using EmbeddingTable = Eigen::MatrixXd; // kEmbeddingBuckets x kEmbeddingWidth

struct EncodeContext {
    bool equipment_flags[3] = {false, false, false};
    int queue_length = 0;
    int arrivals_last_10min = 0;
    int64_t clock = 0;
    double p99_planned_minutes = 1.0;
    std::vector<uint8_t> worker_idle; // appended availability span
};

inline constexpr int kQueueLengthNorm = 64;
inline constexpr int kArrivalsNorm = 20;
inline constexpr int kDeadlineNormMinutes = 480;

// Requires an imputed priority; never sees truth_* (RecordView has none).
StateVector encode_state(const RecordView& r, const EncodeContext& ctx, const EmbeddingTable& emb);

// --- cleaning ops -----------------------------------------------------

// Mode imputation; ties broken by lexicographically smallest value.
std::vector<std::string> impute_mode(std::vector<std::string> column);

// Nearest-rank quantile: sorted value at 1-based index ceil(pct * n).
double quantile_nearest_rank(const std::vector<double>& column, double pct);

// Values above the pct-quantile replaced by it.
std::vector<double> cap_outliers(std::vector<double> column, double pct = 0.99);

// Pearson correlation; zero variance on either side yields 0.
double pearson(const std::vector<double>& a, const std::vector<double>& b);

// Iteratively removes the later of every numeric pair with |r| above the
// threshold; categorical columns pass through untouched.
std::pair<FeatureMatrix, std::vector<std::string>> prune_correlated(FeatureMatrix m,
                                                                    double r_threshold = 0.8);

// planned/actual clamped to [0, 2]; 1.0 = on plan.
double efficiency_score(const TransactionRecord& r, double actual_minutes);

struct TemporalFeatures {
    std::vector<double> inter_arrival_minutes;
    std::vector<int64_t> rolling_arrival_count_10min; // window [t-10, t], inclusive of self
};

TemporalFeatures temporal_features(const std::vector<int64_t>& sorted_timestamps);
TemporalFeatures temporal_features(const std::vector<TransactionRecord>& sorted_records);

// --- splits ------------------------------------------------------------

struct SplitSpec {
    std::vector<size_t> train_indices;
    std::vector<size_t> test_indices;
    std::vector<std::vector<size_t>> folds;
    uint64_t seed = 0;
};

// Stratified on the boolean labels: each fold's positive count is within
// one record of an even deal. |train| = round(train_frac * n).
SplitSpec split(const std::vector<uint8_t>& labels, double train_frac, int k, uint64_t seed);
SplitSpec split(const Dataset& ds, double train_frac = 0.8, int k = 5, uint64_t seed = 0);

// --- dataset-level assembly --------------------------------------------

// Engineered core columns (timestamp, quantity, planned_minutes,
// deadline_slack, arrival_burst_count, inter_arrival, rolling_count_10min,
// equipment_down; record_type, priority, required_equipment, language,
// status) followed by the padding columns. truth_* are never included.
FeatureMatrix build_features(const Dataset& ds, bool normalize_tokens = true);

std::vector<uint8_t> disruption_labels(const Dataset& ds);

// Per-column transform fitted on a training matrix so single records can
// be encoded identically at policy time. Categorical levels are coded by
// sorted codebook index; unseen levels map to -1.
struct FeatureTransform {
    struct Col {
        std::string name;
        bool numeric = true;
        double cap_value = 0.0;          // numeric
        std::string impute_value;        // categorical
        std::vector<std::string> levels; // categorical codebook, sorted
    };
    std::vector<Col> cols;

    Eigen::MatrixXd apply(const FeatureMatrix& m) const; // rows x |cols|
};

struct PreprocessOutput {
    FeatureMatrix matrix; // imputed, capped, pruned, top-limit selected
    FeatureTransform transform;
    std::vector<std::string> pruned_columns;
    std::vector<uint8_t> labels;
};

// Full cleaning pipeline. Core columns are always retained; padding
// columns compete for the remaining slots by variance descending, name
// ascending, up to feature_limit total columns.
PreprocessOutput preprocess_dataset(const Dataset& ds, bool normalize_tokens = true,
                                    size_t feature_limit = 100);

// Encodes one record into the transform's column space at policy time.
Eigen::VectorXd encode_feature_row(const FeatureTransform& t, const RecordView& r,
                                   double inter_arrival, int64_t rolling_count_10min,
                                   const ExtraSchema& schema, bool normalize_tokens);

// --- artifacts ----------------------------------------------------------

// The CSV holds features only (labels stay with the dataset file); the
// sidecar records column types, the fitted transform, and the state layout.
void write_feature_matrix(const FeatureMatrix& m, const FeatureTransform& t,
                          const std::string& csv_path, const std::string& sidecar_path);

struct LoadedFeatures {
    FeatureMatrix matrix;
    FeatureTransform transform;
};

LoadedFeatures load_feature_matrix(const std::string& csv_path, const std::string& sidecar_path);

} // namespace orch
