#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "orch/domain.hpp"
#include "orch/lexicon.hpp"
#include "orch/rng.hpp"

namespace orch {

// Generation knobs. Defaults are the paper-scale corpus; the shipped
// reference config runs a desk-scale variant of the same recipe.
struct GenConfig {
    int64_t n_records = 300000;
    double disruption_rate = 0.05;
    double multilingual_rate = 0.10;
    double missing_rate = 0.03;
    double outlier_rate = 0.01;
    int field_count = 900; // total schema width including core fields
    int n_workers = 8;
    uint64_t seed = 1;

    void validate() const; // throws InvalidConfig / FieldCountOutOfRange
};

// The 14 core observable fields: record_id, record_type, task_id,
// timestamp, priority, location, quantity, planned_minutes, deadline,
// language, status_label, required_equipment, equipment_down,
// arrival_burst_count. truth_* ride in a separate sub-object and are not
// part of the schema width.
inline constexpr int kCoreFieldCount = 14;

struct DatasetManifest {
    int64_t n_records = 0;
    int64_t n_task = 0;
    int64_t n_inventory = 0;
    int64_t n_order = 0;
    int64_t n_disrupted = 0;
    int64_t n_downtime = 0;
    int64_t n_surge = 0;
    int64_t n_en = 0;
    int64_t n_es = 0;
    int64_t n_missing_priority = 0;

    bool operator==(const DatasetManifest&) const = default;
};

struct Dataset {
    std::vector<TransactionRecord> records;
    ExtraSchema extra_schema;
    GenConfig config;
    DatasetManifest manifest;
};

// Exact injected-count rule shared by every injector: round(rate * n),
// half away from zero.
int64_t injected_count(int64_t n, double rate);

// Full recipe: base records -> disruptions -> multilingual -> missing ->
// outliers -> schema padding -> finalize (arrival sort, burst counts,
// manifest). Pure function of cfg; byte-identical serialization per seed.
Dataset generate_dataset(const GenConfig& cfg);

// Individual injectors, each deterministic per (records, rate, seed).
// inject_disruptions owns the evidence model: ground-truth labels, the
// equipment_down flag (P=0.9 given downtime, P=0.05 otherwise), the
// status_label "down" channel, and surge arrival bursts (it re-sorts by
// arrival afterwards and refreshes burst counts).
void inject_disruptions(std::vector<TransactionRecord>& records, double rate, uint64_t seed);
void inject_multilingual(std::vector<TransactionRecord>& records, double rate, uint64_t seed);
void inject_missing(std::vector<TransactionRecord>& records, double rate, uint64_t seed);
void inject_outliers(std::vector<TransactionRecord>& records, double rate, uint64_t seed);

// Returns a copy of cfg generating field_count total fields.
// Valid range: [kCoreFieldCount, 900].
GenConfig scale_schema(const GenConfig& cfg, int field_count);

// Padding schema for a config: round(0.7*pad) categorical (8 levels),
// the rest numeric, of which round(0.1*pad) duplicate-with-noise core
// numeric fields so correlation pruning has work to do.
ExtraSchema padding_schema(int field_count);

// Recomputed per-arrival-minute group sizes; sorts by (timestamp, record_id).
void refresh_arrival_bursts(std::vector<TransactionRecord>& records);

DatasetManifest recompute_manifest(const std::vector<TransactionRecord>& records);

// JSON Lines serialization. Keys in fixed documented order; truth_* under
// a "truth" sub-object; priority and status tokens localized for ES rows.
std::string serialize_record(const TransactionRecord& r, const ExtraSchema& schema,
                             const Lexicon& lexicon);
std::string serialize_dataset(const Dataset& ds); // all lines, for determinism checks
std::string serialize_manifest(const Dataset& ds); // manifest JSON text

void write_dataset(const Dataset& ds, const std::string& jsonl_path);
std::string manifest_path_for(const std::string& jsonl_path);

// Load a written dataset. When normalize_tokens is false, Spanish priority
// tokens are unparseable and load as absent (the multilingual ablation).
Dataset load_dataset(const std::string& jsonl_path, bool normalize_tokens = true);

} // namespace orch
