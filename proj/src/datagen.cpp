#include "orch/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include <nlohmann/json.hpp>

namespace orch {

using ordered_json = nlohmann::ordered_json;

namespace {

struct Weighted {
    const char* token;
    double weight;
};

// Operational status vocabulary; every token is in the shipped lexicon.
constexpr Weighted kStatusPool[] = {
    {"open", 0.30}, {"pick", 0.20},    {"pack", 0.15},    {"ship", 0.15},
    {"done", 0.10}, {"delayed", 0.06}, {"blocked", 0.02}, {"down", 0.02},
};

// Inter-arrival gaps in minutes; mean ~5.5 keeps eight workers around
// 70% utilization at the default planned-minutes range.
struct GapWeight {
    int gap;
    double weight;
};
constexpr GapWeight kGapPool[] = {
    {0, 0.06}, {1, 0.08}, {2, 0.10}, {3, 0.12}, {4, 0.12},
    {5, 0.12}, {6, 0.10}, {8, 0.10}, {10, 0.10}, {14, 0.10},
};

// Padding categorical level distribution (8 levels, skewed).
constexpr double kLevelWeights[8] = {0.30, 0.20, 0.15, 0.10, 0.08, 0.07, 0.05, 0.05};

const char* pick_status(Rng& rng) {
    double u = rng.next_double();
    double acc = 0.0;
    for (const auto& w : kStatusPool) {
        acc += w.weight;
        if (u < acc) return w.token;
    }
    return kStatusPool[0].token;
}

int pick_gap(Rng& rng) {
    double u = rng.next_double();
    double acc = 0.0;
    for (const auto& w : kGapPool) {
        acc += w.weight;
        if (u < acc) return w.gap;
    }
    return kGapPool[0].gap;
}

int pick_level(Rng& rng) {
    double u = rng.next_double();
    double acc = 0.0;
    for (int i = 0; i < 8; ++i) {
        acc += kLevelWeights[i];
        if (u < acc) return i;
    }
    return 0;
}

std::string make_task_id(Rng& rng) {
    char buf[19];
    uint64_t hi = rng.below(1000000000ULL);
    uint64_t lo = rng.below(1000000000ULL);
    std::snprintf(buf, sizeof buf, "%09llu%09llu", static_cast<unsigned long long>(hi),
                  static_cast<unsigned long long>(lo));
    return std::string(buf, 18);
}

// Integer ceil(1.5 * p) for integer-valued p.
int64_t base_slack(double planned) {
    int64_t p = static_cast<int64_t>(planned);
    return (3 * p + 1) / 2;
}

} // namespace

void GenConfig::validate() const {
    auto rate_ok = [](double r) { return r >= 0.0 && r <= 1.0; };
    if (n_records <= 0) throw OrchError(ErrorCode::InvalidConfig, "n_records must be positive");
    if (!rate_ok(disruption_rate)) throw OrchError(ErrorCode::InvalidConfig, "disruption_rate out of [0,1]");
    if (!rate_ok(multilingual_rate)) throw OrchError(ErrorCode::InvalidConfig, "multilingual_rate out of [0,1]");
    if (!rate_ok(missing_rate)) throw OrchError(ErrorCode::InvalidConfig, "missing_rate out of [0,1]");
    if (!rate_ok(outlier_rate)) throw OrchError(ErrorCode::InvalidConfig, "outlier_rate out of [0,1]");
    if (field_count < kCoreFieldCount || field_count > 900) {
        throw OrchError(ErrorCode::FieldCountOutOfRange,
                        "field_count " + std::to_string(field_count) + " outside [" +
                            std::to_string(kCoreFieldCount) + ", 900]");
    }
    if (n_workers < 1) throw OrchError(ErrorCode::InvalidConfig, "n_workers must be positive");
}

int64_t injected_count(int64_t n, double rate) {
    return std::llround(rate * static_cast<double>(n));
}

GenConfig scale_schema(const GenConfig& cfg, int field_count) {
    if (field_count < kCoreFieldCount || field_count > 900) {
        throw OrchError(ErrorCode::FieldCountOutOfRange,
                        "field_count " + std::to_string(field_count) + " outside [" +
                            std::to_string(kCoreFieldCount) + ", 900]");
    }
    GenConfig out = cfg;
    out.field_count = field_count;
    return out;
}

ExtraSchema padding_schema(int field_count) {
    const int pad = field_count - kCoreFieldCount;
    const int n_cat = static_cast<int>(std::llround(0.7 * pad));
    const int n_num = pad - n_cat;
    const int n_dup = std::min<int>(static_cast<int>(std::llround(0.1 * pad)), n_num);
    const int n_pure = n_num - n_dup;

    ExtraSchema schema;
    schema.reserve(pad);
    char buf[32];
    for (int i = 0; i < n_cat; ++i) {
        std::snprintf(buf, sizeof buf, "x_cat_%03d", i);
        schema.push_back({buf, false});
    }
    for (int i = 0; i < n_pure; ++i) {
        std::snprintf(buf, sizeof buf, "x_num_%03d", i);
        schema.push_back({buf, true});
    }
    for (int i = 0; i < n_dup; ++i) {
        std::snprintf(buf, sizeof buf, "x_dup_%03d", i);
        schema.push_back({buf, true});
    }
    return schema;
}

void refresh_arrival_bursts(std::vector<TransactionRecord>& records) {
    std::sort(records.begin(), records.end(), [](const auto& a, const auto& b) {
        if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
        return a.record_id < b.record_id;
    });
    size_t i = 0;
    while (i < records.size()) {
        size_t j = i;
        while (j < records.size() && records[j].timestamp == records[i].timestamp) ++j;
        for (size_t k = i; k < j; ++k) records[k].arrival_burst_count = static_cast<int64_t>(j - i);
        i = j;
    }
}

namespace {

std::vector<TransactionRecord> generate_base(const GenConfig& cfg) {
    const int64_t n = cfg.n_records;
    Rng root(derive_seed(cfg.seed, stream_tag::base_records));
    Rng types_rng = root.derive(1);
    Rng arrivals_rng = root.derive(2);
    Rng fields_rng = root.derive(3);

    // 50/25/25 task/inventory/order, remainder to Task.
    const int64_t n_inv = std::llround(0.25 * static_cast<double>(n));
    const int64_t n_ord = std::llround(0.25 * static_cast<double>(n));
    std::vector<RecordType> types;
    types.reserve(n);
    for (int64_t i = 0; i < n - n_inv - n_ord; ++i) types.push_back(RecordType::Task);
    for (int64_t i = 0; i < n_inv; ++i) types.push_back(RecordType::Inventory);
    for (int64_t i = 0; i < n_ord; ++i) types.push_back(RecordType::Order);
    types_rng.shuffle(types);

    std::vector<TransactionRecord> records;
    records.reserve(n);
    int64_t clock = 0;
    for (int64_t i = 0; i < n; ++i) {
        TransactionRecord r;
        r.record_id = static_cast<uint64_t>(i + 1);
        r.record_type = types[static_cast<size_t>(i)];
        r.task_id = parse_task_id(make_task_id(fields_rng));
        if (i > 0) clock += pick_gap(arrivals_rng);
        r.timestamp = clock;
        r.priority = static_cast<Priority>(fields_rng.uniform_int(0, 3));
        char loc[24];
        std::snprintf(loc, sizeof loc, "A%d-R%d-B%d", static_cast<int>(fields_rng.uniform_int(1, 20)),
                      static_cast<int>(fields_rng.uniform_int(1, 10)),
                      static_cast<int>(fields_rng.uniform_int(1, 50)));
        r.location = loc;
        r.quantity = fields_rng.uniform_int(1, 50);
        r.planned_minutes = static_cast<double>(fields_rng.uniform_int(20, 40));
        r.deadline = r.timestamp + base_slack(r.planned_minutes) + fields_rng.uniform_int(5, 35);
        r.language = Language::EN;
        r.status_label = pick_status(fields_rng);
        r.required_equipment = static_cast<Equipment>(fields_rng.uniform_int(0, 2));
        r.equipment_down = false;
        r.arrival_burst_count = 1;
        records.push_back(std::move(r));
    }
    return records;
}

void apply_padding(std::vector<TransactionRecord>& records, const ExtraSchema& schema,
                   uint64_t seed) {
    const size_t n = records.size();
    for (auto& r : records) {
        r.extra_values.clear();
        r.extra_values.reserve(schema.size());
    }

    Rng root(seed);
    // Duplicated-with-noise sources cycle through core numeric fields.
    enum class DupSource { Quantity, Planned, Slack, Timestamp };
    int dup_counter = 0;

    char level[4];
    for (size_t f = 0; f < schema.size(); ++f) {
        Rng field_rng = root.derive(static_cast<uint64_t>(f) + 1);
        const auto& def = schema[f];
        const bool is_dup = def.name.rfind("x_dup_", 0) == 0;
        if (!def.numeric) {
            for (size_t i = 0; i < n; ++i) {
                std::snprintf(level, sizeof level, "l%d", pick_level(field_rng));
                records[i].extra_values.emplace_back(std::string(level));
            }
        } else if (is_dup) {
            const DupSource src = static_cast<DupSource>(dup_counter % 4);
            ++dup_counter;
            for (size_t i = 0; i < n; ++i) {
                const auto& r = records[i];
                double base = 0.0, scale = 1.0;
                switch (src) {
                    case DupSource::Quantity: base = static_cast<double>(r.quantity); scale = 5.0; break;
                    case DupSource::Planned: base = r.planned_minutes; scale = 3.0; break;
                    case DupSource::Slack: base = static_cast<double>(r.deadline - r.timestamp); scale = 5.0; break;
                    case DupSource::Timestamp: base = static_cast<double>(r.timestamp); scale = 10.0; break;
                }
                records[i].extra_values.emplace_back(base + (field_rng.next_double() - 0.5) * scale);
            }
        } else {
            for (size_t i = 0; i < n; ++i) {
                records[i].extra_values.emplace_back(field_rng.next_double());
            }
        }
    }
}

} // namespace

void inject_disruptions(std::vector<TransactionRecord>& records, double rate, uint64_t seed) {
    const int64_t n = static_cast<int64_t>(records.size());
    const int64_t d = injected_count(n, rate);
    Rng root(seed);
    Rng selection = root.derive(1);
    Rng evidence = root.derive(2);
    Rng bursts = root.derive(3);

    for (auto& r : records) {
        r.truth_disrupted = false;
        r.truth_disruption_type = DisruptionType::None;
    }

    auto order = selection.sample_indices(records.size(), records.size());
    const int64_t n_down = std::llround(0.6 * static_cast<double>(d));

    std::vector<size_t> downtime(order.begin(), order.begin() + static_cast<size_t>(n_down));
    // Surge prefers Order records ("order surge"); spill to anything else
    // in shuffled order when there are not enough.
    std::vector<size_t> surge;
    const size_t n_surge = static_cast<size_t>(d - n_down);
    for (size_t pos = static_cast<size_t>(n_down); pos < order.size() && surge.size() < n_surge; ++pos) {
        if (records[order[pos]].record_type == RecordType::Order) surge.push_back(order[pos]);
    }
    for (size_t pos = static_cast<size_t>(n_down); pos < order.size() && surge.size() < n_surge; ++pos) {
        const size_t idx = order[pos];
        if (records[idx].record_type != RecordType::Order &&
            std::find(surge.begin(), surge.end(), idx) == surge.end()) {
            surge.push_back(idx);
        }
    }

    for (size_t idx : downtime) {
        records[idx].truth_disrupted = true;
        records[idx].truth_disruption_type = DisruptionType::EquipmentDowntime;
    }
    for (size_t idx : surge) {
        records[idx].truth_disrupted = true;
        records[idx].truth_disruption_type = DisruptionType::OrderSurge;
    }

    // Evidence pass, in record order so draws are independent of the
    // selection sets: equipment flag 0.9 | downtime, 0.05 otherwise; the
    // status channel marks downtime "down" half the time.
    for (auto& r : records) {
        if (r.truth_disruption_type == DisruptionType::EquipmentDowntime) {
            r.equipment_down = evidence.bernoulli(0.9);
            if (evidence.bernoulli(0.5)) r.status_label = "down";
        } else {
            r.equipment_down = evidence.bernoulli(0.05);
            if (r.truth_disruption_type == DisruptionType::OrderSurge && evidence.bernoulli(0.5)) {
                r.status_label = "delayed";
            }
        }
    }

    // Group surge rows into simultaneous-arrival bursts of 5-8, keeping
    // each row's deadline slack.
    size_t pos = 0;
    while (pos < surge.size()) {
        size_t size = static_cast<size_t>(bursts.uniform_int(5, 8));
        if (surge.size() - pos <= 8 || surge.size() - pos - size < 5) size = surge.size() - pos;
        int64_t anchor = records[surge[pos]].timestamp;
        for (size_t k = pos; k < pos + size; ++k) {
            anchor = std::min(anchor, records[surge[k]].timestamp);
        }
        for (size_t k = pos; k < pos + size; ++k) {
            auto& r = records[surge[k]];
            const int64_t slack = r.deadline - r.timestamp;
            r.timestamp = anchor;
            r.deadline = anchor + slack;
        }
        pos += size;
    }

    refresh_arrival_bursts(records);
}

void inject_multilingual(std::vector<TransactionRecord>& records, double rate, uint64_t seed) {
    const int64_t count = injected_count(static_cast<int64_t>(records.size()), rate);
    Rng rng(seed);
    const auto& lexicon = Lexicon::shipped();
    auto chosen = rng.sample_indices(records.size(), static_cast<size_t>(count));
    std::sort(chosen.begin(), chosen.end());
    for (size_t idx : chosen) {
        auto& r = records[idx];
        r.language = Language::ES;
        r.status_label = lexicon.localize(r.status_label);
    }
}

void inject_missing(std::vector<TransactionRecord>& records, double rate, uint64_t seed) {
    const int64_t count = injected_count(static_cast<int64_t>(records.size()), rate);
    Rng rng(seed);
    auto chosen = rng.sample_indices(records.size(), static_cast<size_t>(count));
    for (size_t idx : chosen) records[idx].priority.reset();
}

void inject_outliers(std::vector<TransactionRecord>& records, double rate, uint64_t seed) {
    const int64_t count = injected_count(static_cast<int64_t>(records.size()), rate);
    Rng root(seed);
    Rng selection = root.derive(1);
    Rng values = root.derive(2);

    std::vector<size_t> orders;
    for (size_t i = 0; i < records.size(); ++i) {
        if (records[i].record_type == RecordType::Order) orders.push_back(i);
    }
    selection.shuffle(orders);
    const size_t take = std::min<size_t>(static_cast<size_t>(count), orders.size());
    std::vector<size_t> chosen(orders.begin(), orders.begin() + take);
    std::sort(chosen.begin(), chosen.end());
    for (size_t idx : chosen) {
        records[idx].quantity = values.uniform_int(800, 1200);
    }
}

DatasetManifest recompute_manifest(const std::vector<TransactionRecord>& records) {
    DatasetManifest m;
    m.n_records = static_cast<int64_t>(records.size());
    for (const auto& r : records) {
        switch (r.record_type) {
            case RecordType::Task: ++m.n_task; break;
            case RecordType::Inventory: ++m.n_inventory; break;
            case RecordType::Order: ++m.n_order; break;
        }
        if (r.truth_disrupted) ++m.n_disrupted;
        if (r.truth_disruption_type == DisruptionType::EquipmentDowntime) ++m.n_downtime;
        if (r.truth_disruption_type == DisruptionType::OrderSurge) ++m.n_surge;
        if (r.language == Language::EN) ++m.n_en; else ++m.n_es;
        if (!r.priority.has_value()) ++m.n_missing_priority;
    }
    return m;
}

Dataset generate_dataset(const GenConfig& cfg) {
    cfg.validate();
    Dataset ds;
    ds.config = cfg;
    ds.records = generate_base(cfg);
    inject_disruptions(ds.records, cfg.disruption_rate, derive_seed(cfg.seed, stream_tag::disruptions));
    inject_multilingual(ds.records, cfg.multilingual_rate, derive_seed(cfg.seed, stream_tag::multilingual));
    inject_missing(ds.records, cfg.missing_rate, derive_seed(cfg.seed, stream_tag::missing));
    inject_outliers(ds.records, cfg.outlier_rate, derive_seed(cfg.seed, stream_tag::outliers));
    ds.extra_schema = padding_schema(cfg.field_count);
    apply_padding(ds.records, ds.extra_schema, derive_seed(cfg.seed, stream_tag::padding));
    refresh_arrival_bursts(ds.records);
    ds.manifest = recompute_manifest(ds.records);
    return ds;
}

std::string serialize_record(const TransactionRecord& r, const ExtraSchema& schema,
                             const Lexicon& lexicon) {
    ordered_json j;
    j["record_id"] = r.record_id;
    j["record_type"] = to_token(r.record_type);
    j["task_id"] = r.task_id.digits();
    j["timestamp"] = r.timestamp;
    if (r.priority.has_value()) {
        std::string token = to_token(*r.priority);
        if (r.language == Language::ES) token = lexicon.localize(token);
        j["priority"] = token;
    } else {
        j["priority"] = nullptr;
    }
    j["location"] = r.location;
    j["quantity"] = r.quantity;
    j["planned_minutes"] = r.planned_minutes;
    j["deadline"] = r.deadline;
    j["language"] = to_token(r.language);
    j["status_label"] = r.status_label;
    j["required_equipment"] = to_token(r.required_equipment);
    j["equipment_down"] = r.equipment_down;
    j["arrival_burst_count"] = r.arrival_burst_count;
    ordered_json extra = ordered_json::object();
    for (size_t f = 0; f < schema.size() && f < r.extra_values.size(); ++f) {
        const auto& v = r.extra_values[f];
        if (std::holds_alternative<double>(v)) {
            extra[schema[f].name] = std::get<double>(v);
        } else {
            extra[schema[f].name] = std::get<std::string>(v);
        }
    }
    j["extra"] = std::move(extra);
    ordered_json truth = ordered_json::object();
    truth["disrupted"] = r.truth_disrupted;
    truth["type"] = to_token(r.truth_disruption_type);
    j["truth"] = std::move(truth);
    return j.dump();
}

std::string serialize_dataset(const Dataset& ds) {
    const auto& lexicon = Lexicon::shipped();
    std::string out;
    for (const auto& r : ds.records) {
        out += serialize_record(r, ds.extra_schema, lexicon);
        out += '\n';
    }
    return out;
}

std::string serialize_manifest(const Dataset& ds) {
    ordered_json j;
    j["schema_version"] = 1;
    ordered_json cfg;
    cfg["n_records"] = ds.config.n_records;
    cfg["disruption_rate"] = ds.config.disruption_rate;
    cfg["multilingual_rate"] = ds.config.multilingual_rate;
    cfg["missing_rate"] = ds.config.missing_rate;
    cfg["outlier_rate"] = ds.config.outlier_rate;
    cfg["field_count"] = ds.config.field_count;
    cfg["n_workers"] = ds.config.n_workers;
    cfg["seed"] = ds.config.seed;
    j["config"] = std::move(cfg);
    ordered_json counts;
    counts["n_records"] = ds.manifest.n_records;
    counts["task"] = ds.manifest.n_task;
    counts["inventory"] = ds.manifest.n_inventory;
    counts["order"] = ds.manifest.n_order;
    counts["disrupted"] = ds.manifest.n_disrupted;
    counts["equipment_downtime"] = ds.manifest.n_downtime;
    counts["order_surge"] = ds.manifest.n_surge;
    counts["en"] = ds.manifest.n_en;
    counts["es"] = ds.manifest.n_es;
    counts["missing_priority"] = ds.manifest.n_missing_priority;
    j["counts"] = std::move(counts);
    return j.dump(2) + "\n";
}

std::string manifest_path_for(const std::string& jsonl_path) {
    const std::string suffix = ".jsonl";
    std::string base = jsonl_path;
    if (base.size() > suffix.size() && base.compare(base.size() - suffix.size(), suffix.size(), suffix) == 0) {
        base.resize(base.size() - suffix.size());
    }
    return base + ".manifest.json";
}

void write_dataset(const Dataset& ds, const std::string& jsonl_path) {
    std::ofstream out(jsonl_path, std::ios::binary);
    if (!out) throw OrchError(ErrorCode::IoError, "cannot open " + jsonl_path);
    const auto& lexicon = Lexicon::shipped();
    for (const auto& r : ds.records) {
        out << serialize_record(r, ds.extra_schema, lexicon) << '\n';
    }
    if (!out) throw OrchError(ErrorCode::IoError, "write failed: " + jsonl_path);
    std::ofstream mout(manifest_path_for(jsonl_path), std::ios::binary);
    if (!mout) throw OrchError(ErrorCode::IoError, "cannot open manifest for " + jsonl_path);
    mout << serialize_manifest(ds);
    if (!mout) throw OrchError(ErrorCode::IoError, "manifest write failed: " + jsonl_path);
}

namespace {

TransactionRecord parse_record_line(const std::string& line, const Lexicon& lexicon,
                                    bool normalize_tokens, ExtraSchema& schema,
                                    bool& schema_known) {
    const auto j = ordered_json::parse(line);
    TransactionRecord r;
    r.record_id = j.at("record_id").get<uint64_t>();
    r.record_type = record_type_from_token(j.at("record_type").get<std::string>())
                        .value_or(RecordType::Task);
    r.task_id = parse_task_id(j.at("task_id").get<std::string>());
    r.timestamp = j.at("timestamp").get<int64_t>();
    if (!j.at("priority").is_null()) {
        const std::string token = j.at("priority").get<std::string>();
        auto p = priority_from_token(token);
        if (!p && normalize_tokens) p = priority_from_token(lexicon.normalize(token));
        r.priority = p; // unparseable tokens load as absent
    }
    r.location = j.at("location").get<std::string>();
    r.quantity = j.at("quantity").get<int64_t>();
    r.planned_minutes = j.at("planned_minutes").get<double>();
    r.deadline = j.at("deadline").get<int64_t>();
    r.language = language_from_token(j.at("language").get<std::string>()).value_or(Language::EN);
    r.status_label = j.at("status_label").get<std::string>();
    r.required_equipment =
        equipment_from_token(j.at("required_equipment").get<std::string>()).value_or(Equipment::Conveyor);
    r.equipment_down = j.at("equipment_down").get<bool>();
    r.arrival_burst_count = j.at("arrival_burst_count").get<int64_t>();

    const auto& extra = j.at("extra");
    if (!schema_known) {
        for (auto it = extra.begin(); it != extra.end(); ++it) {
            schema.push_back({it.key(), it.value().is_number()});
        }
        schema_known = true;
    }
    r.extra_values.reserve(schema.size());
    for (const auto& def : schema) {
        const auto& v = extra.at(def.name);
        if (v.is_number()) {
            r.extra_values.emplace_back(v.get<double>());
        } else {
            r.extra_values.emplace_back(v.get<std::string>());
        }
    }

    const auto& truth = j.at("truth");
    r.truth_disrupted = truth.at("disrupted").get<bool>();
    r.truth_disruption_type =
        disruption_type_from_token(truth.at("type").get<std::string>()).value_or(DisruptionType::None);
    return r;
}

} // namespace

Dataset load_dataset(const std::string& jsonl_path, bool normalize_tokens) {
    std::ifstream in(jsonl_path, std::ios::binary);
    if (!in) throw OrchError(ErrorCode::MissingInput, "dataset not found: " + jsonl_path);

    Dataset ds;
    const auto& lexicon = Lexicon::shipped();
    bool schema_known = false;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        ds.records.push_back(parse_record_line(line, lexicon, normalize_tokens, ds.extra_schema, schema_known));
    }
    if (ds.records.empty()) throw OrchError(ErrorCode::MissingInput, "dataset is empty: " + jsonl_path);

    std::ifstream min(manifest_path_for(jsonl_path), std::ios::binary);
    if (min) {
        const auto j = ordered_json::parse(min);
        const int version = j.at("schema_version").get<int>();
        if (version != 1) {
            throw OrchError(ErrorCode::SchemaVersionMismatch,
                            "manifest schema_version " + std::to_string(version));
        }
        const auto& cfg = j.at("config");
        ds.config.n_records = cfg.at("n_records").get<int64_t>();
        ds.config.disruption_rate = cfg.at("disruption_rate").get<double>();
        ds.config.multilingual_rate = cfg.at("multilingual_rate").get<double>();
        ds.config.missing_rate = cfg.at("missing_rate").get<double>();
        ds.config.outlier_rate = cfg.at("outlier_rate").get<double>();
        ds.config.field_count = cfg.at("field_count").get<int>();
        ds.config.n_workers = cfg.at("n_workers").get<int>();
        ds.config.seed = cfg.at("seed").get<uint64_t>();
    } else {
        ds.config.n_records = static_cast<int64_t>(ds.records.size());
        ds.config.field_count = kCoreFieldCount + static_cast<int>(ds.extra_schema.size());
    }
    ds.manifest = recompute_manifest(ds.records);
    return ds;
}

} // namespace orch
