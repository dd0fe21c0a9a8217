#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <set>

#include "orch/datagen.hpp"

using namespace orch;

namespace {

GenConfig small_config(int64_t n, uint64_t seed = 1, int fields = 20) {
    GenConfig cfg;
    cfg.n_records = n;
    cfg.field_count = fields;
    cfg.seed = seed;
    return cfg;
}

std::vector<TransactionRecord> base_records(int64_t n, uint64_t seed = 3) {
    GenConfig cfg = small_config(n, seed);
    cfg.disruption_rate = 0.0;
    cfg.multilingual_rate = 0.0;
    cfg.missing_rate = 0.0;
    cfg.outlier_rate = 0.0;
    cfg.field_count = 14;
    return generate_dataset(cfg).records;
}

} // namespace

TEST_CASE("injected_count matches the paper-scale arithmetic") {
    CHECK(injected_count(300000, 0.05) == 15000);
    CHECK(injected_count(1000, 0.0) == 0);
    CHECK(injected_count(1000, 1.0) == 1000);
    CHECK(injected_count(10000, 0.03) == 300);
}

TEST_CASE("generate_dataset hits exact counts and the 50/25/25 mix") {
    const GenConfig cfg = small_config(2000, 9);
    const Dataset ds = generate_dataset(cfg);
    CHECK(ds.records.size() == 2000);
    CHECK(ds.manifest.n_disrupted == 100);
    CHECK(ds.manifest.n_downtime == 60);
    CHECK(ds.manifest.n_surge == 40);
    CHECK(ds.manifest.n_es == 200);
    CHECK(ds.manifest.n_missing_priority == 60);
    CHECK(ds.manifest.n_inventory == 500);
    CHECK(ds.manifest.n_order == 500);
    CHECK(ds.manifest.n_task == 1000);
}

TEST_CASE("zero disruption rate leaves every record clean") {
    GenConfig cfg = small_config(1000, 5);
    cfg.disruption_rate = 0.0;
    const Dataset ds = generate_dataset(cfg);
    CHECK(ds.manifest.n_disrupted == 0);
    for (const auto& r : ds.records) CHECK_FALSE(r.truth_disrupted);
}

TEST_CASE("identical config yields byte-identical serialization") {
    const GenConfig cfg = small_config(500, 7, 25);
    const Dataset a = generate_dataset(cfg);
    const Dataset b = generate_dataset(cfg);
    CHECK(serialize_dataset(a) == serialize_dataset(b));
    CHECK(serialize_manifest(a) == serialize_manifest(b));
}

TEST_CASE("different seeds produce different corpora") {
    const Dataset a = generate_dataset(small_config(300, 1));
    const Dataset b = generate_dataset(small_config(300, 2));
    CHECK(serialize_dataset(a) != serialize_dataset(b));
}

TEST_CASE("inject_disruptions splits 60/40 and is seed-deterministic") {
    auto records = base_records(1000);
    inject_disruptions(records, 0.05, 77);
    int64_t downtime = 0, surge = 0;
    std::set<uint64_t> first_ids;
    for (const auto& r : records) {
        if (r.truth_disruption_type == DisruptionType::EquipmentDowntime) {
            ++downtime;
            first_ids.insert(r.record_id);
        }
        if (r.truth_disruption_type == DisruptionType::OrderSurge) {
            ++surge;
            first_ids.insert(r.record_id);
        }
        CHECK(r.truth_disrupted == (r.truth_disruption_type != DisruptionType::None));
    }
    CHECK(downtime == 30);
    CHECK(surge == 20);

    // Disjoint seed: identical counts, different membership.
    auto other = base_records(1000);
    inject_disruptions(other, 0.05, 78);
    std::set<uint64_t> other_ids;
    int64_t other_count = 0;
    for (const auto& r : other) {
        if (r.truth_disrupted) {
            ++other_count;
            other_ids.insert(r.record_id);
        }
    }
    CHECK(other_count == 50);
    CHECK(first_ids != other_ids);
}

TEST_CASE("inject_disruptions rate=1 disrupts everything") {
    auto records = base_records(200);
    inject_disruptions(records, 1.0, 3);
    for (const auto& r : records) CHECK(r.truth_disrupted);
}

TEST_CASE("surge rows arrive in bursts of at least five") {
    auto records = base_records(4000, 21);
    inject_disruptions(records, 0.05, 99);
    for (const auto& r : records) {
        if (r.truth_disruption_type == DisruptionType::OrderSurge) {
            CHECK(r.arrival_burst_count >= 5);
        }
        CHECK(r.deadline >= r.timestamp);
    }
    // Still sorted by arrival after burst regrouping.
    for (size_t i = 1; i < records.size(); ++i) {
        CHECK(records[i].timestamp >= records[i - 1].timestamp);
    }
}

TEST_CASE("downtime evidence rates pass a chi-square consistency check") {
    auto records = base_records(10000, 31);
    inject_disruptions(records, 0.05, 131);
    int64_t down_n = 0, down_flagged = 0, clean_n = 0, clean_flagged = 0;
    for (const auto& r : records) {
        if (r.truth_disruption_type == DisruptionType::EquipmentDowntime) {
            ++down_n;
            down_flagged += r.equipment_down ? 1 : 0;
        } else if (!r.truth_disrupted) {
            ++clean_n;
            clean_flagged += r.equipment_down ? 1 : 0;
        }
    }
    REQUIRE(down_n == 300);
    // One-proportion chi-square vs p=0.9 and p=0.05; df=1 critical value
    // at p<0.01 is 6.635.
    auto chi_square = [](int64_t n, int64_t hits, double p) {
        const double expected_hit = p * static_cast<double>(n);
        const double expected_miss = (1.0 - p) * static_cast<double>(n);
        const double dh = static_cast<double>(hits) - expected_hit;
        const double dm = static_cast<double>(n - hits) - expected_miss;
        return dh * dh / expected_hit + dm * dm / expected_miss;
    };
    CHECK(chi_square(down_n, down_flagged, 0.9) < 6.635);
    CHECK(chi_square(clean_n, clean_flagged, 0.05) < 6.635);
}

TEST_CASE("inject_multilingual converts the exact count with the lexicon") {
    auto records = base_records(1000, 13);
    inject_multilingual(records, 0.10, 55);
    int64_t es = 0;
    for (const auto& r : records) {
        if (r.language == Language::ES) {
            ++es;
            // Status token localized; normalization maps it back to EN.
            const std::string back = Lexicon::shipped().normalize(r.status_label);
            CHECK(Lexicon::shipped().is_english_token(back));
        }
    }
    CHECK(es == 100);

    auto none = base_records(1000, 13);
    inject_multilingual(none, 0.0, 55);
    for (const auto& r : none) CHECK(r.language == Language::EN);
}

TEST_CASE("inject_missing blanks exactly the priority field") {
    auto records = base_records(10000, 17);
    inject_missing(records, 0.03, 7);
    int64_t missing = 0;
    for (const auto& r : records) missing += r.priority.has_value() ? 0 : 1;
    CHECK(missing == 300);

    auto again = base_records(10000, 17);
    inject_missing(again, 0.03, 7);
    for (size_t i = 0; i < records.size(); ++i) {
        CHECK(records[i].priority.has_value() == again[i].priority.has_value());
    }
}

TEST_CASE("inject_outliers targets order records only") {
    auto records = base_records(10000, 23);
    inject_outliers(records, 0.01, 15);
    int64_t outliers = 0;
    for (const auto& r : records) {
        if (r.record_type == RecordType::Order) {
            if (r.quantity >= 800) {
                ++outliers;
                CHECK(r.quantity <= 1200);
            }
        } else {
            CHECK(r.quantity <= 50);
        }
    }
    CHECK(outliers == 100);

    auto none = base_records(1000, 23);
    inject_outliers(none, 0.0, 15);
    for (const auto& r : none) CHECK(r.quantity <= 50);
}

TEST_CASE("scale_schema pads to the requested width") {
    const GenConfig cfg = small_config(50, 3);
    const GenConfig scaled = scale_schema(cfg, 100);
    const Dataset ds = generate_dataset(scaled);
    CHECK(ds.extra_schema.size() == 86);
    for (const auto& r : ds.records) CHECK(r.extra_values.size() == 86);

    CHECK(generate_dataset(scale_schema(cfg, 14)).extra_schema.empty());
    CHECK(padding_schema(900).size() == 886);

    try {
        scale_schema(cfg, 13);
        FAIL("expected FieldCountOutOfRange");
    } catch (const OrchError& e) {
        CHECK(e.code() == ErrorCode::FieldCountOutOfRange);
    }
    try {
        scale_schema(cfg, 901);
        FAIL("expected FieldCountOutOfRange");
    } catch (const OrchError& e) {
        CHECK(e.code() == ErrorCode::FieldCountOutOfRange);
    }
}

TEST_CASE("padding mixes categoricals, numerics and noisy duplicates") {
    const ExtraSchema schema = padding_schema(114); // pad = 100
    int cat = 0, num = 0, dup = 0;
    for (const auto& def : schema) {
        if (def.name.rfind("x_cat_", 0) == 0) {
            ++cat;
            CHECK_FALSE(def.numeric);
        }
        if (def.name.rfind("x_num_", 0) == 0) {
            ++num;
            CHECK(def.numeric);
        }
        if (def.name.rfind("x_dup_", 0) == 0) {
            ++dup;
            CHECK(def.numeric);
        }
    }
    CHECK(cat == 70);
    CHECK(dup == 10);
    CHECK(num == 20);
}

TEST_CASE("manifest counts equal a recount for random configs") {
    Rng rng(555);
    for (int trial = 0; trial < 15; ++trial) {
        GenConfig cfg;
        cfg.n_records = 100 + static_cast<int64_t>(rng.below(300));
        cfg.disruption_rate = rng.next_double() * 0.2;
        cfg.multilingual_rate = rng.next_double() * 0.3;
        cfg.missing_rate = rng.next_double() * 0.1;
        cfg.outlier_rate = rng.next_double() * 0.05;
        cfg.field_count = 14 + static_cast<int>(rng.below(30));
        cfg.seed = rng.next_u64();
        const Dataset ds = generate_dataset(cfg);
        CHECK(ds.manifest == recompute_manifest(ds.records));
        CHECK(ds.manifest.n_disrupted == injected_count(cfg.n_records, cfg.disruption_rate));
        CHECK(ds.manifest.n_es == injected_count(cfg.n_records, cfg.multilingual_rate));
        CHECK(ds.manifest.n_missing_priority == injected_count(cfg.n_records, cfg.missing_rate));
        for (const auto& r : ds.records) {
            const auto report = validate_record(r);
            CHECK(report.ok);
        }
    }
}

TEST_CASE("dataset round-trips through jsonl with localized tokens") {
    const GenConfig cfg = small_config(400, 29, 30);
    const Dataset ds = generate_dataset(cfg);
    const std::string path = "test_roundtrip.jsonl";
    write_dataset(ds, path);
    const Dataset back = load_dataset(path, true);
    REQUIRE(back.records.size() == ds.records.size());
    CHECK(back.manifest == ds.manifest);
    CHECK(back.config.seed == cfg.seed);
    for (size_t i = 0; i < ds.records.size(); ++i) {
        CHECK(back.records[i].record_id == ds.records[i].record_id);
        CHECK(back.records[i].priority == ds.records[i].priority);
        CHECK(back.records[i].status_label == ds.records[i].status_label);
        CHECK(back.records[i].truth_disrupted == ds.records[i].truth_disrupted);
    }
    CHECK(serialize_dataset(back) == serialize_dataset(ds));

    // Without normalization, Spanish priority tokens load as absent.
    const Dataset raw = load_dataset(path, false);
    int64_t extra_missing = 0;
    for (size_t i = 0; i < raw.records.size(); ++i) {
        if (ds.records[i].language == Language::ES && ds.records[i].priority.has_value() &&
            *ds.records[i].priority != Priority::Normal) {
            CHECK_FALSE(raw.records[i].priority.has_value());
            ++extra_missing;
        }
    }
    CHECK(extra_missing > 0);
    std::remove(path.c_str());
    std::remove(manifest_path_for(path).c_str());
}

TEST_CASE("invalid configs are rejected") {
    GenConfig cfg = small_config(100);
    cfg.disruption_rate = 1.5;
    try {
        generate_dataset(cfg);
        FAIL("expected InvalidConfig");
    } catch (const OrchError& e) {
        CHECK(e.code() == ErrorCode::InvalidConfig);
    }
}
