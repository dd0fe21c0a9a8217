#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <set>

#include "orch/datagen.hpp"
#include "orch/sim.hpp"

using namespace orch;

namespace {

TransactionRecord make_task(uint64_t id, int64_t ts, double planned, int64_t deadline,
                            RecordType type = RecordType::Task) {
    TransactionRecord r;
    r.record_id = id;
    r.record_type = type;
    char buf[19];
    std::snprintf(buf, sizeof buf, "%018llu", static_cast<unsigned long long>(id));
    r.task_id = parse_task_id(buf);
    r.timestamp = ts;
    r.priority = Priority::Normal;
    r.location = "A1-R1-B1";
    r.quantity = 5;
    r.planned_minutes = planned;
    r.deadline = deadline;
    r.status_label = "open";
    return r;
}

using Slice = std::shared_ptr<const std::vector<TransactionRecord>>;

Slice slice_of(std::vector<TransactionRecord> records) {
    return std::make_shared<const std::vector<TransactionRecord>>(std::move(records));
}

ScenarioParams two_workers(double s0 = 1.0, double s1 = 1.0) {
    ScenarioParams p;
    p.n_workers = 2;
    p.worker_speeds = {s0, s1};
    p.noise_seed = 99;
    return p;
}

EmbeddingTable zero_embedding() {
    return EmbeddingTable::Zero(kEmbeddingBuckets, StateVector::kEmbeddingWidth);
}

} // namespace

TEST_CASE("reset queues only timestamp-zero tasks and is deterministic") {
    std::vector<TransactionRecord> records;
    records.push_back(make_task(1, 100, 20, 160));
    records.push_back(make_task(2, 100, 20, 160));
    records.push_back(make_task(3, 130, 20, 190));
    Environment env(slice_of(records), two_workers());
    CHECK(env.clock() == 0);
    CHECK(env.queue_length() == 2); // re-based epoch: the two ts=100 rows

    Environment again(slice_of(records), two_workers());
    CHECK(again.queue_length() == env.queue_length());
    CHECK(again.head_view().record_id == env.head_view().record_id);
}

TEST_CASE("orders-only slices still schedule") {
    std::vector<TransactionRecord> records;
    records.push_back(make_task(1, 0, 20, 100, RecordType::Order));
    records.push_back(make_task(2, 0, 20, 100, RecordType::Order));
    Environment env(slice_of(records), two_workers());
    CHECK(env.queue_length() == 2);
    const StepOutcome out = env.step(ActionSpec::assign(0));
    CHECK(out.events.size() == 1);
}

TEST_CASE("empty slices are rejected") {
    try {
        Environment env(slice_of({}), two_workers());
        FAIL("expected EmptySlice");
    } catch (const OrchError& e) {
        CHECK(e.code() == ErrorCode::EmptySlice);
    }
}

TEST_CASE("assigning a clean task completes by deadline with +1 reward") {
    std::vector<TransactionRecord> records;
    records.push_back(make_task(1, 0, 20, 60));
    Environment env(slice_of(records), two_workers());
    const StepOutcome out = env.step(ActionSpec::assign(0));
    REQUIRE(out.events.size() == 1);
    CHECK(out.events[0].deadline_met);
    CHECK(out.events[0].completed_at == 20);
    CHECK(out.reward == doctest::Approx(1.0));
    CHECK(out.done);
    CHECK(env.log().outcomes.size() == 1);
}

TEST_CASE("expedite on a non-disrupted task costs the remediation fee") {
    std::vector<TransactionRecord> records;
    records.push_back(make_task(1, 0, 20, 60));
    records.push_back(make_task(2, 0, 20, 60));
    Environment env(slice_of(records), two_workers());
    const StepOutcome out = env.step(ActionSpec::expedite());
    CHECK(out.reward == doctest::Approx(-0.1));
    CHECK_FALSE(out.done);
    CHECK(env.queue_length() == 2);
}

TEST_CASE("deferring past the deadline ends in a missed task") {
    std::vector<TransactionRecord> records;
    records.push_back(make_task(1, 0, 20, 30));
    Environment env(slice_of(records), two_workers());
    double total = 0.0;
    // Single-task queue: defer advances time by +5 per step.
    for (int i = 0; i < 12; ++i) total += env.step(ActionSpec::defer()).reward;
    CHECK(env.clock() > 30);
    const StepOutcome out = env.step(ActionSpec::assign(0));
    REQUIRE(out.events.size() == 1);
    CHECK_FALSE(out.events[0].deadline_met);
    CHECK(out.reward < 0.0);
    CHECK(total <= 0.0);
}

TEST_CASE("invalid assignment costs -0.2 and advances time") {
    std::vector<TransactionRecord> records;
    records.push_back(make_task(1, 0, 20, 100));
    records.push_back(make_task(2, 0, 20, 100));
    ScenarioParams p;
    p.n_workers = 1;
    p.worker_speeds = {1.0};
    Environment env(slice_of(records), p);
    env.step(ActionSpec::assign(0)); // worker 0 busy until 20
    const int64_t before = env.clock();
    const StepOutcome out = env.step(ActionSpec::assign(0));
    CHECK(out.reward == doctest::Approx(-0.2));
    CHECK(out.events.empty());
    CHECK(env.clock() > before);
}

TEST_CASE("out-of-range worker index throws") {
    std::vector<TransactionRecord> records;
    records.push_back(make_task(1, 0, 20, 100));
    Environment env(slice_of(records), two_workers());
    try {
        env.step(ActionSpec::assign(7));
        FAIL("expected InvalidWorkerIndex");
    } catch (const OrchError& e) {
        CHECK(e.code() == ErrorCode::InvalidWorkerIndex);
    }
}

TEST_CASE("downtime doubles service unless rerouted") {
    auto disrupted = make_task(1, 0, 20, 55);
    disrupted.truth_disrupted = true;
    disrupted.truth_disruption_type = DisruptionType::EquipmentDowntime;
    disrupted.equipment_down = true;

    {
        Environment env(slice_of({disrupted}), two_workers());
        const StepOutcome out = env.step(ActionSpec::assign(0));
        CHECK(out.events[0].completed_at == 40); // 20 * 2
        CHECK(out.events[0].deadline_met);
    }
    {
        Environment env(slice_of({disrupted}), two_workers());
        const auto flags = env.equipment_flags();
        CHECK((flags[0] || flags[1] || flags[2]));
        env.step(ActionSpec::reroute());
        CHECK(env.head_rerouted());
        const auto cleared = env.equipment_flags();
        CHECK_FALSE((cleared[0] || cleared[1] || cleared[2]));
        const StepOutcome out = env.step(ActionSpec::assign(0));
        CHECK(out.events[0].completed_at == 25); // 20 + 5 reroute handling
        CHECK(out.events[0].remediated);
    }
}

TEST_CASE("surge delay holds service back until expedited away") {
    auto surge = make_task(1, 0, 20, 60, RecordType::Order);
    surge.truth_disrupted = true;
    surge.truth_disruption_type = DisruptionType::OrderSurge;

    ScenarioParams p = two_workers();
    Environment env(slice_of({surge}), p);
    const StepOutcome plain = env.step(ActionSpec::assign(0));
    const int64_t delayed_completion = plain.events[0].completed_at;
    CHECK(delayed_completion >= 20 + p.surge_delay_min);
    CHECK(delayed_completion <= 20 + p.surge_delay_max);

    Environment env2(slice_of({surge}), p);
    env2.step(ActionSpec::expedite());
    env2.step(ActionSpec::expedite());
    const StepOutcome fast = env2.step(ActionSpec::assign(0));
    // Two halvings cut the hidden delay to a quarter.
    CHECK(fast.events[0].completed_at ==
          20 + (delayed_completion - 20) / 2 / 2);
    CHECK(fast.events[0].remediated);
}

TEST_CASE("observe populates context spans from the environment") {
    std::vector<TransactionRecord> records;
    auto t = make_task(1, 0, 20, 20 + kDeadlineNormMinutes);
    records.push_back(t);
    Environment env(slice_of(records), two_workers());
    const StateVector sv = env.observe(zero_embedding());
    CHECK(sv.values[StateVector::kDeadlineOffset] == 1.0);
    CHECK(sv.values[StateVector::kQueueOffset] == doctest::Approx(1.0 / 64.0));
    for (int e = 0; e < 3; ++e) CHECK(sv.values[StateVector::kEquipmentOffset + e] == 0.0);
}

TEST_CASE("conservation: every task appears exactly once in outcomes") {
    GenConfig cfg;
    cfg.n_records = 120;
    cfg.field_count = 14;
    cfg.seed = 5;
    const Dataset ds = generate_dataset(cfg);
    auto slice = std::make_shared<const std::vector<TransactionRecord>>(ds.records);
    ScenarioParams p = make_scenario(cfg, cfg.seed);

    Rng rng(17);
    Environment env(slice, p);
    int64_t prev_clock = 0;
    while (!env.done()) {
        const int a = static_cast<int>(rng.below(static_cast<uint64_t>(env.action_space())));
        const StepOutcome out = env.step(action_from_index(a, env.n_workers()));
        CHECK(env.clock() >= prev_clock); // clock monotonicity
        prev_clock = env.clock();
        CHECK(out.reward >= -1.2);
        CHECK(out.reward <= 1.0);
    }
    const EpisodeLog& log = env.log();
    CHECK(log.outcomes.size() == ds.records.size());
    std::set<uint64_t> ids;
    for (const auto& o : log.outcomes) ids.insert(o.record_id);
    CHECK(ids.size() == ds.records.size());
}

TEST_CASE("identical seed and action sequence replays identically") {
    GenConfig cfg;
    cfg.n_records = 60;
    cfg.field_count = 14;
    cfg.seed = 8;
    const Dataset ds = generate_dataset(cfg);
    auto slice = std::make_shared<const std::vector<TransactionRecord>>(ds.records);
    const ScenarioParams p = make_scenario(cfg, cfg.seed);

    auto run = [&]() {
        Environment env(slice, p);
        Rng rng(23);
        std::string trace;
        while (!env.done()) {
            const int a = static_cast<int>(rng.below(static_cast<uint64_t>(env.action_space())));
            const StepOutcome out = env.step(action_from_index(a, env.n_workers()));
            trace += std::to_string(out.reward) + ";";
            for (const auto& e : out.events) {
                trace += std::to_string(e.record_id) + ":" + std::to_string(e.completed_at) + ",";
            }
        }
        trace += serialize_episode_log(env.log(), 0);
        return trace;
    };
    CHECK(run() == run());
}

TEST_CASE("oracle prefers assignment for a single clean task") {
    std::vector<TransactionRecord> records;
    records.push_back(make_task(1, 0, 20, 60));
    Environment env(slice_of(records), two_workers());
    const ActionSpec best = oracle_best_action(env, 3);
    CHECK(best == ActionSpec::assign(0));
}

TEST_CASE("oracle remediates evidenced downtime when it saves the deadline") {
    auto t = make_task(1, 0, 30, 48);
    t.truth_disrupted = true;
    t.truth_disruption_type = DisruptionType::EquipmentDowntime;
    t.equipment_down = true;
    // Unrerouted: 60 min misses the 48-min deadline; rerouted: 35 min meets.
    Environment env(slice_of({t}), two_workers());
    const ActionSpec best = oracle_best_action(env, 3);
    CHECK(best == ActionSpec::reroute());
}

TEST_CASE("oracle tie-break is deterministic by enumeration order") {
    std::vector<TransactionRecord> records;
    records.push_back(make_task(1, 0, 20, 500));
    Environment env(slice_of(records), two_workers());
    // Both workers idle and equally fast: assign(0) wins the tie.
    CHECK(oracle_best_action(env, 2) == ActionSpec::assign(0));
    CHECK(oracle_best_action(env, 2) == ActionSpec::assign(0));
}

TEST_CASE("oracle rollouts replay exactly against real steps") {
    // Comfortable deadlines: nothing is doomed, so the horizon-limited
    // oracle never stalls in defer loops.
    std::vector<TransactionRecord> records;
    for (uint64_t i = 0; i < 8; ++i) {
        auto t = make_task(i + 1, static_cast<int64_t>(i) * 12, 20, static_cast<int64_t>(i) * 12 + 200,
                           i % 3 == 0 ? RecordType::Order : RecordType::Task);
        if (i == 2 || i == 5) {
            t.truth_disrupted = true;
            t.truth_disruption_type = DisruptionType::EquipmentDowntime;
            t.equipment_down = true;
        }
        records.push_back(t);
    }
    auto slice = slice_of(records);
    ScenarioParams p = two_workers(0.9, 1.1);

    Environment env(slice, p);
    // Follow oracle actions; cloned rollouts must match the real rewards.
    int guard = 0;
    while (!env.done() && guard++ < 300) {
        Environment probe = env;
        const ActionSpec a = oracle_best_action(env, 2);
        const StepOutcome expected = probe.step(a);
        const StepOutcome actual = env.step(a);
        CHECK(actual.reward == expected.reward);
        CHECK(actual.events.size() == expected.events.size());
    }
    CHECK(env.done());
    CHECK(env.log().outcomes.size() == records.size());
}

TEST_CASE("oracle guards against oversized enumerations") {
    std::vector<TransactionRecord> records;
    records.push_back(make_task(1, 0, 20, 60));
    ScenarioParams p;
    p.n_workers = 50;
    p.worker_speeds.assign(50, 1.0);
    Environment env(slice_of(records), p);
    try {
        oracle_best_action(env, 3); // 53^3 > 1e5
        FAIL("expected StateTooLarge");
    } catch (const OrchError& e) {
        CHECK(e.code() == ErrorCode::StateTooLarge);
    }
}
