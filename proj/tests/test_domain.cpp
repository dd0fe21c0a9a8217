#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cstdio>

#include "orch/domain.hpp"
#include "orch/lexicon.hpp"
#include "orch/rng.hpp"

using namespace orch;

namespace {

TransactionRecord well_formed_record() {
    TransactionRecord r;
    r.record_id = 7;
    r.record_type = RecordType::Task;
    r.task_id = parse_task_id("000000000000000042");
    r.timestamp = 10;
    r.priority = Priority::High;
    r.location = "A3-R2-B17";
    r.quantity = 5;
    r.planned_minutes = 30.0;
    r.deadline = 80;
    r.status_label = "open";
    return r;
}

} // namespace

TEST_CASE("parse_task_id accepts exactly 18 decimal digits") {
    const TaskId id = parse_task_id("000000000000000042");
    CHECK(id.digits() == "000000000000000042");
    CHECK(id.as_integer() == 42);
}

TEST_CASE("parse_task_id rejects wrong length") {
    try {
        parse_task_id("42");
        FAIL("expected WrongLength");
    } catch (const OrchError& e) {
        CHECK(e.code() == ErrorCode::WrongLength);
    }
}

TEST_CASE("parse_task_id rejects non-digit characters") {
    try {
        parse_task_id("00000000000000004X");
        FAIL("expected NonDigitCharacter");
    } catch (const OrchError& e) {
        CHECK(e.code() == ErrorCode::NonDigitCharacter);
    }
}

TEST_CASE("parse_task_id round-trips formatted ids") {
    Rng rng(11);
    for (int i = 0; i < 200; ++i) {
        char buf[19];
        std::snprintf(buf, sizeof buf, "%018llu",
                      static_cast<unsigned long long>(rng.below(1000000000000000000ULL)));
        const TaskId id = parse_task_id(buf);
        CHECK(parse_task_id(id.digits()) == id);
    }
}

TEST_CASE("validate_record accepts a well-formed record") {
    const ValidationReport report = validate_record(well_formed_record());
    CHECK(report.ok);
    CHECK(report.violations.empty());
}

TEST_CASE("validate_record flags negative quantity") {
    TransactionRecord r = well_formed_record();
    r.quantity = -5;
    const ValidationReport report = validate_record(r);
    CHECK_FALSE(report.ok);
    bool found = false;
    for (const auto& [field, rule] : report.violations) {
        if (field == "quantity" && rule == "non_negative") found = true;
    }
    CHECK(found);
}

TEST_CASE("validate_record flags truth consistency") {
    TransactionRecord r = well_formed_record();
    r.truth_disrupted = true;
    r.truth_disruption_type = DisruptionType::None;
    const ValidationReport report = validate_record(r);
    CHECK_FALSE(report.ok);
    bool found = false;
    for (const auto& [field, rule] : report.violations) {
        if (field == "truth_disruption_type" && rule == "consistency") found = true;
    }
    CHECK(found);
}

TEST_CASE("validate_record is deterministic and pure") {
    TransactionRecord r = well_formed_record();
    r.quantity = -1;
    r.planned_minutes = 0.0;
    const ValidationReport a = validate_record(r);
    const ValidationReport b = validate_record(r);
    CHECK(a.ok == b.ok);
    CHECK(a.violations == b.violations);
}

TEST_CASE("action partition is exhaustive and exclusive") {
    const int workers = 5;
    for (int i = 0; i < action_count(workers); ++i) {
        const ActionSpec a = action_from_index(i, workers);
        CHECK(a.is_remediation() != a.is_standard());
        CHECK(action_to_index(a, workers) == i);
    }
    CHECK(ActionSpec::assign(2).is_standard());
    CHECK(ActionSpec::defer().is_standard());
    CHECK(ActionSpec::reroute().is_remediation());
    CHECK(ActionSpec::expedite().is_remediation());
}

TEST_CASE("rng streams are deterministic and isolated") {
    Rng a(42), b(42);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

    Rng root(42);
    Rng c1 = root.derive(1);
    Rng c2 = root.derive(2);
    CHECK(c1.next_u64() != c2.next_u64());

    // Consuming from one derived stream does not shift a sibling.
    Rng root2(42);
    Rng d1 = root2.derive(1);
    for (int i = 0; i < 50; ++i) d1.next_u64();
    Rng d2 = root2.derive(2);
    Rng fresh = Rng(42).derive(2);
    for (int i = 0; i < 20; ++i) CHECK(d2.next_u64() == fresh.next_u64());
}

TEST_CASE("rng below stays in range and shuffle permutes") {
    Rng rng(7);
    for (int i = 0; i < 1000; ++i) CHECK(rng.below(13) < 13);
    std::vector<int> v{1, 2, 3, 4, 5, 6, 7, 8};
    auto sorted = v;
    rng.shuffle(v);
    std::sort(v.begin(), v.end());
    CHECK(v == sorted);
}

TEST_CASE("lexicon normalizes the shipped pairs") {
    const auto& lex = Lexicon::shipped();
    CHECK(lex.pairs().size() == 12);
    CHECK(normalize_language("urgente", lex) == "urgent");
    CHECK(normalize_language("urgent", lex) == "urgent");
    CHECK(normalize_language("zzz", lex) == "unknown");
    CHECK(lex.localize("down") == "averiado");
    for (const auto& [es, en] : lex.pairs()) {
        CHECK(lex.normalize(es) == en);
        CHECK(lex.normalize(en) == en);
    }
}
