#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "orch/errors.hpp"

namespace orch {

// 18-character decimal task identifier. Opaque: no internal structure is
// assumed beyond the digit shape.
class TaskId {
public:
    static constexpr size_t kLength = 18;

    TaskId() : digits_(kLength, '0') {}

    const std::string& digits() const { return digits_; }

    // Numeric view for embedding bucketing; 18 decimal digits fit in uint64.
    uint64_t as_integer() const {
        uint64_t v = 0;
        for (char c : digits_) v = v * 10 + static_cast<uint64_t>(c - '0');
        return v;
    }

    bool operator==(const TaskId&) const = default;

private:
    friend TaskId parse_task_id(const std::string& text);
    explicit TaskId(std::string digits) : digits_(std::move(digits)) {}

    std::string digits_;
};

// Throws OrchError{WrongLength|NonDigitCharacter}.
TaskId parse_task_id(const std::string& text);

enum class RecordType { Task = 0, Inventory = 1, Order = 2 };
enum class Priority { Low = 0, Normal = 1, High = 2, Urgent = 3 };
enum class Language { EN = 0, ES = 1 };
enum class DisruptionType { None = 0, EquipmentDowntime = 1, OrderSurge = 2 };
enum class Equipment { Conveyor = 0, Forklift = 1, Scanner = 2 };

const char* to_token(RecordType t);
const char* to_token(Priority p);
const char* to_token(Language l);
const char* to_token(DisruptionType d);
const char* to_token(Equipment e);

std::optional<RecordType> record_type_from_token(const std::string& s);
std::optional<Priority> priority_from_token(const std::string& s);
std::optional<Language> language_from_token(const std::string& s);
std::optional<DisruptionType> disruption_type_from_token(const std::string& s);
std::optional<Equipment> equipment_from_token(const std::string& s);

// Extra (schema-padding) field value. Categoricals are level tokens,
// numerics plain doubles.
using ExtraValue = std::variant<std::string, double>;

// Names and kinds of the padding fields, shared by every record of a
// dataset. Records store values aligned to this schema, so the key order
// is deterministic by construction and names are not duplicated per row.
struct ExtraFieldDef {
    std::string name;
    bool numeric = false;
};
using ExtraSchema = std::vector<ExtraFieldDef>;

// One synthetic logistics-execution row. Immutable value object by
// convention: pipeline stages copy-and-modify.
//
// truth_* carry the generator's ground truth and are never encoded into
// features; the encoder consumes RecordView, which lacks them.
struct TransactionRecord {
    uint64_t record_id = 0;
    RecordType record_type = RecordType::Task;
    TaskId task_id;
    int64_t timestamp = 0; // minutes since scenario epoch
    std::optional<Priority> priority;
    std::string location; // "A<aisle>-R<rack>-B<bin>"
    int64_t quantity = 0; // units, non-negative
    double planned_minutes = 1.0;
    int64_t deadline = 0; // minutes since epoch
    Language language = Language::EN;
    std::string status_label; // free text, possibly Spanish
    Equipment required_equipment = Equipment::Conveyor;
    bool equipment_down = false;   // observable, noisy evidence
    int64_t arrival_burst_count = 1; // records sharing this arrival minute
    std::vector<ExtraValue> extra_values; // aligned to the dataset's ExtraSchema

    bool truth_disrupted = false;
    DisruptionType truth_disruption_type = DisruptionType::None;
};

// Observable projection of a record: everything the encoder and the
// policies may read. Constructing one is the only sanctioned way to feed
// a record into feature space, so truth_* cannot leak by construction.
struct RecordView {
    uint64_t record_id;
    RecordType record_type;
    const TaskId* task_id;
    int64_t timestamp;
    std::optional<Priority> priority;
    const std::string* location;
    int64_t quantity;
    double planned_minutes;
    int64_t deadline;
    Language language;
    const std::string* status_label;
    Equipment required_equipment;
    bool equipment_down;
    int64_t arrival_burst_count;
    const std::vector<ExtraValue>* extra_values;
};

RecordView observable_view(const TransactionRecord& r);

// Scheduler decision vocabulary. AssignWorker/Defer are "standard",
// RerouteTask/ExpediteTask are "remediation"; the partition is total.
struct ActionSpec {
    enum class Kind { AssignWorker = 0, RerouteTask = 1, ExpediteTask = 2, Defer = 3 };

    Kind kind = Kind::Defer;
    int worker_index = 0; // meaningful only for AssignWorker

    static ActionSpec assign(int worker) { return {Kind::AssignWorker, worker}; }
    static ActionSpec reroute() { return {Kind::RerouteTask, 0}; }
    static ActionSpec expedite() { return {Kind::ExpediteTask, 0}; }
    static ActionSpec defer() { return {Kind::Defer, 0}; }

    bool is_remediation() const {
        return kind == Kind::RerouteTask || kind == Kind::ExpediteTask;
    }
    bool is_standard() const { return !is_remediation(); }

    bool operator==(const ActionSpec& o) const {
        if (kind != o.kind) return false;
        return kind != Kind::AssignWorker || worker_index == o.worker_index;
    }
};

// Canonical action enumeration for a scenario with n_workers workers:
// indices [0, n_workers) are AssignWorker(i), then Reroute, Expedite, Defer.
// This order is the oracle's tie-break order and the DQN's output layout.
int action_count(int n_workers);
ActionSpec action_from_index(int index, int n_workers);
int action_to_index(const ActionSpec& a, int n_workers);

struct ValidationReport {
    bool ok = true;
    std::vector<std::pair<std::string, std::string>> violations; // (field, rule)
};

// Pure; reports every invariant violation as data.
ValidationReport validate_record(const TransactionRecord& r);

} // namespace orch
