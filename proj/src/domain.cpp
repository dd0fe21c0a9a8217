#include "orch/domain.hpp"

#include <cctype>

namespace orch {

const char* error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::WrongLength: return "WrongLength";
        case ErrorCode::NonDigitCharacter: return "NonDigitCharacter";
        case ErrorCode::InvalidConfig: return "InvalidConfig";
        case ErrorCode::FieldCountOutOfRange: return "FieldCountOutOfRange";
        case ErrorCode::AllValuesMissing: return "AllValuesMissing";
        case ErrorCode::EmptyColumn: return "EmptyColumn";
        case ErrorCode::NonPositiveActual: return "NonPositiveActual";
        case ErrorCode::UnsortedInput: return "UnsortedInput";
        case ErrorCode::MissingPriority: return "MissingPriority";
        case ErrorCode::TooFewRows: return "TooFewRows";
        case ErrorCode::EmptySlice: return "EmptySlice";
        case ErrorCode::EmptyQueue: return "EmptyQueue";
        case ErrorCode::InvalidWorkerIndex: return "InvalidWorkerIndex";
        case ErrorCode::StateTooLarge: return "StateTooLarge";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::EmptyBatch: return "EmptyBatch";
        case ErrorCode::EmptyGrid: return "EmptyGrid";
        case ErrorCode::SingleClassInput: return "SingleClassInput";
        case ErrorCode::EmptyCounts: return "EmptyCounts";
        case ErrorCode::SingleClassLabels: return "SingleClassLabels";
        case ErrorCode::ZeroBaseline: return "ZeroBaseline";
        case ErrorCode::MissingInput: return "MissingInput";
        case ErrorCode::SchemaVersionMismatch: return "SchemaVersionMismatch";
        case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

TaskId parse_task_id(const std::string& text) {
    if (text.size() != TaskId::kLength) {
        throw OrchError(ErrorCode::WrongLength,
                        "task id must be 18 characters, got " + std::to_string(text.size()));
    }
    for (char c : text) {
        if (c < '0' || c > '9') {
            throw OrchError(ErrorCode::NonDigitCharacter,
                            std::string("task id contains non-digit '") + c + "'");
        }
    }
    return TaskId(text);
}

const char* to_token(RecordType t) {
    switch (t) {
        case RecordType::Task: return "task";
        case RecordType::Inventory: return "inventory";
        case RecordType::Order: return "order";
    }
    return "task";
}

const char* to_token(Priority p) {
    switch (p) {
        case Priority::Low: return "low";
        case Priority::Normal: return "normal";
        case Priority::High: return "high";
        case Priority::Urgent: return "urgent";
    }
    return "normal";
}

const char* to_token(Language l) { return l == Language::EN ? "en" : "es"; }

const char* to_token(DisruptionType d) {
    switch (d) {
        case DisruptionType::None: return "none";
        case DisruptionType::EquipmentDowntime: return "equipment_downtime";
        case DisruptionType::OrderSurge: return "order_surge";
    }
    return "none";
}

const char* to_token(Equipment e) {
    switch (e) {
        case Equipment::Conveyor: return "conveyor";
        case Equipment::Forklift: return "forklift";
        case Equipment::Scanner: return "scanner";
    }
    return "conveyor";
}

std::optional<RecordType> record_type_from_token(const std::string& s) {
    if (s == "task") return RecordType::Task;
    if (s == "inventory") return RecordType::Inventory;
    if (s == "order") return RecordType::Order;
    return std::nullopt;
}

std::optional<Priority> priority_from_token(const std::string& s) {
    if (s == "low") return Priority::Low;
    if (s == "normal") return Priority::Normal;
    if (s == "high") return Priority::High;
    if (s == "urgent") return Priority::Urgent;
    return std::nullopt;
}

std::optional<Language> language_from_token(const std::string& s) {
    if (s == "en") return Language::EN;
    if (s == "es") return Language::ES;
    return std::nullopt;
}

std::optional<DisruptionType> disruption_type_from_token(const std::string& s) {
    if (s == "none") return DisruptionType::None;
    if (s == "equipment_downtime") return DisruptionType::EquipmentDowntime;
    if (s == "order_surge") return DisruptionType::OrderSurge;
    return std::nullopt;
}

std::optional<Equipment> equipment_from_token(const std::string& s) {
    if (s == "conveyor") return Equipment::Conveyor;
    if (s == "forklift") return Equipment::Forklift;
    if (s == "scanner") return Equipment::Scanner;
    return std::nullopt;
}

RecordView observable_view(const TransactionRecord& r) {
    return RecordView{
        r.record_id,    r.record_type,        &r.task_id,       r.timestamp,
        r.priority,     &r.location,          r.quantity,       r.planned_minutes,
        r.deadline,     r.language,           &r.status_label,  r.required_equipment,
        r.equipment_down, r.arrival_burst_count, &r.extra_values,
    };
}

int action_count(int n_workers) { return n_workers + 3; }

ActionSpec action_from_index(int index, int n_workers) {
    if (index < n_workers) return ActionSpec::assign(index);
    switch (index - n_workers) {
        case 0: return ActionSpec::reroute();
        case 1: return ActionSpec::expedite();
        default: return ActionSpec::defer();
    }
}

int action_to_index(const ActionSpec& a, int n_workers) {
    switch (a.kind) {
        case ActionSpec::Kind::AssignWorker: return a.worker_index;
        case ActionSpec::Kind::RerouteTask: return n_workers;
        case ActionSpec::Kind::ExpediteTask: return n_workers + 1;
        case ActionSpec::Kind::Defer: return n_workers + 2;
    }
    return n_workers + 2;
}

namespace {

bool location_well_formed(const std::string& loc) {
    // A<aisle>-R<rack>-B<bin>, each a nonempty digit run.
    size_t i = 0;
    auto digits = [&](char prefix) {
        if (i >= loc.size() || loc[i] != prefix) return false;
        ++i;
        size_t start = i;
        while (i < loc.size() && std::isdigit(static_cast<unsigned char>(loc[i]))) ++i;
        return i > start;
    };
    if (!digits('A')) return false;
    if (i >= loc.size() || loc[i++] != '-') return false;
    if (!digits('R')) return false;
    if (i >= loc.size() || loc[i++] != '-') return false;
    if (!digits('B')) return false;
    return i == loc.size();
}

} // namespace

ValidationReport validate_record(const TransactionRecord& r) {
    ValidationReport report;
    auto violate = [&](const char* field, const char* rule) {
        report.violations.emplace_back(field, rule);
    };

    if (r.quantity < 0) violate("quantity", "non_negative");
    if (!(r.planned_minutes > 0.0)) violate("planned_minutes", "positive");
    if (r.deadline < r.timestamp) violate("deadline", "not_before_timestamp");
    if (r.truth_disrupted != (r.truth_disruption_type != DisruptionType::None)) {
        violate("truth_disruption_type", "consistency");
    }
    if (r.task_id.digits().size() != TaskId::kLength) violate("task_id", "shape");
    if (!location_well_formed(r.location)) violate("location", "format");
    if (r.arrival_burst_count < 1) violate("arrival_burst_count", "positive");

    report.ok = report.violations.empty();
    return report;
}

} // namespace orch
