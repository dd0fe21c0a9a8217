#pragma once

#include <stdexcept>
#include <string>

namespace orch {

enum class ErrorCode {
    WrongLength,
    NonDigitCharacter,
    InvalidConfig,
    FieldCountOutOfRange,
    AllValuesMissing,
    EmptyColumn,
    NonPositiveActual,
    UnsortedInput,
    MissingPriority,
    TooFewRows,
    EmptySlice,
    EmptyQueue,
    InvalidWorkerIndex,
    StateTooLarge,
    DimensionMismatch,
    EmptyBatch,
    EmptyGrid,
    SingleClassInput,
    EmptyCounts,
    SingleClassLabels,
    ZeroBaseline,
    MissingInput,
    SchemaVersionMismatch,
    IoError,
};

const char* error_code_name(ErrorCode code);

class OrchError : public std::runtime_error {
public:
    OrchError(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + what), code_(code) {}

    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

} // namespace orch
