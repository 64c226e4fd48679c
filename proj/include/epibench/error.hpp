#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace epibench {

enum class ErrorCode {
    ConfigInvalid,
    StepTooLarge,
    AlignmentMismatch,
    RunFailed,
    SchemaMismatch,
    TooFewRows,
    UnknownColumn,
    DegenerateColumn,
    EmptySplit,
    SingularSystem,
    NonConvergence,
    KTooLarge,
    FitFailed,
    MissingFile,
    ParseError,
};

std::string_view to_string(ErrorCode code);

/// Library-wide exception. Every failure the pipeline can report carries a
/// stable machine-readable code next to the human message.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace epibench
