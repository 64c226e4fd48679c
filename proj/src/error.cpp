#include "epibench/error.hpp"

namespace epibench {

std::string_view to_string(ErrorCode code)
{
    switch (code) {
    case ErrorCode::ConfigInvalid: return "config_invalid";
    case ErrorCode::StepTooLarge: return "step_too_large";
    case ErrorCode::AlignmentMismatch: return "alignment_mismatch";
    case ErrorCode::RunFailed: return "run_failed";
    case ErrorCode::SchemaMismatch: return "schema_mismatch";
    case ErrorCode::TooFewRows: return "too_few_rows";
    case ErrorCode::UnknownColumn: return "unknown_column";
    case ErrorCode::DegenerateColumn: return "degenerate_column";
    case ErrorCode::EmptySplit: return "empty_split";
    case ErrorCode::SingularSystem: return "singular_system";
    case ErrorCode::NonConvergence: return "non_convergence";
    case ErrorCode::KTooLarge: return "k_too_large";
    case ErrorCode::FitFailed: return "fit_failed";
    case ErrorCode::MissingFile: return "missing_file";
    case ErrorCode::ParseError: return "parse_error";
    }
    return "unknown";
}

}  // namespace epibench
