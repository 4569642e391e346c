#include "causal_al/error.hpp"

namespace causal_al {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::missing_file: return "MissingFile";
    case ErrorKind::missing_column: return "MissingColumn";
    case ErrorKind::duplicate_row_id: return "DuplicateRowId";
    case ErrorKind::empty_table: return "EmptyTable";
    case ErrorKind::bad_format: return "BadFormat";
    case ErrorKind::degenerate_feature: return "DegenerateFeature";
    case ErrorKind::column_mismatch: return "ColumnMismatch";
    case ErrorKind::empty_split: return "EmptySplit";
    case ErrorKind::degenerate_component: return "DegenerateComponent";
    case ErrorKind::insufficient_data: return "InsufficientData";
    case ErrorKind::not_acyclic: return "NotAcyclic";
    case ErrorKind::unknown_node: return "UnknownNode";
    case ErrorKind::unknown_row: return "UnknownRow";
    case ErrorKind::out_of_range: return "OutOfRange";
    case ErrorKind::node_mismatch: return "NodeMismatch";
    case ErrorKind::degenerate_target: return "DegenerateTarget";
    case ErrorKind::no_causal_lever: return "NoCausalLever";
    case ErrorKind::width_mismatch: return "WidthMismatch";
    case ErrorKind::invalid_argument: return "InvalidArgument";
  }
  return "Unknown";
}

ErrorCategory category_of(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::missing_file:
      return ErrorCategory::io;
    case ErrorKind::invalid_argument:
    case ErrorKind::out_of_range:
      return ErrorCategory::config;
    case ErrorKind::degenerate_component:
    case ErrorKind::no_causal_lever:
    case ErrorKind::degenerate_target:
      return ErrorCategory::numeric;
    default:
      return ErrorCategory::data;
  }
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

}  // namespace causal_al
