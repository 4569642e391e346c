#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace causal_al {

/// Broad failure class; maps onto CLI exit codes.
enum class ErrorCategory { io, config, data, numeric };

/// Specific failure conditions raised by the library.
enum class ErrorKind {
  missing_file,
  missing_column,
  duplicate_row_id,
  empty_table,
  bad_format,
  degenerate_feature,
  column_mismatch,
  empty_split,
  degenerate_component,
  insufficient_data,
  not_acyclic,
  unknown_node,
  unknown_row,
  out_of_range,
  node_mismatch,
  degenerate_target,
  no_causal_lever,
  width_mismatch,
  invalid_argument,
};

std::string_view to_string(ErrorKind kind);
ErrorCategory category_of(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }
  ErrorCategory category() const noexcept { return category_of(kind_); }

 private:
  ErrorKind kind_;
};

}  // namespace causal_al
