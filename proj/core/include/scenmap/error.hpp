#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace scenmap {

enum class ErrorKind {
  invalid_input,   // malformed model, schema or table
  out_of_range,    // a value or index outside its declared bounds
  duplicate,       // repeated id, label or key
  infeasible,      // no design satisfies the request
  degenerate,      // zero variance, undefined statistic
  rank_deficient,  // collinear regression design
  io,              // file could not be read or written
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Every failure raised by the library. `kind()` is stable and machine readable;
/// `what()` is meant for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace scenmap
