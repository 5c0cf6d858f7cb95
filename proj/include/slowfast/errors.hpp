#ifndef SLOWFAST_ERRORS_HPP
#define SLOWFAST_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace slowfast {

// Stable error identifiers; the C API exposes the same numbering.
enum class ErrorCode : int {
  ok = 0,
  parse_error = 1,
  invalid_argument = 2,
  unbound_parameter = 3,
  newton_divergence = 4,
  singular_jacobian = 5,
  chart_invalid = 6,
  not_on_slow_manifold = 7,
  branch_invalid = 8,
  not_a_fold = 9,
  not_a_cusp = 10,
  classification_mismatch = 11,
  continuation_stall = 12,
  degenerate_coefficients = 13,
  pole_in_window = 14,
  mismatched_epsilon = 15,
  transversality_failure = 16,
  config_error = 17,
  io_error = 18,
  internal = 19,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Expression-level syntax error; offset is a 0-based byte position.
class ParseError : public Error {
 public:
  ParseError(std::size_t offset, const std::string& what)
      : Error(ErrorCode::parse_error, what), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

// Config-file error; line and column are 1-based.
class ConfigError : public Error {
 public:
  ConfigError(int line, int column, const std::string& what)
      : Error(ErrorCode::config_error, what), line_(line), column_(column) {}
  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  int line_;
  int column_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace slowfast

#endif
