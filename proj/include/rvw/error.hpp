#ifndef RVW_ERROR_HPP
#define RVW_ERROR_HPP

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace rvw {

enum class ErrorCode {
  domain_error,
  invalid_input,
  unknown_symbol,
  unknown_category,
  syntax_error,
  forward_reference,
  invalid_graph,
  no_real_root,
  invariant_violation,
  io_error,
};

inline std::string_view to_string(ErrorCode c) {
  switch (c) {
    case ErrorCode::domain_error: return "domain_error";
    case ErrorCode::invalid_input: return "invalid_input";
    case ErrorCode::unknown_symbol: return "unknown_symbol";
    case ErrorCode::unknown_category: return "unknown_category";
    case ErrorCode::syntax_error: return "syntax_error";
    case ErrorCode::forward_reference: return "forward_reference";
    case ErrorCode::invalid_graph: return "invalid_graph";
    case ErrorCode::no_real_root: return "no_real_root";
    case ErrorCode::invariant_violation: return "invariant_violation";
    case ErrorCode::io_error: return "io_error";
  }
  return "unknown";
}

/// Library-wide exception. `line`/`column` are 1-based and only meaningful
/// for errors raised while parsing a description (0 otherwise).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& msg, std::size_t line = 0,
        std::size_t column = 0)
      : std::runtime_error(format(code, msg, line, column)),
        code_(code),
        line_(line),
        column_(column) {}

  ErrorCode code() const noexcept { return code_; }
  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  static std::string format(ErrorCode code, const std::string& msg,
                            std::size_t line, std::size_t column) {
    std::string out(to_string(code));
    if (line > 0) {
      out += " at " + std::to_string(line) + ":" + std::to_string(column);
    }
    out += ": ";
    out += msg;
    return out;
  }

  ErrorCode code_;
  std::size_t line_;
  std::size_t column_;
};

}  // namespace rvw

#endif  // RVW_ERROR_HPP
