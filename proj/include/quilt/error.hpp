/**
 * Error taxonomy shared by the whole library.
 *
 * Three failure classes map onto the CLI exit-code contract:
 *   io_parse     — bad input files, malformed options (exit 1)
 *   solver       — an exact linear system turned out inconsistent/singular (exit 2)
 *   verification — a residual that must vanish did not (exit 3)
 * Everything else (precondition violations, internal invariants) throws
 * std::logic_error and indicates a bug, not a user error.
 */
#pragma once

#include <stdexcept>
#include <string>

namespace quilt {

enum class ErrorKind { io_parse = 1, solver = 2, verification = 3 };

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& msg)
      : std::runtime_error(msg), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

private:
  ErrorKind kind_;
};

/// Parse error with a 1-based line/column position, for strict input files.
class ParseError : public Error {
public:
  ParseError(const std::string& file, int line, int col, const std::string& msg)
      : Error(ErrorKind::io_parse,
              file + ":" + std::to_string(line) + ":" + std::to_string(col) +
                  ": " + msg),
        line_(line), col_(col) {}
  int line() const { return line_; }
  int col() const { return col_; }

private:
  int line_;
  int col_;
};

}  // namespace quilt
