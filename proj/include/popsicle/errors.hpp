#pragma once

#include <stdexcept>
#include <string>

namespace popsicle {

// Thrown when an enumeration or construction would exceed a configured budget.
// `detail` names the offending quantity (e.g. the cut-count product).
class BudgetExceededError : public std::runtime_error {
 public:
  explicit BudgetExceededError(const std::string& what) : std::runtime_error(what) {}
};

// Parameter/grid violations: off-grid values, missing grid points, bad config.
class GridError : public std::invalid_argument {
 public:
  explicit GridError(const std::string& what) : std::invalid_argument(what) {}
};

// Structural violations: malformed trees, cut/tree mismatches, bad profiles.
class StructureError : public std::invalid_argument {
 public:
  explicit StructureError(const std::string& what) : std::invalid_argument(what) {}
};

// Contract/serialization parse failure with source position.
class ParseError : public std::runtime_error {
 public:
  ParseError(int line, int column, const std::string& message)
      : std::runtime_error("line " + std::to_string(line) + ", column " +
                           std::to_string(column) + ": " + message),
        line_(line),
        column_(column) {}
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

}  // namespace popsicle
