#pragma once

#include <stdexcept>
#include <string>

namespace flmgof {

/// Broad failure class, used by the CLI to pick an exit code.
enum class ErrorKind {
  dimension,      // mismatched grids or lengths
  insufficient,   // too few observations
  config,         // infeasible parameters
  numeric,        // non-finite values, failed factorizations
  parse,          // malformed input files
  rank,           // data-driven basis larger than the data rank
  singular,       // rank-deficient design or Gram matrix
  selection,      // no feasible candidate dimension
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

inline void require(bool ok, ErrorKind kind, const std::string& what) {
  if (!ok) fail(kind, what);
}

}  // namespace flmgof
