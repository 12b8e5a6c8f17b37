#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace dirmech {

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// An iterative evaluation did not reach its tolerance. Carries the last
/// iterate so callers can decide whether it is usable.
class NumericError : public std::runtime_error {
 public:
  NumericError(const std::string& what, double partial_value, int iterations)
      : std::runtime_error(what), partial_value_(partial_value), iterations_(iterations) {}

  double partial_value() const noexcept { return partial_value_; }
  int iterations() const noexcept { return iterations_; }

 private:
  double partial_value_;
  int iterations_;
};

/// Input instance rejected by a validator; `violations()` lists every problem found.
class ValidationError : public std::invalid_argument {
 public:
  explicit ValidationError(std::vector<std::string> violations)
      : std::invalid_argument(join(violations)), violations_(std::move(violations)) {}

  const std::vector<std::string>& violations() const noexcept { return violations_; }

 private:
  static std::string join(const std::vector<std::string>& v) {
    std::string out = "invalid instance";
    for (const auto& s : v) {
      out += "; ";
      out += s;
    }
    return out;
  }

  std::vector<std::string> violations_;
};

namespace detail {

inline void require_domain(bool ok, const char* what) {
  if (!ok) throw DomainError(what);
}

}  // namespace detail
}  // namespace dirmech
