#ifndef HELMSWEEP_TYPES_HPP_
#define HELMSWEEP_TYPES_HPP_

#include <array>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace helmsweep {

using Int = std::int64_t;
using Complex = std::complex<double>;
using Point = std::array<double, 3>;

// Raised when an argument lies outside the mathematical domain of an
// operation (points outside the box, out-of-range indices, negative depths).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Raised for inconsistent or invalid configuration.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Raised when an object is used in the wrong lifecycle state.
class StateError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Raised when vector or matrix dimensions disagree.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Raised when an unpivoted factorization meets an exactly-zero pivot.
class SingularFrontError : public std::runtime_error {
 public:
  SingularFrontError(Int supernode, const std::string& what)
      : std::runtime_error(what), supernode_(supernode) {}
  Int Supernode() const { return supernode_; }

 private:
  Int supernode_;
};

// Real floating-point operation tally. A complex multiply-add counts as 8.
struct FlopCount {
  double value = 0;
  void AddComplexMultiplyAdds(double count) { value += 8 * count; }
  void AddComplexDivides(double count) { value += 11 * count; }
};

}  // namespace helmsweep

#endif  // HELMSWEEP_TYPES_HPP_
