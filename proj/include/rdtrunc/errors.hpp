#ifndef RDTRUNC_ERRORS_HPP
#define RDTRUNC_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace rdtrunc {

// The constraint set itself is empty (e.g. a distortion budget no pmf in the
// consistency class can meet).  Distinct from a config mistake, which is
// std::invalid_argument, and from a solver giving up, which is a status.
class InfeasibleProblem : public std::runtime_error {
 public:
  explicit InfeasibleProblem(const std::string& what) : std::runtime_error(what) {}
};

// An internal numeric invariant failed: a certified bound was crossed, a
// monotone sequence decreased, a residual exceeded its ceiling after polish.
class NumericalViolation : public std::runtime_error {
 public:
  explicit NumericalViolation(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace rdtrunc

#endif  // RDTRUNC_ERRORS_HPP
