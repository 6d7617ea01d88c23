// Distortion truncation: clamp a (possibly infinite-valued) distortion at a
// growing ladder of caps and track the optimal value at each level.  The
// truncated values climb monotonically to the untruncated limit, and the cap
// bounds the argmin mass left on originally-infinite cells.

#ifndef RDTRUNC_TRUNCATION_HPP
#define RDTRUNC_TRUNCATION_HPP

#include <vector>

#include "rdtrunc/penalty_solver.hpp"

namespace rdtrunc {

// Strictly increasing ladder of finite positive caps.
class TruncationSchedule {
 public:
  explicit TruncationSchedule(std::vector<double> caps);

  // Caps 2^1, 2^2, ..., 2^levels.
  static TruncationSchedule geometric(int levels);

  const std::vector<double>& caps() const { return caps_; }

 private:
  std::vector<double> caps_;
};

// Componentwise min(d, cap); the result carries no infinite entries.
ExtendedDistortionVector make_truncated(const ExtendedDistortionVector& d, double cap);

struct ConvergenceEntry {
  int level = 0;  // 1-based position in the schedule
  double cap = 0.0;
  double psi = 0.0;
  SolveStatus status = SolveStatus::locally_optimal;
  double gap = 0.0;            // psi_limit - psi
  double residual = 0.0;       // max constraint residual at the argmin
  double inf_cell_mass = 0.0;  // argmin mass on originally infinite cells
  std::vector<double> argmin;  // raw mass, empty when the level is infeasible
};

struct ConvergenceReport {
  double budget = 0.0;
  std::vector<ConvergenceEntry> entries;
  double psi_limit = 0.0;
  SolveStatus limit_status = SolveStatus::locally_optimal;
  double limit_residual = 0.0;
  std::vector<double> limit_argmin;  // raw mass, empty if the solver kept none
  bool monotone = false;        // psi nondecreasing along the schedule
  int first_within_tol = -1;    // earliest level with gap <= tol, -1 if none
};

// Solves the problem at every cap of the schedule (warm-starting each level
// from the previous argmin), then at the untruncated distortion.  Throws
// NumericalViolation if a truncated value overshoots the limit by more than
// 1e-6 or the ladder of values decreases by more than 1e-6.
ConvergenceReport converge_sweep(const ProblemSpec& problem,
                                 const TruncationSchedule& schedule,
                                 const SolveOptions& options = {},
                                 double tol = 1e-3);

}  // namespace rdtrunc

#endif  // RDTRUNC_TRUNCATION_HPP
