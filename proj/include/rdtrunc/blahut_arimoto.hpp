// Blahut-Arimoto for classical rate-distortion over finite alphabets, with a
// cell usability mask so support-restricted (limit) problems run through the
// same machinery.  The outer loop bisects the Lagrange slope to land on a
// target distortion; affine stretches of the curve, where the slope map
// jumps, are resolved exactly by time sharing the bracket endpoints.

#ifndef RDTRUNC_BLAHUT_ARIMOTO_HPP
#define RDTRUNC_BLAHUT_ARIMOTO_HPP

#include <cstdint>
#include <vector>

#include "rdtrunc/problem.hpp"

namespace rdtrunc {

struct BaOptions {
  double distortion_tol = 1e-8;  // outer target |<p,d> - D|
  double inner_tol = 1e-13;      // relative Lagrangian change, nats
  int max_inner_iterations = 20000;
  int max_bisection_iterations = 200;
};

// One point of the slope-parameterized curve.
struct BaPoint {
  double rate_bits = 0.0;
  double distortion = 0.0;
  std::vector<double> joint;  // p(x, xhat), row-major nx * nhat
  int iterations = 0;
};

// Alternating minimization at a fixed slope (nats per unit cost).  Weights
// are stabilized per source row, exp(-slope * (cost - rowmin)), so very steep
// slopes underflow toward the row minimizers instead of blowing up.
BaPoint blahut_arimoto_slope(const std::vector<double>& px, const std::vector<double>& cost,
                             const std::vector<uint8_t>& usable, int nx, int nhat, double slope,
                             const BaOptions& opts);

struct RdResult {
  SolveStatus status = SolveStatus::optimal_certified;
  double rate_bits = 0.0;
  std::vector<double> joint;  // achiever with <joint, cost> <= D
  int iterations = 0;

  bool feasible() const { return status != SolveStatus::infeasible; }
};

// min I(X;Xhat) over channels supported on usable cells with expected cost
// at most D.  Returns status infeasible when no channel reaches D.
RdResult blahut_arimoto_rd(const std::vector<double>& px, const std::vector<double>& cost,
                           const std::vector<uint8_t>& usable, int nx, int nhat, double D,
                           const BaOptions& opts = {});

}  // namespace rdtrunc

#endif  // RDTRUNC_BLAHUT_ARIMOTO_HPP
