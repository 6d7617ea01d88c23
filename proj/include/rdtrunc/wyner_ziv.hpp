// Rate-distortion with side information at the decoder: optimize the test
// channel p(u|x) while the decoder xhat(u, y) is rebuilt exactly (per-cell
// conditional-cost argmin) at every evaluation.  The rate is I(X;U) - I(Y;U)
// = I(X;U|Y) under the U - X - Y chain the construction enforces.

#ifndef RDTRUNC_WYNER_ZIV_HPP
#define RDTRUNC_WYNER_ZIV_HPP

#include <vector>

#include "rdtrunc/extended.hpp"
#include "rdtrunc/problem.hpp"

namespace rdtrunc {

struct WzOptions {
  int u_card = 0;  // auxiliary alphabet size; 0 means |X| + 1
  uint64_t seed = 1;
  int restarts = 24;  // local refinements: best grid seeds plus random starts
  ExecPolicy policy = ExecPolicy::serial;
  int refine_iterations = 500;
  int grid_denominator = 16;  // channel-row seeding grid, used when params <= 4
  double distortion_tol = 1e-8;
};

struct WzResult {
  SolveStatus status = SolveStatus::locally_optimal;
  double rate_bits = 0.0;
  double distortion = 0.0;
  std::vector<double> channel;  // p(u|x), row-major nx * nu
  std::vector<int> decoder;     // xhat chosen at (u, y), row-major nu * ny

  bool feasible() const { return status != SolveStatus::infeasible; }
};

// pxy: joint source/side-information pmf, row-major nx * ny.
// cost: distortion d(x, xhat), row-major nx * nhat, extended-real.
WzResult wyner_ziv(const std::vector<double>& pxy, int nx, int ny,
                   const std::vector<ExtendedReal>& cost, int nhat, double D,
                   const WzOptions& opts = {});

}  // namespace rdtrunc

#endif  // RDTRUNC_WYNER_ZIV_HPP
