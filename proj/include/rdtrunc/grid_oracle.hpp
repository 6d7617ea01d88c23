// Exhaustive grid bracketing of small problems: enumerate every pmf whose
// cells are multiples of 1/m (respecting a fixed marginal when there is one),
// keep the best feasible objective value, and widen it into a two-sided
// bracket with a crude continuity modulus.  This is the certification tool
// the iterative solvers are tested against, so it favors transparency over
// speed: no pruning, no local search, just enumeration.
//
// Parallel enumeration is chunked at fixed boundaries and folded in index
// order, so the bracket is bit-identical however many threads run it.

#ifndef RDTRUNC_GRID_ORACLE_HPP
#define RDTRUNC_GRID_ORACLE_HPP

#include "rdtrunc/problem.hpp"

namespace rdtrunc {

struct OracleOptions {
  int resolution = 64;  // grid denominator m
  ExecPolicy policy = ExecPolicy::serial;
  long long max_points = 200'000'000;  // refuse larger enumerations
};

struct OracleBracket {
  bool found = false;      // at least one feasible grid point
  double upper = 0.0;      // best feasible grid value
  double lower = 0.0;      // upper - modulus * (cells / m)
  double modulus = 0.0;    // heuristic objective modulus used for the widening
  long long feasible_points = 0;
  long long total_points = 0;
  std::vector<double> best_point;  // mass over the full layout
};

// Supports problems with at most one consistency constraint and no Markov
// chains. With a consistency constraint present, grid points satisfy the
// required marginal exactly by construction.
OracleBracket oracle_bracket(const ProblemSpec& problem, const OracleOptions& opts);

}  // namespace rdtrunc

#endif  // RDTRUNC_GRID_ORACLE_HPP
