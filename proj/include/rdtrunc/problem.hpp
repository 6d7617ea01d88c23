// Problem container: minimize a CMI objective over the joint pmfs that match
// required marginals, satisfy Markov chains, and sit inside a distortion ball.

#ifndef RDTRUNC_PROBLEM_HPP
#define RDTRUNC_PROBLEM_HPP

#include <optional>
#include <string>

#include "rdtrunc/constraints.hpp"
#include "rdtrunc/exec.hpp"
#include "rdtrunc/objective.hpp"

namespace rdtrunc {

struct ProblemSpec {
  AlphabetLayout layout;
  ObjectiveSpec objective;
  ConstraintSystem constraints;
  ExtendedDistortionVector distortion;
  double budget;

  ProblemSpec(AlphabetLayout layout_, ObjectiveSpec objective_, ConstraintSystem constraints_,
              ExtendedDistortionVector distortion_, double budget_);
};

enum class SolveStatus {
  optimal_certified,  // value is exact up to tolerance (closed form / certified bracket)
  locally_optimal,    // best of the restarts; feasible within acceptance tolerances
  infeasible,         // the constraint set is empty at this budget
};

const char* status_name(SolveStatus s);

struct SolveDiagnostics {
  int iterations = 0;
  int restarts_used = 0;
  double max_constraint_residual = 0.0;
  // Present when a grid oracle certified the value: upper - lower of the bracket.
  std::optional<double> oracle_gap;
};

struct SolveResult {
  SolveStatus status;
  double value = 0.0;
  std::optional<JointPmf> argmin;
  SolveDiagnostics diag;

  bool feasible() const { return status != SolveStatus::infeasible; }
};

struct SolveOptions {
  uint64_t seed = 1;
  int restarts = 32;
  ExecPolicy policy = ExecPolicy::serial;
  // Acceptance ceilings for a candidate argmin after polish.
  double marginal_tol = 1e-9;
  double markov_tol = 1e-6;
  double distortion_tol = 1e-8;
  // Convergence of the value between penalty stages / iterate steps.
  double value_tol = 1e-6;
  int max_iterations = 4000;
  // Full-layout mass vectors tried verbatim as the first restarts.
  std::vector<std::vector<double>> warm_starts;
};

}  // namespace rdtrunc

#endif  // RDTRUNC_PROBLEM_HPP
