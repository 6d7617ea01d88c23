// Truncated-distortion ladders.  Caps only ever lower the cost vector, so
// each truncation enlarges the distortion ball: values are nondecreasing in
// the cap and bounded by the untruncated limit.  Both facts are enforced here
// rather than assumed.

#include "rdtrunc/truncation.hpp"

#include <cmath>
#include <stdexcept>

#include "rdtrunc/errors.hpp"

namespace rdtrunc {

TruncationSchedule::TruncationSchedule(std::vector<double> caps)
    : caps_(std::move(caps)) {
  if (caps_.empty())
    throw std::invalid_argument("truncation schedule must be nonempty");
  for (double c : caps_)
    if (!std::isfinite(c) || c <= 0.0)
      throw std::invalid_argument("caps must be positive finite reals");
  for (size_t i = 1; i < caps_.size(); ++i)
    if (!(caps_[i] > caps_[i - 1]))
      throw std::invalid_argument("caps must be strictly increasing");
}

TruncationSchedule TruncationSchedule::geometric(int levels) {
  if (levels < 1)
    throw std::invalid_argument("geometric schedule needs at least one level");
  std::vector<double> caps(static_cast<size_t>(levels));
  for (int j = 1; j <= levels; ++j) caps[j - 1] = std::ldexp(1.0, j);
  return TruncationSchedule(std::move(caps));
}

ExtendedDistortionVector make_truncated(const ExtendedDistortionVector& d, double cap) {
  if (!std::isfinite(cap) || cap <= 0.0)
    throw std::invalid_argument("cap must be a positive finite real");
  std::vector<ExtendedReal> cost;
  cost.reserve(d.cost().size());
  for (const ExtendedReal& c : d.cost()) {
    if (c.is_infinite())
      cost.push_back(ExtendedReal::finite(cap));
    else
      cost.push_back(ExtendedReal::finite(std::min(c.finite_value(), cap)));
  }
  return ExtendedDistortionVector(d.layout(), std::move(cost));
}

ConvergenceReport converge_sweep(const ProblemSpec& problem,
                                 const TruncationSchedule& schedule,
                                 const SolveOptions& options, double tol) {
  // The limit value is a fixed reference point, never an extrapolation; it is
  // computed first so every level can be checked against it immediately.
  const SolveResult limit = solve_auto(problem, options);
  if (!limit.feasible())
    throw InfeasibleProblem("the untruncated problem is infeasible at this budget");

  ConvergenceReport report;
  report.budget = problem.budget;
  report.psi_limit = limit.value;
  report.limit_status = limit.status;
  report.limit_residual = limit.diag.max_constraint_residual;
  if (limit.argmin) report.limit_argmin = limit.argmin->mass();
  report.monotone = true;
  report.entries.reserve(schedule.caps().size());

  // The limit argmin carries no mass on infinite-cost cells, so it is feasible
  // at every cap and achieves the limit value there: seeding each level with
  // it means a descent step can only land at or below psi_limit.  The previous
  // level's argmin is added as a second seed to track the ladder.
  SolveOptions level_options = options;
  if (limit.argmin) level_options.warm_starts = {limit.argmin->mass()};
  for (size_t i = 0; i < schedule.caps().size(); ++i) {
    const double cap = schedule.caps()[i];
    ProblemSpec truncated(problem.layout, problem.objective, problem.constraints,
                          make_truncated(problem.distortion, cap), problem.budget);
    const SolveResult res = solve_auto(truncated, level_options);
    if (!res.feasible())
      throw NumericalViolation(
          "a truncated level reported infeasible although the limit is feasible");
    if (res.value > report.psi_limit + 1e-6)
      throw NumericalViolation("a truncated value overshot the untruncated limit");

    ConvergenceEntry entry;
    entry.level = static_cast<int>(i) + 1;
    entry.cap = cap;
    entry.status = res.status;
    entry.psi = res.value;
    entry.gap = report.psi_limit - res.value;
    entry.residual = res.diag.max_constraint_residual;
    if (res.argmin) {
      entry.argmin = res.argmin->mass();
      for (int cell = 0; cell < problem.layout.cell_count(); ++cell)
        if (problem.distortion.cost()[static_cast<size_t>(cell)].is_infinite())
          entry.inf_cell_mass += entry.argmin[static_cast<size_t>(cell)];
      level_options.warm_starts.clear();
      if (limit.argmin) level_options.warm_starts.push_back(limit.argmin->mass());
      level_options.warm_starts.push_back(entry.argmin);
    }

    if (!report.entries.empty()) {
      const double prev = report.entries.back().psi;
      if (entry.psi < prev - 1e-6)
        throw NumericalViolation("truncated values decreased along the schedule");
      if (entry.psi < prev - 1e-7) report.monotone = false;
    }
    const double gap = entry.gap;
    report.entries.push_back(std::move(entry));
    if (gap <= tol) {
      report.first_within_tol = static_cast<int>(i) + 1;
      break;
    }
  }
  return report;
}

}  // namespace rdtrunc
