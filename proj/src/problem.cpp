#include "rdtrunc/problem.hpp"

#include <stdexcept>

namespace rdtrunc {

ProblemSpec::ProblemSpec(AlphabetLayout layout_, ObjectiveSpec objective_,
                         ConstraintSystem constraints_, ExtendedDistortionVector distortion_,
                         double budget_)
    : layout(std::move(layout_)),
      objective(std::move(objective_)),
      constraints(std::move(constraints_)),
      distortion(std::move(distortion_)),
      budget(budget_) {
  if (!(constraints.layout == layout)) {
    throw std::invalid_argument("ProblemSpec: constraint system built for a different layout");
  }
  if (distortion.layout() != layout) {
    throw std::invalid_argument("ProblemSpec: distortion vector built for a different layout");
  }
  if (!std::isfinite(budget) || budget < 0.0) {
    throw std::invalid_argument("D must be a finite nonnegative real");
  }
  for (const MITerm& t : objective.terms) {
    if (!t.a.subset_of(layout.factors()) || !t.b.subset_of(layout.factors()) ||
        !t.c.subset_of(layout.factors())) {
      throw std::invalid_argument("ProblemSpec: objective term " + t.str() +
                                  " references factors absent from the layout");
    }
  }
}

const char* status_name(SolveStatus s) {
  switch (s) {
    case SolveStatus::optimal_certified:
      return "optimal_certified";
    case SolveStatus::locally_optimal:
      return "locally_optimal";
    case SolveStatus::infeasible:
      return "infeasible";
  }
  return "unknown";
}

}  // namespace rdtrunc
