#include "rdtrunc/constraints.hpp"

#include <cmath>
#include <stdexcept>

namespace rdtrunc {

ConsistencySpec::ConsistencySpec(FactorSet target_, JointPmf required_)
    : target(target_), required(std::move(required_)) {
  if (target.empty()) throw std::invalid_argument("ConsistencySpec: empty target");
  if (!(required.layout().factors() == target))
    throw std::invalid_argument("ConsistencySpec: marginal layout must match target");
}

MarkovChainSpec::MarkovChainSpec(FactorSet a_, FactorSet b_, FactorSet c_)
    : a(a_), b(b_), c(c_) {
  if (a.empty() || c.empty())
    throw std::invalid_argument("MarkovChainSpec: endpoint sets must be nonempty");
  if (!a.disjoint_with(b) || !a.disjoint_with(c) || !b.disjoint_with(c))
    throw std::invalid_argument("MarkovChainSpec: sets must be pairwise disjoint");
}

std::string MarkovChainSpec::str() const {
  return a.str() + "-" + b.str() + "-" + c.str();
}

void ConstraintSystem::validate() const {
  for (const ConsistencySpec& s : consistency)
    if (!s.target.subset_of(layout.factors()))
      throw std::invalid_argument("ConstraintSystem: consistency target not in layout");
  for (const MarkovChainSpec& m : markov) {
    FactorSet all = m.a.united_with(m.b).united_with(m.c);
    if (!all.subset_of(layout.factors()))
      throw std::invalid_argument("ConstraintSystem: Markov factors not in layout");
  }
  if (!(marginal_tol > 0.0) || !(markov_tol > 0.0))
    throw std::invalid_argument("ConstraintSystem: tolerances must be positive");
}

MembershipVerdict check_membership(const JointPmf& p, const ConstraintSystem& sys) {
  if (p.layout() != sys.layout)
    throw std::invalid_argument("check_membership: layout mismatch");
  MembershipVerdict v;
  v.feasible = true;
  v.max_residual = 0.0;

  for (const ConsistencySpec& s : sys.consistency) {
    const JointPmf marg = marginalize(p, s.target);
    double linf = 0.0;
    for (size_t i = 0; i < marg.mass().size(); ++i)
      linf = std::max(linf, std::abs(marg.mass()[i] - s.required.mass()[i]));
    const bool ok = linf <= sys.marginal_tol;
    v.residuals.push_back({"marginal " + s.target.str(), linf, sys.marginal_tol, ok});
    v.feasible = v.feasible && ok;
    v.max_residual = std::max(v.max_residual, linf);
  }

  for (const MarkovChainSpec& m : sys.markov) {
    // Residual is I(A;C|B): zero exactly when the chain holds.
    const double mi = conditional_mutual_information(p, m.a, m.c, m.b);
    const bool ok = mi <= sys.markov_tol;
    v.residuals.push_back({"markov " + m.str(), mi, sys.markov_tol, ok});
    v.feasible = v.feasible && ok;
    v.max_residual = std::max(v.max_residual, mi);
  }
  return v;
}

DistortionBall::DistortionBall(ExtendedDistortionVector d_, double budget_)
    : d(std::move(d_)), budget(budget_) {
  if (!(budget >= 0.0) || !std::isfinite(budget))
    throw std::invalid_argument("D must be a finite nonnegative real");
}

BallVerdict check_ball(const JointPmf& p, const DistortionBall& ball) {
  const ExtendedReal ed = expected_distortion(p, ball.d);
  return BallVerdict{ed <= ball.budget, ed - ball.budget};
}

SupportRestriction restrict_support(const AlphabetLayout& layout,
                                    const ExtendedDistortionVector& d_inf) {
  if (layout != d_inf.layout())
    throw std::invalid_argument("restrict_support: layout mismatch");
  SupportRestriction r;
  r.mask.assign(layout.cell_count(), 0);
  for (int i = 0; i < layout.cell_count(); ++i) {
    if (d_inf.cost()[i].is_finite()) {
      r.mask[i] = 1;
      r.kept_cells.push_back(i);
      r.finite_cost.push_back(d_inf.cost()[i].finite_value());
    }
  }
  // The distortion vector invariant already guarantees a finite entry.
  return r;
}

}  // namespace rdtrunc
