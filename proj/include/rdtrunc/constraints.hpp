// Feasible-set machinery: fixed-marginal equalities, Markov-chain
// constraints verified through conditional-MI residuals, expected-distortion
// balls, and support restriction for distortion vectors with infinite cells.

#ifndef RDTRUNC_CONSTRAINTS_HPP
#define RDTRUNC_CONSTRAINTS_HPP

#include <string>
#include <vector>

#include "rdtrunc/pmf.hpp"

namespace rdtrunc {

// Requires marginalize(p, target) to equal a fixed pmf.
struct ConsistencySpec {
  FactorSet target;
  JointPmf required;  // over exactly the target factors

  ConsistencySpec(FactorSet target_, JointPmf required_);
};

// Chain A - B - C, i.e. I(A;C|B) = 0. B may be empty (plain independence).
struct MarkovChainSpec {
  FactorSet a, b, c;

  MarkovChainSpec(FactorSet a_, FactorSet b_, FactorSet c_);
  std::string str() const;
};

struct ConstraintSystem {
  AlphabetLayout layout;
  std::vector<ConsistencySpec> consistency;
  std::vector<MarkovChainSpec> markov;
  double marginal_tol = 1e-9;  // l-infinity
  double markov_tol = 1e-9;    // bits

  explicit ConstraintSystem(AlphabetLayout layout_) : layout(std::move(layout_)) {}

  void validate() const;
};

struct ConstraintResidual {
  std::string name;
  double residual;
  double tolerance;
  bool ok;
};

struct MembershipVerdict {
  bool feasible;
  double max_residual;  // over all constraints, in each constraint's own units
  std::vector<ConstraintResidual> residuals;
};

MembershipVerdict check_membership(const JointPmf& p, const ConstraintSystem& sys);

struct DistortionBall {
  ExtendedDistortionVector d;
  double budget;  // finite nonnegative D

  DistortionBall(ExtendedDistortionVector d_, double budget_);
};

struct BallVerdict {
  bool feasible;
  ExtendedReal slack;  // <p,d> - D; positive means infeasible
};

BallVerdict check_ball(const JointPmf& p, const DistortionBall& ball);

// Cells with finite cost, plus the finite costs on them. Any pmf supported
// on the mask has finite expected distortion equal to the masked inner
// product.
struct SupportRestriction {
  std::vector<uint8_t> mask;       // 1 = finite-cost cell
  std::vector<int32_t> kept_cells;
  std::vector<double> finite_cost;  // aligned with kept_cells
};

SupportRestriction restrict_support(const AlphabetLayout& layout,
                                    const ExtendedDistortionVector& d_inf);

}  // namespace rdtrunc

#endif  // RDTRUNC_CONSTRAINTS_HPP
