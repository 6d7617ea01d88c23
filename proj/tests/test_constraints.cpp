#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>
#include <vector>

#include "rdtrunc/constraints.hpp"
#include "test_support.hpp"

using namespace rdtrunc;
using testsupport::random_joint;
using testsupport::random_simplex;

namespace {

// p(x) * p(u|x) * p(y|x): U - X - Y holds by construction.
JointPmf markov_uxy(std::mt19937_64& rng, int nx, int nu, int ny) {
  AlphabetLayout layout =
      AlphabetLayout::make({{Factor::X, nx}, {Factor::Y, ny}, {Factor::U, nu}});
  std::vector<double> px = random_simplex(rng, nx);
  std::vector<std::vector<double>> pu_x, py_x;
  for (int x = 0; x < nx; ++x) {
    pu_x.push_back(random_simplex(rng, nu));
    py_x.push_back(random_simplex(rng, ny));
  }
  std::vector<double> mass(static_cast<size_t>(layout.cell_count()));
  for (int x = 0; x < nx; ++x)
    for (int y = 0; y < ny; ++y)
      for (int u = 0; u < nu; ++u)
        mass[static_cast<size_t>(layout.index({x, y, u, 0}))] = px[x] * pu_x[x][u] * py_x[x][y];
  return JointPmf(layout, mass);
}

}  // namespace

TEST_CASE("membership accepts pmfs that satisfy marginal and chain constraints") {
  std::mt19937_64 rng(101);
  JointPmf p = markov_uxy(rng, 2, 3, 2);

  ConstraintSystem sys{p.layout()};
  sys.consistency.emplace_back(FactorSet{Factor::X}, marginalize(p, {Factor::X}));
  sys.markov.emplace_back(FactorSet{Factor::U}, FactorSet{Factor::X}, FactorSet{Factor::Y});
  sys.validate();

  MembershipVerdict v = check_membership(p, sys);
  CHECK(v.feasible);
  CHECK(v.max_residual < 1e-12);
  REQUIRE(v.residuals.size() == 2);
  for (const ConstraintResidual& r : v.residuals) CHECK(r.ok);
}

TEST_CASE("membership flags marginal mismatch with the l-infinity residual") {
  AlphabetLayout layout = AlphabetLayout::make({{Factor::X, 2}, {Factor::Y, 2}});
  JointPmf p(layout, {0.3, 0.2, 0.25, 0.25});

  AlphabetLayout lx = layout.marginal_layout({Factor::X});
  ConstraintSystem sys{layout};
  sys.consistency.emplace_back(FactorSet{Factor::X}, JointPmf(lx, {0.6, 0.4}));

  // Actual X marginal is (0.5, 0.5), so the gap is exactly 0.1.
  MembershipVerdict v = check_membership(p, sys);
  CHECK_FALSE(v.feasible);
  CHECK(v.max_residual == doctest::Approx(0.1).epsilon(1e-12));
}

TEST_CASE("membership flags broken markov chains") {
  // X = Y = U forces I(U;Y|X) = 0, but I(U;Y) = 1 bit, so the chain
  // U - (empty) - Y (independence) fails loudly.
  AlphabetLayout layout =
      AlphabetLayout::make({{Factor::X, 2}, {Factor::Y, 2}, {Factor::U, 2}});
  std::vector<double> mass(8, 0.0);
  mass[static_cast<size_t>(layout.index({0, 0, 0, 0}))] = 0.5;
  mass[static_cast<size_t>(layout.index({1, 1, 1, 0}))] = 0.5;
  JointPmf p(layout, mass);

  ConstraintSystem chained{layout};
  chained.markov.emplace_back(FactorSet{Factor::U}, FactorSet{Factor::X}, FactorSet{Factor::Y});
  CHECK(check_membership(p, chained).feasible);

  ConstraintSystem independent{layout};
  independent.markov.emplace_back(FactorSet{Factor::U}, FactorSet{}, FactorSet{Factor::Y});
  MembershipVerdict v = check_membership(p, independent);
  CHECK_FALSE(v.feasible);
  CHECK(v.max_residual == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("distortion ball verdicts carry extended-real slack") {
  AlphabetLayout layout = AlphabetLayout::make({{Factor::X, 2}, {Factor::Xhat, 2}});
  ExtendedDistortionVector d(layout, {ExtendedReal::finite(0.0), ExtendedReal::finite(1.0),
                                      ExtendedReal::infinity(), ExtendedReal::finite(0.0)});
  DistortionBall ball(d, 0.25);

  JointPmf inside(layout, {0.5, 0.2, 0.0, 0.3});  // <p,d> = 0.2
  BallVerdict in = check_ball(inside, ball);
  CHECK(in.feasible);
  CHECK(in.slack.finite_value() == doctest::Approx(-0.05).epsilon(1e-12));

  JointPmf outside(layout, {0.4, 0.3, 0.0, 0.3});  // <p,d> = 0.3
  BallVerdict out = check_ball(outside, ball);
  CHECK_FALSE(out.feasible);
  CHECK(out.slack.finite_value() == doctest::Approx(0.05).epsilon(1e-12));

  JointPmf poisoned(layout, {0.4, 0.2, 0.1, 0.3});  // mass on the infinite cell
  BallVerdict inf = check_ball(poisoned, ball);
  CHECK_FALSE(inf.feasible);
  CHECK(inf.slack.is_infinite());
}

TEST_CASE("ball budgets must be finite nonnegative reals") {
  AlphabetLayout layout = AlphabetLayout::make({{Factor::X, 2}, {Factor::Xhat, 2}});
  ExtendedDistortionVector d(layout, std::vector<ExtendedReal>(4, ExtendedReal::finite(1.0)));
  CHECK_THROWS_WITH_AS(DistortionBall(d, -0.1), "D must be a finite nonnegative real",
                       std::invalid_argument);
  CHECK_THROWS_WITH_AS(DistortionBall(d, std::nan("")), "D must be a finite nonnegative real",
                       std::invalid_argument);
  CHECK_THROWS_WITH_AS(DistortionBall(d, std::numeric_limits<double>::infinity()),
                       "D must be a finite nonnegative real", std::invalid_argument);
  CHECK_NOTHROW(DistortionBall(d, 0.0));
}

TEST_CASE("support restriction keeps exactly the finite-cost cells") {
  AlphabetLayout layout = AlphabetLayout::make({{Factor::X, 2}, {Factor::Xhat, 3}});
  // Erasure-style column: hat = 2 always allowed at cost 1, mismatches barred.
  std::vector<ExtendedReal> cost(6);
  for (int x = 0; x < 2; ++x)
    for (int h = 0; h < 3; ++h) {
      ExtendedReal c = h == 2             ? ExtendedReal::finite(1.0)
                       : h == x           ? ExtendedReal::finite(0.0)
                                          : ExtendedReal::infinity();
      cost[static_cast<size_t>(layout.index({x, 0, 0, h}))] = c;
    }
  ExtendedDistortionVector d(layout, cost);

  SupportRestriction r = restrict_support(layout, d);
  REQUIRE(r.mask.size() == 6);
  CHECK(r.kept_cells.size() == 4);
  int finite_seen = 0;
  for (size_t i = 0; i < r.mask.size(); ++i) {
    CHECK(static_cast<bool>(r.mask[i]) == d.cost()[i].is_finite());
    finite_seen += r.mask[i];
  }
  CHECK(finite_seen == 4);
  for (size_t j = 0; j < r.kept_cells.size(); ++j) {
    CHECK(r.finite_cost[j] == d.cost()[static_cast<size_t>(r.kept_cells[j])].finite_value());
  }
}

TEST_CASE("random joints stay feasible for their own marginals") {
  std::mt19937_64 rng(71);
  AlphabetLayout layout =
      AlphabetLayout::make({{Factor::X, 3}, {Factor::Y, 2}, {Factor::Xhat, 2}});
  for (int trial = 0; trial < 25; ++trial) {
    JointPmf p = random_joint(rng, layout);
    ConstraintSystem sys{layout};
    sys.consistency.emplace_back(FactorSet{Factor::X, Factor::Y},
                                 marginalize(p, {Factor::X, Factor::Y}));
    MembershipVerdict v = check_membership(p, sys);
    CHECK(v.feasible);
    CHECK(v.max_residual < 1e-12);
  }
}
