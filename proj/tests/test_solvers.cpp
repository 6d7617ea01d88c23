#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>
#include <vector>

#include "rdtrunc/blahut_arimoto.hpp"
#include "test_support.hpp"

using namespace rdtrunc;
using testsupport::binary_entropy;
using testsupport::random_simplex;

namespace {

std::vector<uint8_t> all_usable(int nx, int nhat) {
  return std::vector<uint8_t>(static_cast<size_t>(nx * nhat), 1);
}

double joint_sum(const std::vector<double>& j) {
  double s = 0.0;
  for (double v : j) s += v;
  return s;
}

double joint_cost(const std::vector<double>& j, const std::vector<double>& cost) {
  double s = 0.0;
  for (size_t i = 0; i < j.size(); ++i) s += j[i] * cost[i];
  return s;
}

}  // namespace

TEST_CASE("binary hamming rate-distortion matches the closed form") {
  // Uniform source: R(D) = 1 - h(D) on [0, 1/2].
  const std::vector<double> px{0.5, 0.5};
  const std::vector<double> cost{0.0, 1.0, 1.0, 0.0};
  const std::vector<uint8_t> usable = all_usable(2, 2);

  for (double D : {0.05, 0.1, 0.2, 0.3, 0.45}) {
    RdResult res = blahut_arimoto_rd(px, cost, usable, 2, 2, D);
    REQUIRE(res.status == SolveStatus::optimal_certified);
    CHECK(res.rate_bits == doctest::Approx(1.0 - binary_entropy(D)).epsilon(1e-6));
    CHECK(joint_sum(res.joint) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(joint_cost(res.joint, cost) <= D + 1e-9);
  }
}

TEST_CASE("skewed binary sources follow h(p) - h(D)") {
  for (double p : {0.3, 0.15}) {
    const std::vector<double> px{1.0 - p, p};
    const std::vector<double> cost{0.0, 1.0, 1.0, 0.0};
    for (double D : {0.05, 0.1}) {
      RdResult res = blahut_arimoto_rd(px, cost, all_usable(2, 2), 2, 2, D);
      REQUIRE(res.status == SolveStatus::optimal_certified);
      CHECK(res.rate_bits == doctest::Approx(binary_entropy(p) - binary_entropy(D)).epsilon(1e-6));
    }
  }
}

TEST_CASE("rate hits zero exactly once a constant reconstruction fits the budget") {
  const std::vector<double> px{0.5, 0.5};
  const std::vector<double> cost{0.0, 1.0, 1.0, 0.0};
  for (double D : {0.5, 0.6, 1.0}) {
    RdResult res = blahut_arimoto_rd(px, cost, all_usable(2, 2), 2, 2, D);
    REQUIRE(res.status == SolveStatus::optimal_certified);
    CHECK(res.rate_bits == 0.0);
    CHECK(joint_cost(res.joint, cost) <= D + 1e-12);
  }
}

TEST_CASE("erasure mask reproduces the straight-line curve") {
  // Reconstructions {0, 1, e}: matches cost 0, erasure cost 1, mismatches
  // barred. The curve is the segment from (0, 1 bit) to (1, 0 bits).
  const std::vector<double> px{0.5, 0.5};
  const std::vector<double> cost{0.0, 0.0, 1.0, 0.0, 0.0, 1.0};
  const std::vector<uint8_t> usable{1, 0, 1, 0, 1, 1};

  RdResult at0 = blahut_arimoto_rd(px, cost, usable, 2, 3, 0.0);
  REQUIRE(at0.status == SolveStatus::optimal_certified);
  CHECK(at0.rate_bits == 1.0);  // identity channel, exactly one bit

  RdResult at1 = blahut_arimoto_rd(px, cost, usable, 2, 3, 1.0);
  REQUIRE(at1.status == SolveStatus::optimal_certified);
  CHECK(at1.rate_bits == 0.0);

  for (double D : {0.25, 0.5, 0.75}) {
    RdResult res = blahut_arimoto_rd(px, cost, usable, 2, 3, D);
    REQUIRE(res.status == SolveStatus::optimal_certified);
    CHECK(res.rate_bits == doctest::Approx(1.0 - D).epsilon(1e-6));
    CHECK(joint_cost(res.joint, cost) <= D + 1e-9);
    CHECK(joint_sum(res.joint) == doctest::Approx(1.0).epsilon(1e-12));
    // Mass never leaks onto barred cells.
    for (size_t i = 0; i < res.joint.size(); ++i) {
      if (!usable[i]) CHECK(res.joint[i] == 0.0);
    }
  }
}

TEST_CASE("budgets below the floor are infeasible") {
  const std::vector<double> px{0.5, 0.5};
  // Cheapest row costs are 0.2 and 0.4, so the floor is 0.3.
  const std::vector<double> cost{0.2, 0.7, 0.9, 0.4};
  RdResult res = blahut_arimoto_rd(px, cost, all_usable(2, 2), 2, 2, 0.25);
  CHECK(res.status == SolveStatus::infeasible);
  CHECK_FALSE(res.feasible());

  RdResult at_floor = blahut_arimoto_rd(px, cost, all_usable(2, 2), 2, 2, 0.3);
  REQUIRE(at_floor.status == SolveStatus::optimal_certified);
  CHECK(joint_cost(at_floor.joint, cost) == doctest::Approx(0.3).epsilon(1e-12));
}

TEST_CASE("a source letter with every reconstruction barred is infeasible") {
  const std::vector<double> px{0.5, 0.5};
  const std::vector<double> cost{0.0, 1.0, 1.0, 0.0};
  const std::vector<uint8_t> usable{1, 1, 0, 0};
  RdResult res = blahut_arimoto_rd(px, cost, usable, 2, 2, 0.9);
  CHECK(res.status == SolveStatus::infeasible);
}

TEST_CASE("the curve is nonincreasing in the budget") {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 10; ++trial) {
    const int nx = 3, nhat = 3;
    std::vector<double> px = random_simplex(rng, nx);
    std::vector<double> cost(static_cast<size_t>(nx * nhat));
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (double& c : cost) c = unif(rng);

    double prev_rate = std::numeric_limits<double>::infinity();
    for (double D : {0.1, 0.2, 0.3, 0.5, 0.8}) {
      RdResult res = blahut_arimoto_rd(px, cost, all_usable(nx, nhat), nx, nhat, D);
      if (res.status == SolveStatus::infeasible) continue;
      CHECK(res.rate_bits <= prev_rate + 1e-8);
      CHECK(res.rate_bits >= 0.0);
      CHECK(res.rate_bits <= std::log2(static_cast<double>(nx)) + 1e-9);
      prev_rate = res.rate_bits;
    }
  }
}

// ---------------------------------------------------------------------------
// Generic penalty solver and the grid oracle.

#include "rdtrunc/grid_oracle.hpp"
#include "rdtrunc/penalty_solver.hpp"
#include "rdtrunc/errors.hpp"

namespace {

// Classical rate-distortion instance as a full problem spec.
ProblemSpec shannon_problem(const std::vector<double>& px,
                            const std::vector<std::vector<ExtendedReal>>& d, double D) {
  const int nx = static_cast<int>(px.size());
  const int nhat = static_cast<int>(d.front().size());
  AlphabetLayout layout = AlphabetLayout::make({{Factor::X, nx}, {Factor::Xhat, nhat}});
  std::vector<ExtendedReal> cost(static_cast<size_t>(nx * nhat));
  for (int x = 0; x < nx; ++x)
    for (int h = 0; h < nhat; ++h) cost[static_cast<size_t>(x * nhat + h)] = d[x][h];

  AlphabetLayout lx = layout.marginal_layout({Factor::X});
  ConstraintSystem sys{layout};
  sys.consistency.emplace_back(FactorSet{Factor::X}, JointPmf(lx, px));
  return ProblemSpec(layout, ObjectiveSpec({MITerm(1.0, {Factor::X}, {Factor::Xhat})}),
                     std::move(sys), ExtendedDistortionVector(layout, std::move(cost)), D);
}

ExtendedReal fin(double v) { return ExtendedReal::finite(v); }

}  // namespace

TEST_CASE("penalty solver reaches the closed-form binary curve") {
  ProblemSpec problem = shannon_problem({0.5, 0.5},
                                        {{fin(0.0), fin(1.0)}, {fin(1.0), fin(0.0)}}, 0.1);
  SolveOptions opts;
  opts.seed = 3;
  opts.restarts = 16;
  SolveResult res = solve_psi(problem, opts);
  REQUIRE(res.status == SolveStatus::locally_optimal);
  CHECK(res.value == doctest::Approx(1.0 - binary_entropy(0.1)).epsilon(1e-4));
  REQUIRE(res.argmin.has_value());
  CHECK(res.diag.max_constraint_residual <= 1e-6);

  // The polished argmin is a genuine member of the constraint set.
  ConstraintSystem sys{problem.layout};
  sys.consistency = problem.constraints.consistency;
  CHECK(check_membership(*res.argmin, sys).feasible);
  CHECK(check_ball(*res.argmin, DistortionBall(problem.distortion, problem.budget)).feasible);
}

TEST_CASE("solver values land inside oracle brackets") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int trial = 0; trial < 6; ++trial) {
    std::vector<double> px = random_simplex(rng, 2);
    std::vector<std::vector<ExtendedReal>> d(2, std::vector<ExtendedReal>(2));
    double dmax = 0.0, dmin_row = 0.0;
    for (int x = 0; x < 2; ++x) {
      double rowmin = 1e9;
      for (int h = 0; h < 2; ++h) {
        double c = unif(rng);
        d[x][h] = fin(c);
        dmax = std::max(dmax, c);
        rowmin = std::min(rowmin, c);
      }
      dmin_row += px[static_cast<size_t>(x)] * rowmin;
    }
    const double D = dmin_row + (0.2 + 0.6 * unif(rng)) * (dmax - dmin_row);

    ProblemSpec problem = shannon_problem(px, d, D);
    SolveOptions sopts;
    sopts.seed = 11 + trial;
    sopts.restarts = 16;
    SolveResult res = solve_psi(problem, sopts);
    REQUIRE(res.feasible());

    OracleOptions gopts;
    gopts.resolution = 64;
    OracleBracket bracket = oracle_bracket(problem, gopts);
    REQUIRE(bracket.found);
    CHECK(res.value >= bracket.lower - 1e-9);
    CHECK(res.value <= bracket.upper + 1e-9);
  }
}

TEST_CASE("oracle brackets tighten when the grid is refined") {
  ProblemSpec problem = shannon_problem({0.4, 0.6},
                                        {{fin(0.1), fin(0.8)}, {fin(0.9), fin(0.2)}}, 0.4);
  OracleOptions coarse, fine;
  coarse.resolution = 32;
  fine.resolution = 64;
  OracleBracket b32 = oracle_bracket(problem, coarse);
  OracleBracket b64 = oracle_bracket(problem, fine);
  REQUIRE(b32.found);
  REQUIRE(b64.found);
  CHECK(b64.upper <= b32.upper + 1e-12);  // the coarse grid nests in the fine one
  CHECK(b64.upper - b64.lower == doctest::Approx(0.5 * (b32.upper - b32.lower)).epsilon(1e-12));
}

TEST_CASE("markov chain constraints bind") {
  // Independence X - () - Xhat forces I(X;Xhat) = 0; for the uniform source
  // with Hamming cost every product joint costs exactly 1/2.
  AlphabetLayout layout = AlphabetLayout::make({{Factor::X, 2}, {Factor::Xhat, 2}});
  AlphabetLayout lx = layout.marginal_layout({Factor::X});
  auto build = [&](double D) {
    ConstraintSystem sys{layout};
    sys.consistency.emplace_back(FactorSet{Factor::X}, JointPmf(lx, {0.5, 0.5}));
    sys.markov.emplace_back(FactorSet{Factor::X}, FactorSet{}, FactorSet{Factor::Xhat});
    std::vector<ExtendedReal> cost{fin(0.0), fin(1.0), fin(1.0), fin(0.0)};
    return ProblemSpec(layout, ObjectiveSpec({MITerm(1.0, {Factor::X}, {Factor::Xhat})}),
                       std::move(sys), ExtendedDistortionVector(layout, std::move(cost)), D);
  };

  SolveOptions opts;
  opts.seed = 5;
  opts.restarts = 8;
  SolveResult res = solve_psi(build(0.6), opts);
  REQUIRE(res.status == SolveStatus::locally_optimal);
  CHECK(res.value <= 1e-5);
  CHECK(res.diag.max_constraint_residual <= 1e-6);

  // Below cost 1/2 no independent joint fits the ball: the solver must not
  // fake feasibility.
  CHECK_THROWS_AS(solve_psi(build(0.4), opts), NumericalViolation);
}

TEST_CASE("limit solver confines mass to the finite support") {
  AlphabetLayout layout = AlphabetLayout::make({{Factor::X, 2}, {Factor::Xhat, 3}});
  AlphabetLayout lx = layout.marginal_layout({Factor::X});
  std::vector<ExtendedReal> cost(6);
  for (int x = 0; x < 2; ++x)
    for (int h = 0; h < 3; ++h)
      cost[static_cast<size_t>(x * 3 + h)] = h == 2   ? fin(1.0)
                                             : h == x ? fin(0.0)
                                                      : ExtendedReal::infinity();
  ConstraintSystem sys{layout};
  sys.consistency.emplace_back(FactorSet{Factor::X}, JointPmf(lx, {0.5, 0.5}));
  ProblemSpec problem(layout, ObjectiveSpec({MITerm(1.0, {Factor::X}, {Factor::Xhat})}),
                      std::move(sys), ExtendedDistortionVector(layout, cost), 0.25);

  SolveOptions opts;
  opts.seed = 9;
  opts.restarts = 16;
  SolveResult res = solve_psi_limit(problem, opts);
  REQUIRE(res.status == SolveStatus::locally_optimal);
  CHECK(res.value == doctest::Approx(0.75).epsilon(2e-4));
  REQUIRE(res.argmin.has_value());
  for (int x = 0; x < 2; ++x)
    for (int h = 0; h < 2; ++h)
      if (h != x) CHECK(res.argmin->mass()[static_cast<size_t>(x * 3 + h)] == 0.0);

  CHECK_THROWS_AS(solve_psi(problem, opts), std::invalid_argument);
}

TEST_CASE("solve_auto certifies classical shapes and delegates the rest") {
  ProblemSpec classical = shannon_problem({0.5, 0.5},
                                          {{fin(0.0), fin(1.0)}, {fin(1.0), fin(0.0)}}, 0.2);
  CHECK(ba_dispatchable(classical));
  SolveOptions opts;
  SolveResult res = solve_auto(classical, opts);
  CHECK(res.status == SolveStatus::optimal_certified);
  CHECK(res.value == doctest::Approx(1.0 - binary_entropy(0.2)).epsilon(1e-6));

  ProblemSpec below = shannon_problem({0.5, 0.5},
                                      {{fin(0.2), fin(0.7)}, {fin(0.9), fin(0.4)}}, 0.1);
  CHECK(solve_auto(below, opts).status == SolveStatus::infeasible);
  CHECK(solve_psi(below, opts).status == SolveStatus::infeasible);
}

TEST_CASE("same seed gives bit-identical solver runs") {
  ProblemSpec problem = shannon_problem({0.3, 0.7},
                                        {{fin(0.0), fin(1.0)}, {fin(1.0), fin(0.0)}}, 0.15);
  SolveOptions serial;
  serial.seed = 42;
  serial.restarts = 8;
  SolveOptions parallel = serial;
  parallel.policy = ExecPolicy::parallel;

  SolveResult a = solve_psi(problem, serial);
  SolveResult b = solve_psi(problem, serial);
  SolveResult c = solve_psi(problem, parallel);
  CHECK(a.value == b.value);
  CHECK(a.value == c.value);
  CHECK(a.argmin->mass() == b.argmin->mass());
  CHECK(a.argmin->mass() == c.argmin->mass());
}

// ---------------------------------------------------------------------------
// Side-information shapes: dedicated dispatch and factored descent.

#include "rdtrunc/wyner_ziv.hpp"

namespace {

// DSBS(q) with the canonical encoder/decoder chains over (X, Y, U, X̂) and a
// Hamming cost read off (x, x̂) alone.
ProblemSpec side_info_problem(double q, int u_card, std::vector<MITerm> terms, double D) {
  AlphabetLayout layout = AlphabetLayout::make(
      {{Factor::X, 2}, {Factor::Y, 2}, {Factor::U, u_card}, {Factor::Xhat, 2}});
  std::vector<ExtendedReal> cost(static_cast<size_t>(layout.cell_count()));
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y)
      for (int u = 0; u < u_card; ++u)
        for (int xh = 0; xh < 2; ++xh)
          cost[static_cast<size_t>(layout.index({x, y, u, xh}))] = fin(x == xh ? 0.0 : 1.0);
  const std::vector<double> pxy{0.5 * (1.0 - q), 0.5 * q, 0.5 * q, 0.5 * (1.0 - q)};
  AlphabetLayout lxy = layout.marginal_layout({Factor::X, Factor::Y});
  ConstraintSystem sys{layout};
  sys.consistency.emplace_back(FactorSet({Factor::X, Factor::Y}), JointPmf(lxy, pxy));
  sys.markov.emplace_back(FactorSet{Factor::U}, FactorSet{Factor::X}, FactorSet{Factor::Y});
  sys.markov.emplace_back(FactorSet{Factor::X}, FactorSet({Factor::Y, Factor::U}),
                          FactorSet{Factor::Xhat});
  return ProblemSpec(layout, ObjectiveSpec(std::move(terms)), std::move(sys),
                     ExtendedDistortionVector(layout, std::move(cost)), D);
}

MITerm rate_term() { return MITerm(1.0, {Factor::X}, {Factor::U}, {Factor::Y}); }

MITerm reply_term() {
  return MITerm(1.0, {Factor::Y}, {Factor::Xhat}, {Factor::X, Factor::U});
}

}  // namespace

TEST_CASE("independent engines agree on the side-information shape") {
  ProblemSpec wz = side_info_problem(0.25, 3, {rate_term()}, 0.1);
  CHECK(wz_dispatchable(wz));
  ProblemSpec two = side_info_problem(0.25, 3, {rate_term(), reply_term()}, 0.25);
  CHECK_FALSE(wz_dispatchable(two));  // two terms: not the dedicated shape

  SolveOptions opts;
  opts.seed = 7;
  opts.restarts = 24;
  SolveResult dedicated = solve_auto(wz, opts);  // channel/decoder engine
  SolveResult factored = solve_psi(wz, opts);    // descent in (q, r) rows
  REQUIRE(dedicated.feasible());
  REQUIRE(factored.feasible());
  CHECK(std::abs(dedicated.value - factored.value) <= 2e-3);
  CHECK(dedicated.diag.max_constraint_residual <= 1e-6);
  CHECK(factored.diag.max_constraint_residual <= 1e-6);
}

TEST_CASE("factored descent solves the two-message sum-rate shape") {
  const double q = 0.25, D = 0.25;
  ProblemSpec two = side_info_problem(q, 3, {rate_term(), reply_term()}, D);
  SolveOptions opts;
  opts.seed = 1;
  opts.restarts = 16;
  SolveResult res = solve_psi(two, opts);
  REQUIRE(res.status == SolveStatus::locally_optimal);
  CHECK(res.diag.max_constraint_residual <= 1e-6);
  REQUIRE(res.argmin.has_value());
  CHECK(check_membership(*res.argmin, two.constraints).feasible);
  CHECK(check_ball(*res.argmin, DistortionBall(two.distortion, D)).feasible);

  // Dropping the nonnegative reply term leaves the one-message minimum over
  // the same feasible set, so that rate bounds the sum-rate from below.
  const std::vector<ExtendedReal> base{fin(0.0), fin(1.0), fin(1.0), fin(0.0)};
  WzOptions wo;
  wo.u_card = 3;
  wo.seed = 1;
  const WzResult one =
      wyner_ziv({0.5 * (1.0 - q), 0.5 * q, 0.5 * q, 0.5 * (1.0 - q)}, 2, 2, base, 2, D, wo);
  REQUIRE(one.feasible());
  CHECK(res.value >= one.rate_bits - 1e-6);
  // Echoing the side information (X̂ = Y, constant U) is feasible at this
  // budget and costs H(Y|X) = h(q), so the optimum can be no worse.
  CHECK(res.value <= binary_entropy(q) + 1e-9);
}

TEST_CASE("factored descent is deterministic and honors warm seeds") {
  ProblemSpec two = side_info_problem(0.25, 3, {rate_term(), reply_term()}, 0.25);
  SolveOptions serial;
  serial.seed = 42;
  serial.restarts = 8;
  SolveOptions parallel = serial;
  parallel.policy = ExecPolicy::parallel;
  SolveResult a = solve_psi(two, serial);
  SolveResult b = solve_psi(two, parallel);
  CHECK(a.value == b.value);
  CHECK(a.argmin->mass() == b.argmin->mass());

  // A warm-started resolve may improve on its seed but never lands above it.
  SolveOptions warm = serial;
  warm.restarts = 1;
  warm.warm_starts.push_back(a.argmin->mass());
  SolveResult c = solve_psi(two, warm);
  REQUIRE(c.feasible());
  CHECK(c.value <= a.value + 1e-12);

  SolveOptions bad = warm;
  bad.warm_starts.front().pop_back();
  CHECK_THROWS_AS(solve_psi(two, bad), std::invalid_argument);
}
