// Scenario builders and the side-information solver, including the agreement
// check between the deterministic-decoder parameterization and the generic
// conditional-MI encoding of the same problem.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "rdtrunc/penalty_solver.hpp"
#include "rdtrunc/scenarios.hpp"
#include "rdtrunc/wyner_ziv.hpp"
#include "test_support.hpp"

using namespace rdtrunc;

TEST_CASE("doubly-symmetric source tables come out exactly") {
  const auto perfect = build_dsbs(0.0);
  CHECK(perfect.mass() == std::vector<double>{0.5, 0.0, 0.0, 0.5});

  const auto independent = build_dsbs(0.5);
  CHECK(independent.mass() == std::vector<double>{0.25, 0.25, 0.25, 0.25});

  const auto q = build_dsbs(0.25);
  CHECK(q.mass() == std::vector<double>{0.375, 0.125, 0.125, 0.375});

  for (double p : {0.1, 0.3, 0.47}) {
    const auto s = build_dsbs(p);
    CHECK(s.mass()[1] == s.mass()[2]);  // symmetric
    CHECK(std::abs(s.mass()[0] + s.mass()[1] - 0.5) <= 1e-15);  // uniform X
    CHECK(std::abs(s.mass()[0] + s.mass()[2] - 0.5) <= 1e-15);  // uniform Y
  }

  CHECK_THROWS_AS(build_dsbs(-0.01), std::invalid_argument);
  CHECK_THROWS_AS(build_dsbs(0.51), std::invalid_argument);
}

TEST_CASE("erasure distortion has the match/erase/forbid structure") {
  const auto d = build_erasure_distortion(2);
  REQUIRE(d.cost().size() == 6);
  CHECK(d.cost()[0] == ExtendedReal::finite(0.0));
  CHECK(d.cost()[1].is_infinite());
  CHECK(d.cost()[2] == ExtendedReal::finite(1.0));
  CHECK(d.cost()[3].is_infinite());
  CHECK(d.cost()[4] == ExtendedReal::finite(0.0));
  CHECK(d.cost()[5] == ExtendedReal::finite(1.0));

  for (int k = 2; k <= 5; ++k) {
    const auto dk = build_erasure_distortion(k);
    for (int x = 0; x < k; ++x) {
      int zeros = 0, ones = 0, infs = 0;
      for (int h = 0; h <= k; ++h) {
        const ExtendedReal& c = dk.cost()[static_cast<size_t>(x) * (k + 1) + h];
        if (c.is_infinite()) ++infs;
        else if (c.finite_value() == 0.0) ++zeros;
        else if (c.finite_value() == 1.0) ++ones;
      }
      CHECK(zeros == 1);
      CHECK(ones == 1);
      CHECK(infs == k - 1);
    }
  }
  CHECK_THROWS_AS(build_erasure_distortion(1), std::invalid_argument);
}

TEST_CASE("hamming distortion is the 0/1 mismatch table") {
  const auto d = build_hamming_distortion(3);
  for (int x = 0; x < 3; ++x)
    for (int h = 0; h < 3; ++h)
      CHECK(d.cost()[static_cast<size_t>(x) * 3 + h] ==
            ExtendedReal::finite(x == h ? 0.0 : 1.0));
}

TEST_CASE("shannon scenario reproduces the closed-form rate") {
  ScenarioConfig cfg;
  cfg.distortion_kind = DistortionKind::hamming;
  cfg.kind = ProblemKind::shannon;
  cfg.budgets = {0.1, 0.2};
  const auto built = build_problem(cfg);

  CHECK(built.problem.layout.factors() == FactorSet({Factor::X, Factor::Xhat}));
  CHECK(built.balls.size() == 2);
  CHECK(built.problem.budget == 0.1);

  const auto res = solve_auto(built.problem, {});
  CHECK(res.status == SolveStatus::optimal_certified);
  CHECK(res.value ==
        doctest::Approx(1.0 - testsupport::binary_entropy(0.1)).epsilon(1e-6));
}

TEST_CASE("side-information scenario assembles the headline configuration") {
  ScenarioConfig cfg;
  cfg.source_kind = SourceKind::dsbs;
  cfg.crossover = 0.25;
  cfg.distortion_kind = DistortionKind::erasure;
  cfg.kind = ProblemKind::wyner_ziv;
  cfg.budgets = {0.25};
  const auto built = build_problem(cfg);

  const auto& layout = built.problem.layout;
  CHECK(layout.size(Factor::X) == 2);
  CHECK(layout.size(Factor::Y) == 2);
  CHECK(layout.size(Factor::U) == 3);  // |X| + 1 by default
  CHECK(layout.size(Factor::Xhat) == 3);

  REQUIRE(built.problem.constraints.markov.size() == 2);
  CHECK(built.problem.objective.str() == "1*I(X;U|Y)");

  // The lifted distortion must not depend on U or Y.
  for (int cell = 0; cell < layout.cell_count(); ++cell) {
    auto c = layout.coords(cell);
    auto base = c;
    base[static_cast<int>(Factor::Y)] = 0;
    base[static_cast<int>(Factor::U)] = 0;
    CHECK(built.problem.distortion.cost()[static_cast<size_t>(cell)] ==
          built.problem.distortion.cost()[static_cast<size_t>(layout.index(base))]);
  }
}

TEST_CASE("conditioned source pmfs satisfy the built consistency spec") {
  ScenarioConfig cfg;
  cfg.source_kind = SourceKind::dsbs;
  cfg.crossover = 0.3;
  cfg.distortion_kind = DistortionKind::erasure;
  cfg.kind = ProblemKind::conditional;
  cfg.budgets = {0.4};
  const auto built = build_problem(cfg);
  const auto& layout = built.problem.layout;
  const auto pxy = build_dsbs(0.3);

  // Any reconstruction kernel q(xhat | x, y) extends the source consistently.
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> unif(0.1, 1.0);
  std::vector<double> mass(static_cast<size_t>(layout.cell_count()));
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y) {
      std::array<double, 3> q{unif(rng), unif(rng), unif(rng)};
      const double qs = q[0] + q[1] + q[2];
      for (int h = 0; h < 3; ++h)
        mass[static_cast<size_t>(layout.index({x, y, 0, h}))] =
            pxy.at({x, y, 0, 0}) * q[static_cast<size_t>(h)] / qs;
    }
  const auto verdict =
      check_membership(JointPmf(layout, mass), built.problem.constraints);
  CHECK(verdict.feasible);
}

TEST_CASE("generic scenario passes explicit objectives through") {
  ScenarioConfig cfg;
  cfg.source_kind = SourceKind::dsbs;
  cfg.crossover = 0.25;
  cfg.distortion_kind = DistortionKind::hamming;
  cfg.kind = ProblemKind::generic;
  cfg.budgets = {0.3};
  SUBCASE("missing objective is rejected") {
    CHECK_THROWS_AS(build_problem(cfg), std::invalid_argument);
  }
  SUBCASE("a two-message sum-rate objective assembles and evaluates") {
    cfg.objective = ObjectiveSpec(
        {MITerm(1.0, {Factor::X}, {Factor::U}, {Factor::Y}),
         MITerm(1.0, {Factor::Y}, {Factor::Xhat}, {Factor::X, Factor::U})});
    cfg.chains.emplace_back(FactorSet{Factor::U}, FactorSet{Factor::X},
                            FactorSet{Factor::Y});
    cfg.chains.emplace_back(FactorSet{Factor::Y}, FactorSet{Factor::X, Factor::U},
                            FactorSet{Factor::Xhat});
    const auto built = build_problem(cfg);
    CHECK(built.problem.objective.terms.size() == 2);
    CHECK(built.problem.constraints.markov.size() == 2);
    CHECK(evaluate(built.problem.objective, JointPmf::uniform(built.problem.layout)) ==
          doctest::Approx(0.0).epsilon(1e-12));
  }
}

TEST_CASE("scenario validation rejects inconsistent combinations") {
  ScenarioConfig cfg;
  cfg.kind = ProblemKind::conditional;
  cfg.source_kind = SourceKind::table;
  cfg.nx = 2;
  cfg.ny = 1;
  cfg.source_table = {0.6, 0.4};
  cfg.budgets = {0.2};
  CHECK_THROWS_AS(build_problem(cfg), std::invalid_argument);

  cfg.ny = 2;
  cfg.source_table = {0.3, 0.3, 0.2};  // wrong size
  CHECK_THROWS_AS(build_problem(cfg), std::invalid_argument);

  cfg.source_table = {0.3, 0.3, 0.2, 0.2};
  cfg.budgets = {};
  CHECK_THROWS_AS(build_problem(cfg), std::invalid_argument);
}

namespace {

// Joint over {X,Y,U,Xhat} induced by a channel p(u|x) and a decoder xhat(u,y)
// on a given source: the deterministic-decoder solution as a generic point.
JointPmf induced_joint(const AlphabetLayout& layout, const JointPmf& pxy,
                       const std::vector<double>& channel,
                       const std::vector<int>& decoder, int nu, int ny) {
  std::vector<double> mass(static_cast<size_t>(layout.cell_count()), 0.0);
  for (int x = 0; x < layout.size(Factor::X); ++x)
    for (int y = 0; y < ny; ++y)
      for (int u = 0; u < nu; ++u) {
        const int h = decoder[static_cast<size_t>(u) * ny + y];
        mass[static_cast<size_t>(layout.index({x, y, u, h}))] +=
            pxy.at({x, y, 0, 0}) * channel[static_cast<size_t>(x) * nu + u];
      }
  return JointPmf(layout, mass);
}

}  // namespace

TEST_CASE("side-information solver with useless side info matches the closed form") {
  // X uniform, Y independent of X: the side information cannot help, so the
  // optimal rate is the point-to-point 1 - h(D).
  const std::vector<double> pxy{0.25, 0.25, 0.25, 0.25};
  const auto ham = build_hamming_distortion(2);

  for (double D : {0.1, 0.25}) {
    const auto res = wyner_ziv(pxy, 2, 2, ham.cost(), 2, D);
    REQUIRE(res.feasible());
    CHECK(res.distortion <= D + 1e-8);
    CHECK(res.rate_bits ==
          doctest::Approx(1.0 - testsupport::binary_entropy(D)).epsilon(2e-3));
  }

  // At D = 1/2 a constant channel plus a blind decoder already suffices.
  const auto zero = wyner_ziv(pxy, 2, 2, ham.cost(), 2, 0.5);
  CHECK(zero.rate_bits <= 1e-6);
}

TEST_CASE("side-information solver respects the distortion floor") {
  const std::vector<double> pxy{0.25, 0.25, 0.25, 0.25};
  auto layout = AlphabetLayout::make({{Factor::X, 2}, {Factor::Xhat, 2}});
  ExtendedDistortionVector d(layout, {ExtendedReal::finite(0.2), ExtendedReal::infinity(),
                                      ExtendedReal::infinity(), ExtendedReal::finite(0.4)});
  const auto below = wyner_ziv(pxy, 2, 2, d.cost(), 2, 0.1);  // floor is 0.3
  CHECK(below.status == SolveStatus::infeasible);
  CHECK(!below.feasible());

  const auto at = wyner_ziv(pxy, 2, 2, d.cost(), 2, 0.3);
  REQUIRE(at.feasible());
  CHECK(at.distortion <= 0.3 + 1e-8);
}

TEST_CASE("correlated side information lowers the rate") {
  const auto pxy = build_dsbs(0.25);
  const auto ham = build_hamming_distortion(2);
  const double D = 0.1;

  const auto res = wyner_ziv(pxy.mass(), 2, 2, ham.cost(), 2, D);
  REQUIRE(res.feasible());
  CHECK(res.distortion <= D + 1e-8);
  // Strictly better than ignoring Y, never better than coding X - Y directly.
  CHECK(res.rate_bits < 1.0 - testsupport::binary_entropy(D) - 0.05);
  const double conditional_floor = testsupport::binary_entropy(0.25) -
                                   testsupport::binary_entropy(D);
  CHECK(res.rate_bits >= conditional_floor - 2e-3);
}

TEST_CASE("deterministic-decoder and generic encodings of side information agree") {
  ScenarioConfig cfg;
  cfg.source_kind = SourceKind::dsbs;
  cfg.crossover = 0.25;
  cfg.distortion_kind = DistortionKind::hamming;
  cfg.kind = ProblemKind::wyner_ziv;
  cfg.u_card = 3;
  cfg.budgets = {0.1};
  const auto built = build_problem(cfg);

  const auto pxy = build_dsbs(0.25);
  const auto ham = build_hamming_distortion(2);
  WzOptions wopts;
  wopts.u_card = 3;
  const auto wz = wyner_ziv(pxy.mass(), 2, 2, ham.cost(), 2, 0.1, wopts);
  REQUIRE(wz.feasible());

  // Seed the generic solver with the induced joint of the channel/decoder
  // pair; it must confirm the value but may not improve on it materially.
  const auto seed =
      induced_joint(built.problem.layout, pxy, wz.channel, wz.decoder, 3, 2);
  CHECK(check_membership(seed, built.problem.constraints).feasible);

  SolveOptions options;
  options.restarts = 8;
  options.warm_starts = {seed.mass()};
  const auto generic = solve_auto(built.problem, options);
  REQUIRE(generic.feasible());
  CHECK(generic.value <= wz.rate_bits + 1e-6);
  CHECK(generic.value >= wz.rate_bits - 2e-3);
}

TEST_CASE("side-information solver is deterministic across policies") {
  const auto pxy = build_dsbs(0.3);
  const auto ham = build_hamming_distortion(2);
  WzOptions serial;
  serial.seed = 11;
  WzOptions parallel = serial;
  parallel.policy = ExecPolicy::parallel;

  const auto a = wyner_ziv(pxy.mass(), 2, 2, ham.cost(), 2, 0.15, serial);
  const auto b = wyner_ziv(pxy.mass(), 2, 2, ham.cost(), 2, 0.15, serial);
  const auto c = wyner_ziv(pxy.mass(), 2, 2, ham.cost(), 2, 0.15, parallel);
  CHECK(a.rate_bits == b.rate_bits);
  CHECK(a.channel == b.channel);
  CHECK(a.rate_bits == c.rate_bits);
  CHECK(a.channel == c.channel);
  CHECK(a.decoder == c.decoder);
}
