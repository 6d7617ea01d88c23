// Scenario assembly.  Distortion tables live on {X, Xhat} and are lifted to
// the problem layout by coordinate projection, so they are constant in U and
// Y by construction.

#include "rdtrunc/scenarios.hpp"

#include <cmath>
#include <stdexcept>

namespace rdtrunc {
namespace {

JointPmf source_pmf(const ScenarioConfig& cfg) {
  if (cfg.source_kind == SourceKind::dsbs) return build_dsbs(cfg.crossover);
  if (cfg.nx < 1 || cfg.ny < 1)
    throw std::invalid_argument("table source needs positive dimensions");
  if (cfg.source_table.size() != static_cast<size_t>(cfg.nx) * cfg.ny)
    throw std::invalid_argument("source table size does not match nx * ny");
  auto layout = AlphabetLayout::make({{Factor::X, cfg.nx}, {Factor::Y, cfg.ny}});
  return JointPmf(layout, cfg.source_table);
}

ExtendedDistortionVector base_distortion(const ScenarioConfig& cfg, int nx) {
  switch (cfg.distortion_kind) {
    case DistortionKind::erasure:
      return build_erasure_distortion(nx);
    case DistortionKind::hamming:
      return build_hamming_distortion(nx);
    case DistortionKind::table: {
      if (cfg.distortion_table.empty() ||
          cfg.distortion_table.size() % static_cast<size_t>(nx) != 0)
        throw std::invalid_argument("distortion table size must be a multiple of nx");
      const int nhat = cfg.nhat > 0
                           ? cfg.nhat
                           : static_cast<int>(cfg.distortion_table.size()) / nx;
      if (cfg.distortion_table.size() != static_cast<size_t>(nx) * nhat)
        throw std::invalid_argument("distortion table size does not match nx * nhat");
      auto layout = AlphabetLayout::make({{Factor::X, nx}, {Factor::Xhat, nhat}});
      return ExtendedDistortionVector(layout, cfg.distortion_table);
    }
  }
  throw std::invalid_argument("unknown distortion kind");
}

ExtendedDistortionVector lift_distortion(const ExtendedDistortionVector& base,
                                         const AlphabetLayout& layout) {
  const AlphabetLayout& bl = base.layout();
  std::vector<ExtendedReal> cost;
  cost.reserve(static_cast<size_t>(layout.cell_count()));
  for (int cell = 0; cell < layout.cell_count(); ++cell) {
    const auto c = layout.coords(cell);
    const AlphabetLayout::Coords bc{c[static_cast<int>(Factor::X)], 0, 0,
                                    c[static_cast<int>(Factor::Xhat)]};
    cost.push_back(base.cost()[static_cast<size_t>(bl.index(bc))]);
  }
  return ExtendedDistortionVector(layout, std::move(cost));
}

}  // namespace

const char* problem_kind_name(ProblemKind k) {
  switch (k) {
    case ProblemKind::shannon: return "shannon";
    case ProblemKind::conditional: return "conditional";
    case ProblemKind::wyner_ziv: return "wyner-ziv";
    case ProblemKind::generic: return "generic";
  }
  return "?";
}

JointPmf build_dsbs(double crossover) {
  if (!(crossover >= 0.0) || !(crossover <= 0.5))
    throw std::invalid_argument("crossover must lie in [0, 1/2]");
  const double diag = 0.5 * (1.0 - crossover), off = 0.5 * crossover;
  auto layout = AlphabetLayout::make({{Factor::X, 2}, {Factor::Y, 2}});
  return JointPmf(layout, {diag, off, off, diag});
}

ExtendedDistortionVector build_erasure_distortion(int src_size) {
  if (src_size < 2) throw std::invalid_argument("source size must be at least 2");
  const int nhat = src_size + 1;
  auto layout = AlphabetLayout::make({{Factor::X, src_size}, {Factor::Xhat, nhat}});
  std::vector<ExtendedReal> cost(static_cast<size_t>(src_size) * nhat,
                                 ExtendedReal::infinity());
  for (int x = 0; x < src_size; ++x) {
    cost[static_cast<size_t>(x) * nhat + x] = ExtendedReal::finite(0.0);
    cost[static_cast<size_t>(x) * nhat + (nhat - 1)] = ExtendedReal::finite(1.0);
  }
  return ExtendedDistortionVector(layout, std::move(cost));
}

ExtendedDistortionVector build_hamming_distortion(int src_size) {
  if (src_size < 2) throw std::invalid_argument("source size must be at least 2");
  auto layout =
      AlphabetLayout::make({{Factor::X, src_size}, {Factor::Xhat, src_size}});
  std::vector<ExtendedReal> cost(static_cast<size_t>(src_size) * src_size,
                                 ExtendedReal::finite(1.0));
  for (int x = 0; x < src_size; ++x)
    cost[static_cast<size_t>(x) * src_size + x] = ExtendedReal::finite(0.0);
  return ExtendedDistortionVector(layout, std::move(cost));
}

BuiltScenario build_problem(const ScenarioConfig& cfg) {
  if (cfg.budgets.empty())
    throw std::invalid_argument("at least one distortion budget is required");

  const JointPmf pxy = source_pmf(cfg);
  const int nx = pxy.layout().size(Factor::X);
  const int ny = pxy.layout().size(Factor::Y);
  const ExtendedDistortionVector base = base_distortion(cfg, nx);
  const int nhat = base.layout().size(Factor::Xhat);
  const int nu = cfg.u_card > 0 ? cfg.u_card : nx + 1;

  const bool needs_y =
      cfg.kind == ProblemKind::conditional || cfg.kind == ProblemKind::wyner_ziv;
  if (needs_y && ny < 2)
    throw std::invalid_argument("this problem kind requires side information");

  AlphabetLayout layout = [&] {
    switch (cfg.kind) {
      case ProblemKind::shannon:
        return AlphabetLayout::make({{Factor::X, nx}, {Factor::Xhat, nhat}});
      case ProblemKind::conditional:
        return AlphabetLayout::make(
            {{Factor::X, nx}, {Factor::Y, ny}, {Factor::Xhat, nhat}});
      case ProblemKind::wyner_ziv:
      case ProblemKind::generic:
        return AlphabetLayout::make({{Factor::X, nx},
                                     {Factor::Y, ny},
                                     {Factor::U, nu},
                                     {Factor::Xhat, nhat}});
    }
    throw std::invalid_argument("unknown problem kind");
  }();

  ConstraintSystem constraints(layout);
  if (cfg.kind == ProblemKind::shannon) {
    constraints.consistency.emplace_back(FactorSet{Factor::X},
                                         marginalize(pxy, {Factor::X}));
  } else {
    constraints.consistency.emplace_back(FactorSet{Factor::X, Factor::Y}, pxy);
  }

  std::optional<ObjectiveSpec> objective;
  switch (cfg.kind) {
    case ProblemKind::shannon:
      objective = ObjectiveSpec({MITerm(1.0, {Factor::X}, {Factor::Xhat})});
      break;
    case ProblemKind::conditional:
      objective =
          ObjectiveSpec({MITerm(1.0, {Factor::X}, {Factor::Xhat}, {Factor::Y})});
      break;
    case ProblemKind::wyner_ziv:
      objective = ObjectiveSpec({MITerm(1.0, {Factor::X}, {Factor::U}, {Factor::Y})});
      // U - X - Y, then the decoder chain X - (U,Y) - Xhat.
      constraints.markov.emplace_back(FactorSet{Factor::U}, FactorSet{Factor::X},
                                      FactorSet{Factor::Y});
      constraints.markov.emplace_back(FactorSet{Factor::X},
                                      FactorSet{Factor::U, Factor::Y},
                                      FactorSet{Factor::Xhat});
      break;
    case ProblemKind::generic:
      if (!cfg.objective)
        throw std::invalid_argument("generic kind requires an explicit objective");
      objective = cfg.objective;
      for (const MarkovChainSpec& m : cfg.chains) constraints.markov.push_back(m);
      break;
  }

  ExtendedDistortionVector lifted = lift_distortion(base, layout);
  for (double d : cfg.budgets)
    if (!std::isfinite(d) || d < 0.0)
      throw std::invalid_argument("D must be a finite nonnegative real");

  BuiltScenario out{
      ProblemSpec(layout, *objective, constraints, lifted, cfg.budgets.front()),
      {},
      cfg.schedule};
  out.balls.reserve(cfg.budgets.size());
  for (double d : cfg.budgets) out.balls.emplace_back(lifted, d);
  return out;
}

}  // namespace rdtrunc
