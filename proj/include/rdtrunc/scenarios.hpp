// Canonical problem builders: doubly-symmetric binary sources, erasure and
// Hamming distortions, and assembled ProblemSpec instances for the classical
// shapes (point-to-point, conditional, side-information) plus a generic kind
// taking an explicit objective and chain list.

#ifndef RDTRUNC_SCENARIOS_HPP
#define RDTRUNC_SCENARIOS_HPP

#include <optional>
#include <vector>

#include "rdtrunc/problem.hpp"
#include "rdtrunc/truncation.hpp"

namespace rdtrunc {

enum class SourceKind { dsbs, table };
enum class DistortionKind { erasure, hamming, table };
enum class ProblemKind { shannon, conditional, wyner_ziv, generic };

const char* problem_kind_name(ProblemKind k);

struct ScenarioConfig {
  SourceKind source_kind = SourceKind::dsbs;
  double crossover = 0.25;           // dsbs
  int nx = 2, ny = 2;                // table source dimensions
  std::vector<double> source_table;  // row-major nx * ny when source_kind is table

  DistortionKind distortion_kind = DistortionKind::erasure;
  int nhat = 0;  // 0 derives the size: erasure nx + 1, hamming nx, table row length
  std::vector<ExtendedReal> distortion_table;  // row-major nx * nhat

  ProblemKind kind = ProblemKind::shannon;
  int u_card = 0;  // auxiliary alphabet for wyner_ziv/generic; 0 means nx + 1
  std::optional<ObjectiveSpec> objective;  // generic kind only
  std::vector<MarkovChainSpec> chains;     // generic kind only

  std::vector<double> budgets;  // nonempty D grid
  TruncationSchedule schedule = TruncationSchedule::geometric(10);
  SolveOptions solver;
  double tol = 1e-3;  // convergence-sweep gap target
};

// P(x,y) = (1-p)/2 on the diagonal, p/2 off it; over binary {X, Y}.
JointPmf build_dsbs(double crossover);

// d(x, xhat) = 0 on match, 1 on the erasure symbol (last reconstruction
// index), infinite otherwise; over {X, Xhat} with |Xhat| = src_size + 1.
ExtendedDistortionVector build_erasure_distortion(int src_size);

// 0/1 mismatch cost over {X, Xhat} with |Xhat| = src_size.
ExtendedDistortionVector build_hamming_distortion(int src_size);

struct BuiltScenario {
  ProblemSpec problem;  // budget set to the first grid value
  std::vector<DistortionBall> balls;  // one per grid value, lifted distortion
  TruncationSchedule schedule;
};

BuiltScenario build_problem(const ScenarioConfig& cfg);

}  // namespace rdtrunc

#endif  // RDTRUNC_SCENARIOS_HPP
