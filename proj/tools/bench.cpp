// Serial vs parallel timing on the two heavy kernels: exhaustive grid
// bracketing and multi-restart penalty solves.  Both kernels fold candidates
// in deterministic order, so the parallel run must reproduce the serial
// result bit for bit — the benchmark fails loudly if it does not.

#include <chrono>
#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "rdtrunc/grid_oracle.hpp"
#include "rdtrunc/penalty_solver.hpp"
#include "rdtrunc/scenarios.hpp"
#include "rdtrunc/truncation.hpp"

using namespace rdtrunc;

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

ProblemSpec truncated_erasure(ProblemKind kind, double cap) {
  ScenarioConfig cfg;
  cfg.source_kind = SourceKind::dsbs;
  cfg.crossover = 0.25;
  cfg.distortion_kind = DistortionKind::erasure;
  cfg.kind = kind;
  cfg.budgets = {0.25};
  const BuiltScenario built = build_problem(cfg);
  return ProblemSpec(built.problem.layout, built.problem.objective,
                     built.problem.constraints,
                     make_truncated(built.problem.distortion, cap), 0.25);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"serial vs parallel kernel comparison"};
  int resolution = 64;
  int restarts = 48;
  app.add_option("--resolution", resolution, "oracle grid denominator");
  app.add_option("--restarts", restarts, "penalty solver restarts");
  CLI11_PARSE(app, argc, argv);

  std::printf("%-22s %12s %12s %9s %7s\n", "kernel", "serial_s", "parallel_s",
              "speedup", "match");
  bool all_match = true;

  {
    const ProblemSpec problem = truncated_erasure(ProblemKind::shannon, 4.0);
    OracleOptions opts;
    opts.resolution = resolution;
    opts.policy = ExecPolicy::serial;
    auto t0 = std::chrono::steady_clock::now();
    const OracleBracket serial = oracle_bracket(problem, opts);
    const double ts = seconds_since(t0);
    opts.policy = ExecPolicy::parallel;
    t0 = std::chrono::steady_clock::now();
    const OracleBracket parallel = oracle_bracket(problem, opts);
    const double tp = seconds_since(t0);
    const bool match = serial.upper == parallel.upper && serial.lower == parallel.lower &&
                       serial.best_point == parallel.best_point;
    all_match = all_match && match;
    std::printf("%-22s %12.3f %12.3f %8.2fx %7s\n", "grid_oracle", ts, tp, ts / tp,
                match ? "yes" : "NO");
  }

  {
    const ProblemSpec problem = truncated_erasure(ProblemKind::conditional, 8.0);
    SolveOptions opts;
    opts.restarts = restarts;
    opts.policy = ExecPolicy::serial;
    auto t0 = std::chrono::steady_clock::now();
    const SolveResult serial = solve_psi(problem, opts);
    const double ts = seconds_since(t0);
    opts.policy = ExecPolicy::parallel;
    t0 = std::chrono::steady_clock::now();
    const SolveResult parallel = solve_psi(problem, opts);
    const double tp = seconds_since(t0);
    const bool match = serial.value == parallel.value &&
                       serial.argmin.has_value() == parallel.argmin.has_value() &&
                       (!serial.argmin || serial.argmin->mass() == parallel.argmin->mass());
    all_match = all_match && match;
    std::printf("%-22s %12.3f %12.3f %8.2fx %7s\n", "penalty_solver", ts, tp, ts / tp,
                match ? "yes" : "NO");
  }

  if (!all_match) {
    std::fprintf(stderr, "parallel results diverged from serial\n");
    return 1;
  }
  return 0;
}
