#include "rdtrunc/penalty_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include "rdtrunc/blahut_arimoto.hpp"
#include "rdtrunc/errors.hpp"
#include "rdtrunc/wyner_ziv.hpp"

namespace rdtrunc {

namespace {

constexpr double kLambdaStages[] = {1e0, 1e1, 1e2, 1e3, 1e4, 1e5, 1e6};
constexpr int kMaxStageIterations = 600;
constexpr double kStageValueTol = 1e-12;

// Euclidean projection of len entries at v onto { v >= 0, sum v = target }.
void project_row(double* v, int len, double target) {
  static thread_local std::vector<double> sorted;
  sorted.assign(v, v + len);
  std::sort(sorted.begin(), sorted.end(), std::greater<double>());
  double cum = 0.0;
  double theta = 0.0;
  for (int i = 0; i < len; ++i) {
    cum += sorted[static_cast<size_t>(i)];
    const double candidate = (cum - target) / static_cast<double>(i + 1);
    if (sorted[static_cast<size_t>(i)] - candidate > 0.0) theta = candidate;
  }
  for (int i = 0; i < len; ++i) v[i] = std::max(v[i] - theta, 0.0);
}

void project_simplex(std::vector<double>& v, double target) {
  project_row(v.data(), static_cast<int>(v.size()), target);
}

struct MarginalPlan {
  std::vector<int32_t> cell_of_slot;       // open slot -> marginal cell
  std::vector<double> required;            // marginal cell masses
  std::vector<std::vector<int>> slots_of;  // marginal cell -> open slots
};

// Everything fixed across restarts for one masked problem.
struct Prepared {
  const ProblemSpec* problem = nullptr;
  std::vector<int32_t> open;       // full-layout cells carrying mass
  std::vector<double> open_cost;   // finite costs on those cells
  std::vector<MarginalPlan> plans;
  double d_min = 0.0;              // distortion floor under the marginals alone
  std::vector<double> cheapest;    // marginal-consistent minimizer of <p,d>, on slots
};

Prepared prepare(const ProblemSpec& problem, const std::vector<uint8_t>& open_mask) {
  Prepared prep;
  prep.problem = &problem;
  const int k = problem.layout.cell_count();
  for (int i = 0; i < k; ++i) {
    if (!open_mask[static_cast<size_t>(i)]) continue;
    prep.open.push_back(i);
    prep.open_cost.push_back(problem.distortion.cost()[static_cast<size_t>(i)].finite_value());
  }
  if (prep.open.empty()) throw InfeasibleProblem("every cell has infinite cost");
  const int n = static_cast<int>(prep.open.size());

  for (const ConsistencySpec& spec : problem.constraints.consistency) {
    MarginalPlan plan;
    const AlphabetLayout sub = problem.layout.marginal_layout(spec.target);
    const std::vector<int32_t> onto = problem.layout.cell_map_onto(sub);
    plan.required = spec.required.mass();
    plan.cell_of_slot.resize(static_cast<size_t>(n));
    plan.slots_of.assign(plan.required.size(), {});
    for (int s = 0; s < n; ++s) {
      const int32_t cell = onto[static_cast<size_t>(prep.open[static_cast<size_t>(s)])];
      plan.cell_of_slot[static_cast<size_t>(s)] = cell;
      plan.slots_of[static_cast<size_t>(cell)].push_back(s);
    }
    prep.plans.push_back(std::move(plan));
  }

  // Distortion floor and its achiever, allocated along the first marginal's
  // fibers (or globally when the problem is unconstrained in that sense).
  prep.cheapest.assign(static_cast<size_t>(n), 0.0);
  if (prep.plans.empty()) {
    int best = 0;
    for (int s = 1; s < n; ++s)
      if (prep.open_cost[static_cast<size_t>(s)] < prep.open_cost[static_cast<size_t>(best)])
        best = s;
    prep.cheapest[static_cast<size_t>(best)] = 1.0;
    prep.d_min = prep.open_cost[static_cast<size_t>(best)];
  } else {
    const MarginalPlan& plan = prep.plans.front();
    for (size_t j = 0; j < plan.required.size(); ++j) {
      const double w = plan.required[j];
      if (w <= 0.0) continue;
      if (plan.slots_of[j].empty())
        return prep;  // flagged below through d_min = infinity
      int best = plan.slots_of[j].front();
      for (int s : plan.slots_of[j])
        if (prep.open_cost[static_cast<size_t>(s)] < prep.open_cost[static_cast<size_t>(best)])
          best = s;
      prep.cheapest[static_cast<size_t>(best)] += w;
      prep.d_min += w * prep.open_cost[static_cast<size_t>(best)];
    }
  }
  return prep;
}

// True when some required marginal cell has no open refinement: no pmf on the
// open support matches the marginal, whatever the budget.
bool marginal_unreachable(const Prepared& prep) {
  for (const MarginalPlan& plan : prep.plans)
    for (size_t j = 0; j < plan.required.size(); ++j)
      if (plan.required[j] > 0.0 && plan.slots_of[j].empty()) return true;
  return false;
}

// Per-restart evaluation engine; owns all scratch.
struct Engine {
  const Prepared& prep;
  CompiledObjective objective;
  std::vector<CmiEvaluator> chains;
  std::vector<double> full, fgrad;
  std::vector<std::vector<double>> marg_scratch;

  explicit Engine(const Prepared& p)
      : prep(p), objective(p.problem->objective, p.problem->layout) {
    for (const MarkovChainSpec& m : p.problem->constraints.markov)
      chains.emplace_back(p.problem->layout, m.a, m.c, m.b);  // residual I(A;C|B)
    full.assign(static_cast<size_t>(p.problem->layout.cell_count()), 0.0);
    fgrad.assign(full.size(), 0.0);
    for (const MarginalPlan& plan : p.plans)
      marg_scratch.emplace_back(plan.required.size(), 0.0);
  }

  void scatter(const std::vector<double>& x) {
    for (size_t s = 0; s < prep.open.size(); ++s)
      full[static_cast<size_t>(prep.open[s])] = x[s];
  }

  double objective_value(const std::vector<double>& x) {
    scatter(x);
    return objective.value(full);
  }

  void marginal_sums(const std::vector<double>& x) {
    for (size_t pi = 0; pi < prep.plans.size(); ++pi) {
      std::vector<double>& sums = marg_scratch[pi];
      std::fill(sums.begin(), sums.end(), 0.0);
      const MarginalPlan& plan = prep.plans[pi];
      for (size_t s = 0; s < x.size(); ++s)
        sums[static_cast<size_t>(plan.cell_of_slot[s])] += x[s];
    }
  }

  double expected_cost(const std::vector<double>& x) const {
    double ed = 0.0;
    for (size_t s = 0; s < x.size(); ++s) ed += x[s] * prep.open_cost[s];
    return ed;
  }

  double penalized(const std::vector<double>& x, double lambda) {
    return penalized(x, lambda, lambda);
  }

  // lambda_chain may exceed lambda: a seed that starts on the chain manifold
  // descends with the chain weight already final so it cannot drift off.
  double penalized(const std::vector<double>& x, double lambda, double lambda_chain) {
    scatter(x);
    double g = objective.value(full);
    for (CmiEvaluator& ch : chains) g += lambda_chain * ch.value(full);
    marginal_sums(x);
    for (size_t pi = 0; pi < prep.plans.size(); ++pi) {
      const std::vector<double>& sums = marg_scratch[pi];
      const std::vector<double>& req = prep.plans[pi].required;
      for (size_t j = 0; j < req.size(); ++j) {
        const double r = sums[j] - req[j];
        g += lambda * r * r;
      }
    }
    const double over = expected_cost(x) - prep.problem->budget;
    if (over > 0.0) g += lambda * over;
    return g;
  }

  double penalized_grad(const std::vector<double>& x, double lambda, std::vector<double>& gx) {
    return penalized_grad(x, lambda, lambda, gx);
  }

  double penalized_grad(const std::vector<double>& x, double lambda, double lambda_chain,
                        std::vector<double>& gx) {
    scatter(x);
    double g = objective.value_and_grad(full, fgrad);
    for (CmiEvaluator& ch : chains) g += lambda_chain * ch.value_and_grad(full, lambda_chain, fgrad);
    gx.resize(x.size());
    for (size_t s = 0; s < x.size(); ++s) gx[s] = fgrad[static_cast<size_t>(prep.open[s])];
    marginal_sums(x);
    for (size_t pi = 0; pi < prep.plans.size(); ++pi) {
      const std::vector<double>& sums = marg_scratch[pi];
      const MarginalPlan& plan = prep.plans[pi];
      for (size_t j = 0; j < plan.required.size(); ++j) {
        const double r = sums[j] - plan.required[j];
        g += lambda * r * r;
      }
      for (size_t s = 0; s < x.size(); ++s)
        gx[s] += 2.0 * lambda *
                 (sums[static_cast<size_t>(plan.cell_of_slot[s])] -
                  plan.required[static_cast<size_t>(plan.cell_of_slot[s])]);
    }
    const double over = expected_cost(x) - prep.problem->budget;
    if (over > 0.0) {
      g += lambda * over;
      for (size_t s = 0; s < x.size(); ++s) gx[s] += lambda * prep.open_cost[s];
    }
    return g;
  }

  // Rescale each fiber to its required mass; cells of empty-but-required
  // fibers get the mass spread evenly.
  void reproportion(std::vector<double>& x) {
    for (const MarginalPlan& plan : prep.plans) {
      for (size_t j = 0; j < plan.required.size(); ++j) {
        const double w = plan.required[j];
        double have = 0.0;
        for (int s : plan.slots_of[j]) have += x[static_cast<size_t>(s)];
        if (w <= 0.0 || plan.slots_of[j].empty()) {
          for (int s : plan.slots_of[j]) x[static_cast<size_t>(s)] = 0.0;
          continue;
        }
        if (have > 0.0) {
          const double scale = w / have;
          for (int s : plan.slots_of[j]) x[static_cast<size_t>(s)] *= scale;
        } else {
          const double even = w / static_cast<double>(plan.slots_of[j].size());
          for (int s : plan.slots_of[j]) x[static_cast<size_t>(s)] = even;
        }
      }
    }
  }

  struct Residuals {
    double marginal = 0.0;  // l-infinity over all plans
    double chain = 0.0;     // max I(A;C|B), bits
    double over = 0.0;      // max(0, <p,d> - D)
  };

  Residuals residuals(const std::vector<double>& x) {
    Residuals r;
    marginal_sums(x);
    for (size_t pi = 0; pi < prep.plans.size(); ++pi)
      for (size_t j = 0; j < prep.plans[pi].required.size(); ++j)
        r.marginal =
            std::max(r.marginal, std::abs(marg_scratch[pi][j] - prep.plans[pi].required[j]));
    scatter(x);
    for (CmiEvaluator& ch : chains) r.chain = std::max(r.chain, ch.value(full));
    r.over = std::max(0.0, expected_cost(x) - prep.problem->budget);
    return r;
  }
};

struct Candidate {
  bool accepted = false;
  double value = 0.0;
  std::vector<double> x;
  Engine::Residuals res;
  int iterations = 0;
};

std::vector<double> initial_point(const Prepared& prep, const SolveOptions& options,
                                  int restart) {
  const size_t n = prep.open.size();
  std::vector<double> x(n);
  const int warm_count = static_cast<int>(options.warm_starts.size());
  if (restart < warm_count) {
    const std::vector<double>& w = options.warm_starts[static_cast<size_t>(restart)];
    if (w.size() != static_cast<size_t>(prep.problem->layout.cell_count()))
      throw std::invalid_argument("warm start length does not match the layout");
    for (size_t s = 0; s < n; ++s) x[s] = std::max(w[static_cast<size_t>(prep.open[s])], 0.0);
    double sum = std::accumulate(x.begin(), x.end(), 0.0);
    if (sum <= 0.0) x.assign(n, 1.0 / static_cast<double>(n));
    else for (double& v : x) v /= sum;
  } else if (restart == warm_count) {
    x.assign(n, 1.0 / static_cast<double>(n));
  } else if (restart == warm_count + 1) {
    x = prep.cheapest;
  } else {
    std::mt19937_64 rng(options.seed + 0x9E3779B97F4A7C15ULL * static_cast<uint64_t>(restart));
    std::uniform_real_distribution<double> unif(1e-12, 1.0);
    double sum = 0.0;
    for (double& v : x) {
      v = -std::log(unif(rng));
      sum += v;
    }
    for (double& v : x) v /= sum;
  }
  return x;
}

// Feasibility polish and acceptance: exact marginals, then slide inside the
// ball along the segment toward the cheapest consistent point, renormalize,
// and measure the result against the acceptance tolerances.
Candidate finish_candidate(Engine& eng, const Prepared& prep, const SolveOptions& options,
                           std::vector<double> x, int iterations) {
  const size_t n = prep.open.size();
  eng.reproportion(x);
  const double ed = eng.expected_cost(x);
  if (ed > prep.problem->budget && ed > prep.d_min) {
    const std::vector<double> x0 = x;
    double t = std::clamp((ed - prep.problem->budget) / (ed - prep.d_min), 0.0, 1.0);
    auto mix = [&](double w) {
      for (size_t s = 0; s < n; ++s) x[s] = (1.0 - w) * x0[s] + w * prep.cheapest[s];
    };
    mix(t);
    while (eng.expected_cost(x) > prep.problem->budget && t < 1.0) {
      t = std::min(1.0, t + 1e-9);
      mix(t);
    }
  }
  double sum = std::accumulate(x.begin(), x.end(), 0.0);
  if (sum > 0.0)
    for (double& v : x) v /= sum;

  Candidate cand;
  cand.iterations = iterations;
  cand.x = x;
  cand.value = eng.objective_value(x);
  cand.res = eng.residuals(x);
  cand.accepted = cand.res.marginal <= options.marginal_tol &&
                  cand.res.chain <= options.markov_tol &&
                  cand.res.over <= options.distortion_tol;
  return cand;
}

Candidate run_restart(const Prepared& prep, const SolveOptions& options, int restart) {
  Engine eng(prep);
  const size_t n = prep.open.size();
  std::vector<double> x = initial_point(prep, options, restart);
  eng.reproportion(x);
  if (prep.plans.empty()) project_simplex(x, 1.0);

  // A warm start is already near-feasible: running it through the loose early
  // penalty stages would trade feasibility away and the later stages would
  // have to win it back, forfeiting the seed's head start.  Warm restarts
  // therefore descend only at the final stage weight.
  const bool warm = restart < static_cast<int>(options.warm_starts.size());
  // The reproportioned uniform seed keeps the unconstrained factors
  // independent of everything, so it starts exactly on the chain manifold.
  // Conditional mutual information is flat to first order at such a point, so
  // a staged chain weight would let the distortion pressure drag the iterate
  // off the manifold before the chain penalty pushes back.  Pinning the chain
  // weight at its final value from the start keeps the descent in the tube
  // while the other pressures still stage up gently.
  const double lambda_final = std::end(kLambdaStages)[-1];
  const bool tube = !warm && !eng.chains.empty() &&
                    restart == static_cast<int>(options.warm_starts.size()) &&
                    eng.residuals(x).chain <= options.markov_tol;

  std::vector<double> grad, trial;
  int total_iters = 0;
  for (double lambda : kLambdaStages) {
    if (warm && lambda != lambda_final) continue;
    const double lambda_chain = tube ? lambda_final : lambda;
    double eta = 0.5;
    double g = eng.penalized_grad(x, lambda, lambda_chain, grad);
    int quiet = 0;
    for (int it = 0; it < kMaxStageIterations && total_iters < options.max_iterations; ++it) {
      ++total_iters;
      bool stepped = false;
      for (int bt = 0; bt < 45; ++bt) {
        trial = x;
        for (size_t s = 0; s < n; ++s) trial[s] -= eta * grad[s];
        project_simplex(trial, 1.0);
        double move = 0.0;
        for (size_t s = 0; s < n; ++s) {
          const double d = trial[s] - x[s];
          move += d * d;
        }
        if (move == 0.0) break;
        const double gt = eng.penalized(trial, lambda, lambda_chain);
        if (gt <= g - 1e-4 * move / eta) {
          x.swap(trial);
          const double drop = g - gt;
          g = gt;
          eta = std::min(eta * 1.3, 1.0);
          stepped = true;
          quiet = drop <= kStageValueTol * std::max(1.0, std::abs(g)) ? quiet + 1 : 0;
          break;
        }
        eta *= 0.5;
      }
      if (!stepped || quiet >= 2) break;
      g = eng.penalized_grad(x, lambda, lambda_chain, grad);
    }
  }
  return finish_candidate(eng, prep, options, std::move(x), total_iters);
}

// A warm start polished as-is, with no descent: the solver must never return
// a value worse than a feasible point it was handed.
Candidate raw_warm_candidate(const Prepared& prep, const SolveOptions& options, int which) {
  Engine eng(prep);
  std::vector<double> x = initial_point(prep, options, which);
  eng.reproportion(x);
  if (prep.plans.empty()) project_simplex(x, 1.0);
  return finish_candidate(eng, prep, options, std::move(x), 0);
}

// Deterministic fold over finished restart slots: lowest accepted value wins,
// ties by slot index; no acceptance at all is a numerical failure, not an
// infeasibility verdict.
SolveResult fold_candidates(const ProblemSpec& problem, const Prepared& prep,
                            const std::vector<Candidate>& slots, int restarts_used) {
  int best = -1;
  long long iterations = 0;
  const int total = static_cast<int>(slots.size());
  for (int r = 0; r < total; ++r) {
    iterations += slots[static_cast<size_t>(r)].iterations;
    if (!slots[static_cast<size_t>(r)].accepted) continue;
    if (best < 0 || better({slots[static_cast<size_t>(r)].value, r},
                           {slots[static_cast<size_t>(best)].value, best}))
      best = r;
  }
  if (best < 0) {
    // Every restart missed the acceptance tolerances; report the cleanest
    // attempt rather than inventing a feasible answer.
    const Candidate* least = nullptr;
    for (const Candidate& c : slots) {
      const double score = c.res.marginal + c.res.chain + c.res.over;
      if (!least || score < least->res.marginal + least->res.chain + least->res.over) least = &c;
    }
    std::ostringstream os;
    os << "no restart reached the acceptance tolerances (best residuals: marginal "
       << least->res.marginal << ", chain " << least->res.chain << ", distortion "
       << least->res.over << ")";
    throw NumericalViolation(os.str());
  }

  const Candidate& win = slots[static_cast<size_t>(best)];
  SolveResult res;
  res.status = SolveStatus::locally_optimal;
  res.value = win.value;
  std::vector<double> full(static_cast<size_t>(problem.layout.cell_count()), 0.0);
  for (size_t s = 0; s < prep.open.size(); ++s)
    full[static_cast<size_t>(prep.open[s])] = win.x[s];
  res.argmin = JointPmf(problem.layout, std::move(full));
  res.diag.iterations = static_cast<int>(iterations);
  res.diag.restarts_used = restarts_used;
  res.diag.max_constraint_residual =
      std::max({win.res.marginal, win.res.chain, win.res.over});
  return res;
}

bool factored_dispatchable(const ProblemSpec& problem, const std::vector<uint8_t>& open_mask);
SolveResult solve_factored(const ProblemSpec& problem, const SolveOptions& options,
                           Prepared prep);

SolveResult solve_masked(const ProblemSpec& problem, const SolveOptions& options,
                         const std::vector<uint8_t>& open_mask) {
  if (options.restarts < 1) throw std::invalid_argument("restarts must be >= 1");
  Prepared prep = prepare(problem, open_mask);
  if (marginal_unreachable(prep)) {
    SolveResult res;
    res.status = SolveStatus::infeasible;
    return res;
  }
  if (problem.budget < prep.d_min - 1e-12) {
    SolveResult res;
    res.status = SolveStatus::infeasible;
    return res;
  }
  if (factored_dispatchable(problem, open_mask))
    return solve_factored(problem, options, std::move(prep));

  const int restarts = options.restarts;
  const int warm_count = static_cast<int>(options.warm_starts.size());
  const int total = restarts + warm_count;
  std::vector<Candidate> slots(static_cast<size_t>(total));
  const bool par = options.policy == ExecPolicy::parallel;
#pragma omp parallel for schedule(dynamic, 1) if (par)
  for (int r = 0; r < total; ++r)
    slots[static_cast<size_t>(r)] = r < restarts
                                        ? run_restart(prep, options, r)
                                        : raw_warm_candidate(prep, options, r - restarts);

  return fold_candidates(problem, prep, slots, restarts);
}

// Side-information shape shared by the dedicated and factored dispatch paths:
// all four factors, consistency pinned on {X, Y}, and exactly the encoder and
// decoder chains U–X–Y and X–(Y,U)–X̂ (in either orientation).
bool encoder_decoder_chains(const ProblemSpec& problem) {
  const FactorSet all{Factor::X, Factor::Y, Factor::U, Factor::Xhat};
  if (!(problem.layout.factors() == all)) return false;
  if (problem.constraints.consistency.size() != 1 ||
      !(problem.constraints.consistency.front().target ==
        FactorSet({Factor::X, Factor::Y})))
    return false;
  const auto& mk = problem.constraints.markov;
  if (mk.size() != 2) return false;
  const auto is_encoder = [](const MarkovChainSpec& m) {
    return m.b == FactorSet{Factor::X} &&
           ((m.a == FactorSet{Factor::U} && m.c == FactorSet{Factor::Y}) ||
            (m.a == FactorSet{Factor::Y} && m.c == FactorSet{Factor::U}));
  };
  const auto is_decoder = [](const MarkovChainSpec& m) {
    return m.b == FactorSet({Factor::Y, Factor::U}) &&
           ((m.a == FactorSet{Factor::X} && m.c == FactorSet{Factor::Xhat}) ||
            (m.a == FactorSet{Factor::Xhat} && m.c == FactorSet{Factor::X}));
  };
  return (is_encoder(mk[0]) && is_decoder(mk[1])) ||
         (is_encoder(mk[1]) && is_decoder(mk[0]));
}

}  // namespace

SolveResult solve_psi(const ProblemSpec& problem, const SolveOptions& options) {
  if (!problem.distortion.all_finite())
    throw std::invalid_argument(
        "solve_psi requires an all-finite distortion; use solve_psi_limit");
  std::vector<uint8_t> open(static_cast<size_t>(problem.layout.cell_count()), 1);
  return solve_masked(problem, options, open);
}

SolveResult solve_psi_limit(const ProblemSpec& problem, const SolveOptions& options) {
  SupportRestriction sr = restrict_support(problem.layout, problem.distortion);
  return solve_masked(problem, options, sr.mask);
}

bool ba_dispatchable(const ProblemSpec& problem) {
  const FactorSet xpair{Factor::X, Factor::Xhat};
  if (!(problem.layout.factors() == xpair)) return false;
  if (problem.objective.terms.size() != 1) return false;
  const MITerm& t = problem.objective.terms.front();
  if (t.coefficient != 1.0) return false;
  if (!(t.a == FactorSet{Factor::X}) || !(t.b == FactorSet{Factor::Xhat}) || !t.c.empty())
    return false;
  if (!problem.constraints.markov.empty()) return false;
  if (problem.constraints.consistency.size() != 1) return false;
  return problem.constraints.consistency.front().target == FactorSet{Factor::X};
}

bool wz_dispatchable(const ProblemSpec& problem) {
  if (!encoder_decoder_chains(problem)) return false;
  if (problem.objective.terms.size() != 1) return false;
  const MITerm& t = problem.objective.terms.front();
  if (t.coefficient != 1.0 || !(t.a == FactorSet{Factor::X}) ||
      !(t.b == FactorSet{Factor::U}) || !(t.c == FactorSet{Factor::Y}))
    return false;
  // The engine optimizes a cost table over (x, xhat), so the lifted
  // distortion must be constant along y and u.
  const AlphabetLayout& L = problem.layout;
  for (int x = 0; x < L.size(Factor::X); ++x)
    for (int xh = 0; xh < L.size(Factor::Xhat); ++xh) {
      const ExtendedReal base =
          problem.distortion.cost()[static_cast<size_t>(L.index({x, 0, 0, xh}))];
      for (int y = 0; y < L.size(Factor::Y); ++y)
        for (int u = 0; u < L.size(Factor::U); ++u)
          if (!(problem.distortion.cost()[static_cast<size_t>(L.index({x, y, u, xh}))] ==
                base))
            return false;
    }
  return true;
}

namespace {

// Side-information dispatch: run the channel/decoder engine, re-express its
// solution as a joint over the full layout, and fold in any warm starts so
// the returned value never exceeds that of a feasible seed.
SolveResult solve_wz_shape(const ProblemSpec& problem, const SolveOptions& options) {
  const AlphabetLayout& L = problem.layout;
  const int nx = L.size(Factor::X), ny = L.size(Factor::Y);
  const int nu = L.size(Factor::U), nhat = L.size(Factor::Xhat);
  const std::vector<double>& pxy =
      problem.constraints.consistency.front().required.mass();
  std::vector<ExtendedReal> cost;
  cost.reserve(static_cast<size_t>(nx * nhat));
  for (int x = 0; x < nx; ++x)
    for (int xh = 0; xh < nhat; ++xh)
      cost.push_back(problem.distortion.cost()[static_cast<size_t>(L.index({x, 0, 0, xh}))]);

  WzOptions wo;
  wo.u_card = nu;
  wo.seed = options.seed;
  wo.restarts = options.restarts;
  wo.policy = options.policy;
  wo.distortion_tol = options.distortion_tol;

  bool have = false;
  double best_value = 0.0, best_residual = 0.0;
  std::optional<JointPmf> best;
  try {
    const WzResult wz = wyner_ziv(pxy, nx, ny, cost, nhat, problem.budget, wo);
    if (wz.feasible()) {
      std::vector<double> mass(static_cast<size_t>(L.cell_count()), 0.0);
      for (int x = 0; x < nx; ++x)
        for (int y = 0; y < ny; ++y)
          for (int u = 0; u < nu; ++u) {
            const int xh = wz.decoder[static_cast<size_t>(u * ny + y)];
            mass[static_cast<size_t>(L.index({x, y, u, xh}))] +=
                pxy[static_cast<size_t>(x * ny + y)] *
                wz.channel[static_cast<size_t>(x * nu + u)];
          }
      JointPmf p(L, std::move(mass));
      best_value = evaluate(problem.objective, p);
      best_residual = check_membership(p, problem.constraints).max_residual;
      best = std::move(p);
      have = true;
    }
  } catch (const NumericalViolation&) {
    // The engine could not polish its channel onto the budget; a warm start
    // below may still provide a feasible answer.
  }

  for (const std::vector<double>& w : options.warm_starts) {
    if (static_cast<int>(w.size()) != L.cell_count())
      throw std::invalid_argument("warm start length does not match the layout");
    JointPmf p(L, w);
    const MembershipVerdict mv = check_membership(p, problem.constraints);
    bool ok = true;
    for (const ConstraintResidual& r : mv.residuals) {
      const double tol =
          r.name.rfind("markov", 0) == 0 ? options.markov_tol : options.marginal_tol;
      if (r.residual > tol) {
        ok = false;
        break;
      }
    }
    if (ok) {
      const ExtendedReal c = expected_distortion(p, problem.distortion);
      ok = c.is_finite() && c.finite_value() <= problem.budget + options.distortion_tol;
    }
    if (!ok) continue;
    const double value = evaluate(problem.objective, p);
    if (!have || value < best_value) {
      best_value = value;
      best_residual = mv.max_residual;
      best = std::move(p);
      have = true;
    }
  }

  SolveResult res;
  res.diag.restarts_used = options.restarts;
  if (!have) {
    res.status = SolveStatus::infeasible;
    return res;
  }
  res.status = SolveStatus::locally_optimal;
  res.value = best_value;
  res.argmin = std::move(best);
  res.diag.max_constraint_residual = best_residual;
  return res;
}

// Factored descent over the side-information shape.  On that shape the
// feasible set is exactly the image of
//   p(x, y, u, x̂) = p(x, y) · q(u | x) · r(x̂ | y, u),
// so descending in the rows of (q, r) keeps the consistency marginal and both
// chains satisfied identically, and only the distortion ball ever needs a
// penalty.  The raw-joint penalty stages stall here when started cold:
// conditional mutual information is flat to first order at a factored point,
// so staged chain weights either let the iterate drift off the manifold or
// pin it in place.  Factoring removes that contest entirely.

bool factored_dispatchable(const ProblemSpec& problem, const std::vector<uint8_t>& open_mask) {
  if (!problem.distortion.all_finite()) return false;
  if (std::find(open_mask.begin(), open_mask.end(), uint8_t{0}) != open_mask.end())
    return false;
  return encoder_decoder_chains(problem);
}

// Objective value and gradient pulled back through the factorization.
struct FactoredEval {
  const ProblemSpec& problem;
  const std::vector<double>& pxy;  // consistency target, row-major over (x, y)
  int nx, ny, nu, nhat;
  CompiledObjective objective;
  std::vector<double> cost;  // finite costs over the full layout
  std::vector<double> full, fgrad;

  explicit FactoredEval(const ProblemSpec& p)
      : problem(p),
        pxy(p.constraints.consistency.front().required.mass()),
        nx(p.layout.size(Factor::X)),
        ny(p.layout.size(Factor::Y)),
        nu(p.layout.size(Factor::U)),
        nhat(p.layout.size(Factor::Xhat)),
        objective(p.objective, p.layout) {
    const size_t cells = static_cast<size_t>(p.layout.cell_count());
    cost.resize(cells);
    for (size_t i = 0; i < cells; ++i) cost[i] = p.distortion.cost()[i].finite_value();
    full.assign(cells, 0.0);
    fgrad.assign(cells, 0.0);
  }

  size_t cell(int x, int y, int u, int xh) const {
    return static_cast<size_t>(problem.layout.index({x, y, u, xh}));
  }
  size_t qi(int x, int u) const { return static_cast<size_t>(x * nu + u); }
  size_t ri(int y, int u, int xh) const {
    return static_cast<size_t>((y * nu + u) * nhat + xh);
  }

  void embed(const std::vector<double>& q, const std::vector<double>& r) {
    std::fill(full.begin(), full.end(), 0.0);
    for (int x = 0; x < nx; ++x)
      for (int y = 0; y < ny; ++y) {
        const double pw = pxy[static_cast<size_t>(x * ny + y)];
        if (pw <= 0.0) continue;
        for (int u = 0; u < nu; ++u) {
          const double base = pw * q[qi(x, u)];
          if (base <= 0.0) continue;
          for (int xh = 0; xh < nhat; ++xh)
            full[cell(x, y, u, xh)] = base * r[ri(y, u, xh)];
        }
      }
  }

  double expected_cost() const {
    double ed = 0.0;
    for (size_t i = 0; i < full.size(); ++i) ed += full[i] * cost[i];
    return ed;
  }

  double value(const std::vector<double>& q, const std::vector<double>& r, double lambda) {
    embed(q, r);
    double g = objective.value(full);
    const double over = expected_cost() - problem.budget;
    if (over > 0.0) g += lambda * over;
    return g;
  }

  double value_grad(const std::vector<double>& q, const std::vector<double>& r,
                    double lambda, std::vector<double>& gq, std::vector<double>& gr) {
    embed(q, r);
    double g = objective.value_and_grad(full, fgrad);
    const double over = expected_cost() - problem.budget;
    if (over > 0.0) {
      g += lambda * over;
      for (size_t i = 0; i < fgrad.size(); ++i) fgrad[i] += lambda * cost[i];
    }
    gq.assign(static_cast<size_t>(nx * nu), 0.0);
    gr.assign(static_cast<size_t>(ny * nu * nhat), 0.0);
    for (int x = 0; x < nx; ++x)
      for (int y = 0; y < ny; ++y) {
        const double pw = pxy[static_cast<size_t>(x * ny + y)];
        if (pw <= 0.0) continue;
        for (int u = 0; u < nu; ++u) {
          const double qw = q[qi(x, u)];
          for (int xh = 0; xh < nhat; ++xh) {
            const double G = fgrad[cell(x, y, u, xh)];
            gq[qi(x, u)] += G * pw * r[ri(y, u, xh)];
            gr[ri(y, u, xh)] += G * pw * qw;
          }
        }
      }
    return g;
  }

  // Deterministic decoder rows minimizing expected cost under the given
  // encoder; returns the floor that decoder choice alone can reach.
  double best_decoder(const std::vector<double>& q, std::vector<double>& rows) const {
    rows.assign(static_cast<size_t>(ny * nu * nhat), 0.0);
    double floor = 0.0;
    for (int y = 0; y < ny; ++y)
      for (int u = 0; u < nu; ++u) {
        int pick = 0;
        double pick_s = std::numeric_limits<double>::infinity();
        for (int xh = 0; xh < nhat; ++xh) {
          double s = 0.0;
          for (int x = 0; x < nx; ++x)
            s += pxy[static_cast<size_t>(x * ny + y)] * q[qi(x, u)] *
                 cost[cell(x, y, u, xh)];
          if (s < pick_s) {
            pick_s = s;
            pick = xh;
          }
        }
        rows[ri(y, u, pick)] = 1.0;
        floor += pick_s;
      }
    return floor;
  }

  // Slide r toward the cost-optimal decoder until the ball holds; expected
  // cost is linear in r, so the first mix lands on target up to rounding.
  // The target sits a hair inside the budget so the finishing reproportion
  // and renormalization cannot push the point back out of the ball.
  void enforce_ball(const std::vector<double>& q, std::vector<double>& r) {
    const double target = std::max(
        0.0, problem.budget - 1e-12 * std::max(1.0, std::abs(problem.budget)));
    embed(q, r);
    double ed = expected_cost();
    if (ed <= target) return;
    std::vector<double> opt;
    const double lo = best_decoder(q, opt);
    if (lo >= ed) return;
    double t = std::clamp((ed - target) / (ed - lo), 0.0, 1.0);
    const std::vector<double> r0 = r;
    auto mix = [&](double w) {
      for (size_t i = 0; i < r.size(); ++i) r[i] = (1.0 - w) * r0[i] + w * opt[i];
    };
    mix(t);
    embed(q, r);
    while (expected_cost() > target && t < 1.0) {
      t = std::min(1.0, t + 1e-9);
      mix(t);
      embed(q, r);
    }
  }
};

void factored_seed(const FactoredEval& ev, const SolveOptions& options, int restart,
                   std::vector<double>& q, std::vector<double>& r) {
  const int nx = ev.nx, ny = ev.ny, nu = ev.nu, nhat = ev.nhat;
  q.assign(static_cast<size_t>(nx * nu), 0.0);
  r.assign(static_cast<size_t>(ny * nu * nhat), 0.0);
  const int warm_count = static_cast<int>(options.warm_starts.size());
  if (restart < warm_count) {
    // Conditionals of the warm joint; a point already on the manifold
    // round-trips exactly, anything nearby projects onto it.
    const std::vector<double>& w = options.warm_starts[static_cast<size_t>(restart)];
    for (int x = 0; x < nx; ++x) {
      double den = 0.0;
      for (int u = 0; u < nu; ++u) {
        double num = 0.0;
        for (int y = 0; y < ny; ++y)
          for (int xh = 0; xh < nhat; ++xh) num += std::max(w[ev.cell(x, y, u, xh)], 0.0);
        q[ev.qi(x, u)] = num;
        den += num;
      }
      for (int u = 0; u < nu; ++u)
        q[ev.qi(x, u)] = den > 0.0 ? q[ev.qi(x, u)] / den : 1.0 / nu;
    }
    for (int y = 0; y < ny; ++y)
      for (int u = 0; u < nu; ++u) {
        double den = 0.0;
        for (int xh = 0; xh < nhat; ++xh) {
          double num = 0.0;
          for (int x = 0; x < nx; ++x) num += std::max(w[ev.cell(x, y, u, xh)], 0.0);
          r[ev.ri(y, u, xh)] = num;
          den += num;
        }
        for (int xh = 0; xh < nhat; ++xh)
          r[ev.ri(y, u, xh)] = den > 0.0 ? r[ev.ri(y, u, xh)] / den : 1.0 / nhat;
      }
    return;
  }
  if (restart == warm_count) {
    q.assign(q.size(), 1.0 / nu);
    r.assign(r.size(), 1.0 / nhat);
    return;
  }
  if (restart == warm_count + 1) {
    // Spread identity encoder with its near-optimal decoder: a low-distortion
    // corner of the manifold, softened so boundary gradients stay informative.
    const double hit = nu > 1 ? 1.0 - 1e-3 : 1.0;
    const double spread = nu > 1 ? 1e-3 / (nu - 1) : 0.0;
    for (int x = 0; x < nx; ++x)
      for (int u = 0; u < nu; ++u) q[ev.qi(x, u)] = u == x % nu ? hit : spread;
    std::vector<double> opt;
    ev.best_decoder(q, opt);
    const double rhit = nhat > 1 ? 1.0 - 1e-3 : 1.0;
    const double rspread = nhat > 1 ? 1e-3 / (nhat - 1) : 0.0;
    for (size_t i = 0; i < r.size(); ++i) r[i] = opt[i] > 0.0 ? rhit : rspread;
    return;
  }
  std::mt19937_64 rng(options.seed + 0x9E3779B97F4A7C15ULL * static_cast<uint64_t>(restart));
  std::uniform_real_distribution<double> unif(1e-12, 1.0);
  const auto dirichlet_rows = [&](std::vector<double>& m, int nrows, int len) {
    for (int i = 0; i < nrows; ++i) {
      double sum = 0.0;
      for (int j = 0; j < len; ++j) {
        m[static_cast<size_t>(i * len + j)] = -std::log(unif(rng));
        sum += m[static_cast<size_t>(i * len + j)];
      }
      for (int j = 0; j < len; ++j) m[static_cast<size_t>(i * len + j)] /= sum;
    }
  };
  dirichlet_rows(q, nx, nu);
  dirichlet_rows(r, ny * nu, nhat);
}

Candidate factored_restart(const Prepared& prep, const SolveOptions& options, int restart) {
  const ProblemSpec& problem = *prep.problem;
  FactoredEval ev(problem);
  std::vector<double> q, r;
  factored_seed(ev, options, restart, q, r);
  // A warm seed is already near its basin floor; the early ball stages would
  // only let it wander for objective gains the final weight claws back.
  const bool warm = restart < static_cast<int>(options.warm_starts.size());
  const double lambda_final = std::end(kLambdaStages)[-1];

  std::vector<double> gq, gr, tq, tr;
  int total_iters = 0;
  for (double lambda : kLambdaStages) {
    if (warm && lambda != lambda_final) continue;
    double eta = 0.5;
    double g = ev.value_grad(q, r, lambda, gq, gr);
    int quiet = 0;
    for (int it = 0; it < kMaxStageIterations && total_iters < options.max_iterations; ++it) {
      ++total_iters;
      bool stepped = false;
      for (int bt = 0; bt < 45; ++bt) {
        tq = q;
        tr = r;
        for (size_t i = 0; i < tq.size(); ++i) tq[i] -= eta * gq[i];
        for (size_t i = 0; i < tr.size(); ++i) tr[i] -= eta * gr[i];
        for (int x = 0; x < ev.nx; ++x) project_row(&tq[ev.qi(x, 0)], ev.nu, 1.0);
        for (int j = 0; j < ev.ny * ev.nu; ++j)
          project_row(&tr[static_cast<size_t>(j) * static_cast<size_t>(ev.nhat)], ev.nhat,
                      1.0);
        double move = 0.0;
        for (size_t i = 0; i < tq.size(); ++i) {
          const double d = tq[i] - q[i];
          move += d * d;
        }
        for (size_t i = 0; i < tr.size(); ++i) {
          const double d = tr[i] - r[i];
          move += d * d;
        }
        if (move == 0.0) break;
        const double gt = ev.value(tq, tr, lambda);
        if (gt <= g - 1e-4 * move / eta) {
          q.swap(tq);
          r.swap(tr);
          const double drop = g - gt;
          g = gt;
          eta = std::min(eta * 1.3, 1.0);
          stepped = true;
          quiet = drop <= kStageValueTol * std::max(1.0, std::abs(g)) ? quiet + 1 : 0;
          break;
        }
        eta *= 0.5;
      }
      if (!stepped || quiet >= 2) break;
      g = ev.value_grad(q, r, lambda, gq, gr);
    }
  }

  ev.enforce_ball(q, r);
  ev.embed(q, r);
  Engine eng(prep);
  return finish_candidate(eng, prep, options, ev.full, total_iters);
}

SolveResult solve_factored(const ProblemSpec& problem, const SolveOptions& options,
                           Prepared prep) {
  const int restarts = options.restarts;
  const int warm_count = static_cast<int>(options.warm_starts.size());
  for (const std::vector<double>& w : options.warm_starts)
    if (w.size() != static_cast<size_t>(problem.layout.cell_count()))
      throw std::invalid_argument("warm start length does not match the layout");
  const int total = restarts + warm_count;
  std::vector<Candidate> slots(static_cast<size_t>(total));
  const bool par = options.policy == ExecPolicy::parallel;
#pragma omp parallel for schedule(dynamic, 1) if (par)
  for (int rix = 0; rix < total; ++rix)
    slots[static_cast<size_t>(rix)] = rix < restarts
                                          ? factored_restart(prep, options, rix)
                                          : raw_warm_candidate(prep, options, rix - restarts);
  return fold_candidates(problem, prep, slots, restarts);
}

}  // namespace

SolveResult solve_auto(const ProblemSpec& problem, const SolveOptions& options) {
  if (wz_dispatchable(problem)) return solve_wz_shape(problem, options);
  if (!ba_dispatchable(problem))
    return problem.distortion.all_finite() ? solve_psi(problem, options)
                                           : solve_psi_limit(problem, options);

  const int nx = problem.layout.size(Factor::X);
  const int nhat = problem.layout.size(Factor::Xhat);
  const std::vector<double>& px = problem.constraints.consistency.front().required.mass();
  std::vector<double> cost(static_cast<size_t>(nx * nhat), 0.0);
  std::vector<uint8_t> usable(cost.size(), 0);
  for (size_t i = 0; i < cost.size(); ++i) {
    const ExtendedReal& c = problem.distortion.cost()[i];
    if (c.is_finite()) {
      cost[i] = c.finite_value();
      usable[i] = 1;
    }
  }

  BaOptions ba;
  ba.distortion_tol = std::min(ba.distortion_tol, options.distortion_tol);
  RdResult rd = blahut_arimoto_rd(px, cost, usable, nx, nhat, problem.budget, ba);
  SolveResult res;
  res.status = rd.status;
  res.diag.iterations = rd.iterations;
  res.diag.restarts_used = 0;
  if (rd.status == SolveStatus::infeasible) return res;
  res.value = rd.rate_bits;
  res.argmin = JointPmf(problem.layout, rd.joint);
  return res;
}

}  // namespace rdtrunc
