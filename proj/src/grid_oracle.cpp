#include "rdtrunc/grid_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "rdtrunc/errors.hpp"

namespace rdtrunc {

namespace {

// Compositions of m into r ordered parts, enumerated with the first part
// descending: (m,0,...,0), (m-1,1,0,...), ..., (0,...,0,m).
long long composition_count(int m, int r) {
  // C(m + r - 1, r - 1), exact in long long for the sizes the cap admits.
  long long n = m + r - 1;
  long long k = r - 1;
  k = std::min(k, n - k);
  long long c = 1;
  for (long long i = 1; i <= k; ++i) c = c * (n - k + i) / i;
  return c;
}

void unrank_composition(long long rank, int m, int r, int* out) {
  int left = m;
  for (int part = 0; part < r - 1; ++part) {
    int v = left;
    for (; v >= 0; --v) {
      long long block = composition_count(left - v, r - part - 1);
      if (rank < block) break;
      rank -= block;
    }
    out[part] = v;
    left -= v;
  }
  out[r - 1] = left;
}

bool next_composition(int* c, int r) {
  if (r <= 1) return false;
  int i = r - 2;
  while (i >= 0 && c[i] == 0) --i;
  if (i < 0) return false;
  int moved = c[r - 1];
  c[i] -= 1;
  c[r - 1] = 0;
  c[i + 1] += moved + 1;
  return true;
}

// One enumeration row: a block of cells sharing a fixed total mass.
struct Row {
  double weight;
  std::vector<int> cells;
  long long count;  // compositions of m over |cells| parts
};

struct ChunkBest {
  bool found = false;
  TaggedValue best{0.0, 0};
  long long feasible = 0;
};

}  // namespace

OracleBracket oracle_bracket(const ProblemSpec& problem, const OracleOptions& opts) {
  if (!problem.constraints.markov.empty())
    throw std::invalid_argument("oracle_bracket: Markov chains are not supported");
  if (problem.constraints.consistency.size() > 1)
    throw std::invalid_argument("oracle_bracket: at most one consistency constraint");
  if (opts.resolution < 1) throw std::invalid_argument("oracle_bracket: resolution must be >= 1");

  const AlphabetLayout& layout = problem.layout;
  const int k = layout.cell_count();
  const int m = opts.resolution;

  // Infinite-cost cells never carry mass in a feasible point, so they are
  // excluded from enumeration outright.
  std::vector<uint8_t> open(static_cast<size_t>(k), 1);
  std::vector<double> finite_cost(static_cast<size_t>(k), 0.0);
  for (int i = 0; i < k; ++i) {
    const ExtendedReal& c = problem.distortion.cost()[static_cast<size_t>(i)];
    if (c.is_infinite()) {
      open[static_cast<size_t>(i)] = 0;
    } else {
      finite_cost[static_cast<size_t>(i)] = c.finite_value();
    }
  }

  std::vector<Row> rows;
  if (problem.constraints.consistency.empty()) {
    Row row;
    row.weight = 1.0;
    for (int i = 0; i < k; ++i)
      if (open[static_cast<size_t>(i)]) row.cells.push_back(i);
    if (row.cells.empty()) throw InfeasibleProblem("every cell has infinite cost");
    rows.push_back(std::move(row));
  } else {
    const ConsistencySpec& spec = problem.constraints.consistency.front();
    const AlphabetLayout sub = layout.marginal_layout(spec.target);
    const std::vector<int32_t> onto = layout.cell_map_onto(sub);
    rows.assign(static_cast<size_t>(sub.cell_count()), Row{});
    for (int j = 0; j < sub.cell_count(); ++j)
      rows[static_cast<size_t>(j)].weight = spec.required.mass()[static_cast<size_t>(j)];
    for (int i = 0; i < k; ++i)
      if (open[static_cast<size_t>(i)])
        rows[static_cast<size_t>(onto[static_cast<size_t>(i)])].cells.push_back(i);
    // Zero-mass fibers contribute nothing; a massive fiber with every cell
    // barred means no pmf matches the marginal at finite cost.
    std::vector<Row> kept;
    for (Row& row : rows) {
      if (row.weight <= 0.0) continue;
      if (row.cells.empty())
        throw InfeasibleProblem("a required marginal cell has only infinite-cost refinements");
      kept.push_back(std::move(row));
    }
    rows = std::move(kept);
  }

  long long total = 1;
  for (Row& row : rows) {
    row.count = composition_count(m, static_cast<int>(row.cells.size()));
    if (row.count > opts.max_points / total)
      throw std::invalid_argument("oracle_bracket: grid too large at this resolution");
    total *= row.count;
  }

  double modulus = 0.0;
  for (const MITerm& t : problem.objective.terms)
    modulus += std::abs(t.coefficient) * 4.0 * std::log2(static_cast<double>(std::max(k, 4)));

  const int nrows = static_cast<int>(rows.size());
  const double budget_slack = problem.budget + 1e-12;

  const long long chunk_size = 65536;
  const long long nchunks = chunk_count(total, chunk_size);
  std::vector<ChunkBest> slots(static_cast<size_t>(nchunks));

  const bool par = opts.policy == ExecPolicy::parallel;
#pragma omp parallel for schedule(dynamic, 1) if (par)
  for (long long chunk = 0; chunk < nchunks; ++chunk) {
    const long long begin = chunk * chunk_size;
    const long long end = std::min(begin + chunk_size, total);

    // Per-row composition state at the chunk's starting rank.
    std::vector<std::vector<int>> comp(static_cast<size_t>(nrows));
    {
      long long rest = begin;
      for (int rix = nrows - 1; rix >= 0; --rix) {
        const Row& row = rows[static_cast<size_t>(rix)];
        long long rank = rest % row.count;
        rest /= row.count;
        comp[static_cast<size_t>(rix)].assign(row.cells.size(), 0);
        unrank_composition(rank, m, static_cast<int>(row.cells.size()),
                           comp[static_cast<size_t>(rix)].data());
      }
    }

    CompiledObjective objective(problem.objective, layout);
    std::vector<double> mass(static_cast<size_t>(k), 0.0);
    ChunkBest best;

    for (long long idx = begin; idx < end; ++idx) {
      double cost = 0.0;
      for (int rix = 0; rix < nrows; ++rix) {
        const Row& row = rows[static_cast<size_t>(rix)];
        const std::vector<int>& c = comp[static_cast<size_t>(rix)];
        for (size_t j = 0; j < row.cells.size(); ++j) {
          const double v = row.weight * c[j] / m;
          mass[static_cast<size_t>(row.cells[j])] = v;
          cost += v * finite_cost[static_cast<size_t>(row.cells[j])];
        }
      }
      if (cost <= budget_slack) {
        const double value = objective.value(mass);
        if (!best.found || better({value, idx}, best.best)) {
          best.found = true;
          best.best = {value, idx};
        }
        ++best.feasible;
      }

      // Advance the mixed-radix composition state, rightmost row fastest.
      if (idx + 1 < end) {
        for (int rix = nrows - 1; rix >= 0; --rix) {
          if (next_composition(comp[static_cast<size_t>(rix)].data(),
                               static_cast<int>(rows[static_cast<size_t>(rix)].cells.size())))
            break;
          comp[static_cast<size_t>(rix)].assign(rows[static_cast<size_t>(rix)].cells.size(), 0);
          comp[static_cast<size_t>(rix)][0] = m;  // wrap to the first composition
        }
      }
    }
    slots[static_cast<size_t>(chunk)] = best;
  }

  OracleBracket out;
  out.total_points = total;
  out.modulus = modulus;
  TaggedValue winner{0.0, 0};
  for (const ChunkBest& slot : slots) {
    out.feasible_points += slot.feasible;
    if (!slot.found) continue;
    if (!out.found || better(slot.best, winner)) {
      out.found = true;
      winner = slot.best;
    }
  }
  if (!out.found) return out;

  out.upper = winner.value;
  out.lower = winner.value - modulus * static_cast<double>(k) / m;

  // Rebuild the winning point from its rank.
  out.best_point.assign(static_cast<size_t>(k), 0.0);
  long long rest = winner.tag;
  for (int rix = nrows - 1; rix >= 0; --rix) {
    const Row& row = rows[static_cast<size_t>(rix)];
    long long rank = rest % row.count;
    rest /= row.count;
    std::vector<int> c(row.cells.size());
    unrank_composition(rank, m, static_cast<int>(row.cells.size()), c.data());
    for (size_t j = 0; j < row.cells.size(); ++j)
      out.best_point[static_cast<size_t>(row.cells[j])] = row.weight * c[j] / m;
  }
  return out;
}

}  // namespace rdtrunc
