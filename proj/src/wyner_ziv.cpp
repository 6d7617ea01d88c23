// Channel/decoder alternation for the side-information problem.  Only the
// channel is a free variable: decoders are rebuilt exactly per evaluation, so
// the search space is the product of |X| simplices over the auxiliary
// alphabet.  Seeding is exhaustive on a coarse grid when that product is
// small, then Nelder-Mead refines the best seeds and a few random starts.

#include "rdtrunc/wyner_ziv.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

#include "rdtrunc/errors.hpp"

namespace rdtrunc {
namespace {

constexpr double kLn2 = 0.6931471805599453;
constexpr double kHugePenalty = 1e9;
constexpr uint64_t kGolden = 0x9E3779B97F4A7C15ull;

struct Evaluation {
  double penalized = kHugePenalty;
  double rate_bits = 0.0;
  double distortion = std::numeric_limits<double>::infinity();
  std::vector<int> decoder;
};

class WzEngine {
 public:
  WzEngine(const std::vector<double>& pxy, int nx, int ny,
           const std::vector<ExtendedReal>& cost, int nhat, int nu, double D)
      : pxy_(pxy), nx_(nx), ny_(ny), nhat_(nhat), nu_(nu), budget_(D),
        cost_(cost), joint_(static_cast<size_t>(nx) * ny * nu) {}

  int params() const { return nx_ * (nu_ - 1); }

  // channel rows live on the nu-simplex; evaluation is total in the channel.
  Evaluation evaluate(const std::vector<double>& channel) {
    Evaluation out;
    out.decoder.assign(static_cast<size_t>(nu_) * ny_, 0);
    for (int x = 0; x < nx_; ++x)
      for (int y = 0; y < ny_; ++y) {
        const double w = pxy_[static_cast<size_t>(x) * ny_ + y];
        for (int u = 0; u < nu_; ++u)
          joint_[idx(x, y, u)] = w * channel[static_cast<size_t>(x) * nu_ + u];
      }

    double ed = 0.0;
    bool ed_finite = true;
    for (int u = 0; u < nu_; ++u)
      for (int y = 0; y < ny_; ++y) {
        // Exact decoder for this cell: conditional-cost argmin over xhat,
        // ties resolved toward the lowest index.
        double best = std::numeric_limits<double>::infinity();
        bool best_finite = false;
        int pick = 0;
        double cell_mass = 0.0;
        for (int x = 0; x < nx_; ++x) cell_mass += joint_[idx(x, y, u)];
        if (cell_mass <= 0.0) {
          out.decoder[static_cast<size_t>(u) * ny_ + y] = 0;
          continue;
        }
        for (int h = 0; h < nhat_; ++h) {
          double acc = 0.0;
          bool finite = true;
          for (int x = 0; x < nx_; ++x) {
            const double m = joint_[idx(x, y, u)];
            if (m <= 0.0) continue;
            const ExtendedReal& c = cost_[static_cast<size_t>(x) * nhat_ + h];
            if (c.is_infinite()) {
              finite = false;
              break;
            }
            acc += m * c.finite_value();
          }
          if (!finite) continue;
          if (!best_finite || acc < best) {
            best = acc;
            best_finite = true;
            pick = h;
          }
        }
        out.decoder[static_cast<size_t>(u) * ny_ + y] = pick;
        if (!best_finite)
          ed_finite = false;
        else
          ed += best;
      }

    if (!ed_finite) {
      out.penalized = kHugePenalty;
      return out;
    }
    out.distortion = ed;
    out.rate_bits = conditional_rate();
    out.penalized = out.rate_bits + 1e3 * std::max(0.0, ed - budget_);
    return out;
  }

 private:
  size_t idx(int x, int y, int u) const {
    return (static_cast<size_t>(x) * ny_ + y) * nu_ + u;
  }

  // I(X;U|Y) in bits from the current joint.
  double conditional_rate() const {
    std::vector<double> my(ny_, 0.0), myu(static_cast<size_t>(ny_) * nu_, 0.0);
    for (int x = 0; x < nx_; ++x)
      for (int y = 0; y < ny_; ++y)
        for (int u = 0; u < nu_; ++u) {
          const double m = joint_[(static_cast<size_t>(x) * ny_ + y) * nu_ + u];
          my[y] += m;
          myu[static_cast<size_t>(y) * nu_ + u] += m;
        }
    double nats = 0.0;
    for (int x = 0; x < nx_; ++x)
      for (int y = 0; y < ny_; ++y) {
        const double mxy = pxy_[static_cast<size_t>(x) * ny_ + y];
        if (mxy <= 0.0) continue;
        for (int u = 0; u < nu_; ++u) {
          const double m = joint_[(static_cast<size_t>(x) * ny_ + y) * nu_ + u];
          if (m <= 0.0) continue;
          nats += m * std::log(m * my[y] /
                               (mxy * myu[static_cast<size_t>(y) * nu_ + u]));
        }
      }
    return std::max(0.0, nats / kLn2);
  }

  const std::vector<double>& pxy_;
  int nx_, ny_, nhat_, nu_;
  double budget_;
  const std::vector<ExtendedReal>& cost_;
  std::vector<double> joint_;
};

std::vector<double> channel_from_params(const std::vector<double>& theta,
                                        int nx, int nu) {
  std::vector<double> channel(static_cast<size_t>(nx) * nu, 0.0);
  for (int x = 0; x < nx; ++x) {
    double sum = 0.0;
    for (int u = 0; u + 1 < nu; ++u) {
      const double v = std::max(0.0, theta[static_cast<size_t>(x) * (nu - 1) + u]);
      channel[static_cast<size_t>(x) * nu + u] = v;
      sum += v;
    }
    if (sum > 1.0) {
      for (int u = 0; u + 1 < nu; ++u)
        channel[static_cast<size_t>(x) * nu + u] /= sum;
      channel[static_cast<size_t>(x) * nu + (nu - 1)] = 0.0;
    } else {
      channel[static_cast<size_t>(x) * nu + (nu - 1)] = 1.0 - sum;
    }
  }
  return channel;
}

std::vector<double> params_from_channel(const std::vector<double>& channel,
                                        int nx, int nu) {
  std::vector<double> theta(static_cast<size_t>(nx) * (nu - 1), 0.0);
  for (int x = 0; x < nx; ++x)
    for (int u = 0; u + 1 < nu; ++u)
      theta[static_cast<size_t>(x) * (nu - 1) + u] =
          channel[static_cast<size_t>(x) * nu + u];
  return theta;
}

// Deterministic Nelder-Mead on the free channel parameters; returns the best
// parameter vector found.
std::vector<double> refine(WzEngine& engine, const std::vector<double>& start,
                           int nx, int nu, int iterations) {
  const int p = static_cast<int>(start.size());
  if (p == 0) return start;
  auto value = [&](const std::vector<double>& theta) {
    return engine.evaluate(channel_from_params(theta, nx, nu)).penalized;
  };

  std::vector<std::vector<double>> vertex(p + 1, start);
  for (int i = 0; i < p; ++i) {
    const double step = start[i] + 0.08 <= 1.0 ? 0.08 : -0.08;
    vertex[i + 1][i] += step;
  }
  std::vector<double> f(p + 1);
  for (int i = 0; i <= p; ++i) f[i] = value(vertex[i]);

  std::vector<int> order(p + 1);
  std::vector<double> centroid(p), xr(p), xx(p);
  for (int it = 0; it < iterations; ++it) {
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      if (f[a] != f[b]) return f[a] < f[b];
      return a < b;
    });
    const int best = order[0], worst = order[p], second = order[p - 1];
    if (f[worst] - f[best] < 1e-13) break;

    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (int i = 0; i <= p; ++i) {
      if (i == worst) continue;
      for (int j = 0; j < p; ++j) centroid[j] += vertex[i][j];
    }
    for (int j = 0; j < p; ++j) centroid[j] /= p;

    for (int j = 0; j < p; ++j) xr[j] = 2.0 * centroid[j] - vertex[worst][j];
    const double fr = value(xr);
    if (fr < f[best]) {
      for (int j = 0; j < p; ++j) xx[j] = 3.0 * centroid[j] - 2.0 * vertex[worst][j];
      const double fe = value(xx);
      if (fe < fr) {
        vertex[worst] = xx;
        f[worst] = fe;
      } else {
        vertex[worst] = xr;
        f[worst] = fr;
      }
      continue;
    }
    if (fr < f[second]) {
      vertex[worst] = xr;
      f[worst] = fr;
      continue;
    }
    const bool outside = fr < f[worst];
    for (int j = 0; j < p; ++j)
      xx[j] = outside ? 1.5 * centroid[j] - 0.5 * vertex[worst][j]
                      : 0.5 * centroid[j] + 0.5 * vertex[worst][j];
    const double fc = value(xx);
    if (fc < std::min(fr, f[worst])) {
      vertex[worst] = xx;
      f[worst] = fc;
      continue;
    }
    for (int i = 0; i <= p; ++i) {
      if (i == best) continue;
      for (int j = 0; j < p; ++j)
        vertex[i][j] = 0.5 * (vertex[i][j] + vertex[best][j]);
      f[i] = value(vertex[i]);
    }
  }

  int best = 0;
  for (int i = 1; i <= p; ++i)
    if (f[i] < f[best]) best = i;
  return vertex[best];
}

// Enumerate compositions of denom into nu nonnegative parts, in the same
// first-part-descending order used elsewhere.
std::vector<std::vector<double>> row_grid(int nu, int denom) {
  std::vector<std::vector<double>> rows;
  std::vector<int> comp(nu, 0);
  comp[0] = denom;
  while (true) {
    std::vector<double> row(nu);
    for (int i = 0; i < nu; ++i) row[i] = static_cast<double>(comp[i]) / denom;
    rows.push_back(std::move(row));
    int pivot = -1;
    for (int i = nu - 2; i >= 0; --i)
      if (comp[i] > 0) {
        pivot = i;
        break;
      }
    if (pivot < 0) break;
    const int tail = comp[nu - 1];
    comp[pivot] -= 1;
    comp[nu - 1] = 0;
    comp[pivot + 1] = tail + 1;
  }
  return rows;
}

}  // namespace

WzResult wyner_ziv(const std::vector<double>& pxy, int nx, int ny,
                   const std::vector<ExtendedReal>& cost, int nhat, double D,
                   const WzOptions& opts) {
  if (nx < 1 || ny < 1 || nhat < 1)
    throw std::invalid_argument("alphabet sizes must be positive");
  if (pxy.size() != static_cast<size_t>(nx) * ny)
    throw std::invalid_argument("joint pmf size does not match nx * ny");
  if (cost.size() != static_cast<size_t>(nx) * nhat)
    throw std::invalid_argument("cost size does not match nx * nhat");
  if (!std::isfinite(D) || D < 0.0)
    throw std::invalid_argument("D must be a finite nonnegative real");
  double total = 0.0;
  for (double v : pxy) {
    if (!std::isfinite(v) || v < 0.0)
      throw std::invalid_argument("joint pmf entries must be finite and nonnegative");
    total += v;
  }
  if (std::abs(total - 1.0) > 1e-9)
    throw std::invalid_argument("joint pmf must sum to one");
  if (opts.restarts < 1) throw std::invalid_argument("restarts must be positive");

  const int nu = opts.u_card > 0 ? opts.u_card : nx + 1;

  // Unbeatable floor: each source letter decoded to its cheapest finite
  // reproduction.  A row with no finite entry makes every target infeasible.
  std::vector<double> px(nx, 0.0);
  for (int x = 0; x < nx; ++x)
    for (int y = 0; y < ny; ++y) px[x] += pxy[static_cast<size_t>(x) * ny + y];
  double floor = 0.0;
  bool floor_finite = true;
  for (int x = 0; x < nx; ++x) {
    if (px[x] <= 0.0) continue;
    double best = std::numeric_limits<double>::infinity();
    for (int h = 0; h < nhat; ++h) {
      const ExtendedReal& c = cost[static_cast<size_t>(x) * nhat + h];
      if (!c.is_infinite()) best = std::min(best, c.finite_value());
    }
    if (!std::isfinite(best)) {
      floor_finite = false;
      break;
    }
    floor += px[x] * best;
  }
  if (!floor_finite || D < floor - 1e-12) {
    WzResult out;
    out.status = SolveStatus::infeasible;
    out.distortion = std::numeric_limits<double>::infinity();
    return out;
  }

  // Start list: exhaustive coarse-grid seeds when the free-parameter count is
  // small, then an identity-like channel and random rows.
  std::vector<std::vector<double>> starts;
  WzEngine seeder(pxy, nx, ny, cost, nhat, nu, D);
  if (seeder.params() <= 4 && seeder.params() > 0) {
    const auto rows = row_grid(nu, opts.grid_denominator);
    std::vector<std::pair<double, size_t>> ranked;
    const size_t combos = [&] {
      size_t c = 1;
      for (int x = 0; x < nx; ++x) c *= rows.size();
      return c;
    }();
    std::vector<double> channel(static_cast<size_t>(nx) * nu);
    for (size_t code = 0; code < combos; ++code) {
      size_t rest = code;
      for (int x = 0; x < nx; ++x) {
        const auto& row = rows[rest % rows.size()];
        rest /= rows.size();
        std::copy(row.begin(), row.end(),
                  channel.begin() + static_cast<size_t>(x) * nu);
      }
      ranked.emplace_back(seeder.evaluate(channel).penalized, code);
    }
    std::sort(ranked.begin(), ranked.end());
    const int keep = std::min<int>(opts.restarts, std::min<size_t>(8, ranked.size()));
    for (int i = 0; i < keep; ++i) {
      size_t rest = ranked[i].second;
      for (int x = 0; x < nx; ++x) {
        const auto& row = rows[rest % rows.size()];
        rest /= rows.size();
        std::copy(row.begin(), row.end(),
                  channel.begin() + static_cast<size_t>(x) * nu);
      }
      starts.push_back(params_from_channel(channel, nx, nu));
    }
  } else {
    std::vector<double> uniform(static_cast<size_t>(nx) * nu, 1.0 / nu);
    starts.push_back(params_from_channel(uniform, nx, nu));
  }
  {
    std::vector<double> ident(static_cast<size_t>(nx) * nu, 0.0);
    for (int x = 0; x < nx; ++x) ident[static_cast<size_t>(x) * nu + (x % nu)] = 1.0;
    starts.push_back(params_from_channel(ident, nx, nu));
  }
  while (static_cast<int>(starts.size()) < opts.restarts) {
    std::mt19937_64 rng(opts.seed + kGolden * (starts.size() + 1));
    std::uniform_real_distribution<double> unif(1e-12, 1.0);
    std::vector<double> channel(static_cast<size_t>(nx) * nu);
    for (int x = 0; x < nx; ++x) {
      double sum = 0.0;
      for (int u = 0; u < nu; ++u) {
        const double e = -std::log(unif(rng));
        channel[static_cast<size_t>(x) * nu + u] = e;
        sum += e;
      }
      for (int u = 0; u < nu; ++u) channel[static_cast<size_t>(x) * nu + u] /= sum;
    }
    starts.push_back(params_from_channel(channel, nx, nu));
  }

  struct Slot {
    double penalized = kHugePenalty;
    std::vector<double> theta;
  };
  std::vector<Slot> slots(starts.size());
  const bool par = opts.policy == ExecPolicy::parallel && starts.size() > 1;
#pragma omp parallel for schedule(dynamic, 1) if (par)
  for (int i = 0; i < static_cast<int>(starts.size()); ++i) {
    WzEngine engine(pxy, nx, ny, cost, nhat, nu, D);
    auto theta = refine(engine, starts[i], nx, nu, opts.refine_iterations);
    slots[i].penalized = engine.evaluate(channel_from_params(theta, nx, nu)).penalized;
    slots[i].theta = std::move(theta);
  }
  int winner = 0;
  for (int i = 1; i < static_cast<int>(slots.size()); ++i)
    if (slots[i].penalized < slots[winner].penalized) winner = i;

  WzEngine engine(pxy, nx, ny, cost, nhat, nu, D);
  std::vector<double> channel = channel_from_params(slots[winner].theta, nx, nu);
  Evaluation eval = engine.evaluate(channel);

  if (eval.distortion > D + opts.distortion_tol) {
    // Pull toward the identity-like channel, whose optimal decoder attains
    // the floor; the smallest feasible blend is located by bisection.
    std::vector<double> ident(channel.size(), 0.0);
    for (int x = 0; x < nx; ++x) ident[static_cast<size_t>(x) * nu + (x % nu)] = 1.0;
    if (engine.evaluate(ident).distortion > D + opts.distortion_tol)
      throw NumericalViolation("refined channel could not meet the distortion target");
    double lo = 0.0, hi = 1.0;
    std::vector<double> mix(channel.size());
    for (int it = 0; it < 60; ++it) {
      const double t = 0.5 * (lo + hi);
      for (size_t j = 0; j < mix.size(); ++j)
        mix[j] = (1.0 - t) * channel[j] + t * ident[j];
      if (engine.evaluate(mix).distortion <= D) {
        hi = t;
      } else {
        lo = t;
      }
    }
    for (size_t j = 0; j < mix.size(); ++j)
      mix[j] = (1.0 - hi) * channel[j] + hi * ident[j];
    channel = std::move(mix);
    eval = engine.evaluate(channel);
  }

  WzResult out;
  out.status = SolveStatus::locally_optimal;
  out.rate_bits = eval.rate_bits;
  out.distortion = eval.distortion;
  out.channel = std::move(channel);
  out.decoder = std::move(eval.decoder);
  return out;
}

}  // namespace rdtrunc
