#include "rdtrunc/pmf.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rdtrunc {

namespace {

// Gradient log-ratios are clamped so descent steps stay finite when a cell
// carries no mass.
constexpr double kLogRatioClamp = 120.0;

void check_layout_match(const AlphabetLayout& a, const AlphabetLayout& b,
                        const char* what) {
  if (a != b) throw std::invalid_argument(std::string(what) + ": layout mismatch");
}

}  // namespace

JointPmf::JointPmf(AlphabetLayout layout, std::vector<double> mass)
    : layout_(layout), mass_(std::move(mass)) {
  if (static_cast<int>(mass_.size()) != layout_.cell_count())
    throw std::invalid_argument("JointPmf: mass length != cell count");
  double sum = 0.0;
  for (double m : mass_) {
    if (!(m >= 0.0)) throw std::invalid_argument("JointPmf: negative or NaN mass");
    sum += m;
  }
  if (std::abs(sum - 1.0) > kPmfSumTol)
    throw std::invalid_argument("JointPmf: mass does not sum to 1");
}

JointPmf JointPmf::uniform(const AlphabetLayout& layout) {
  const int k = layout.cell_count();
  return JointPmf(layout, std::vector<double>(k, 1.0 / k));
}

ExtendedDistortionVector::ExtendedDistortionVector(AlphabetLayout layout,
                                                   std::vector<ExtendedReal> cost)
    : layout_(layout), cost_(std::move(cost)) {
  if (static_cast<int>(cost_.size()) != layout_.cell_count())
    throw std::invalid_argument("ExtendedDistortionVector: cost length != cell count");
  bool any_finite = false;
  for (const ExtendedReal& c : cost_) {
    if (c.is_finite()) {
      if (c.finite_value() < 0.0)
        throw std::invalid_argument("ExtendedDistortionVector: negative cost");
      any_finite = true;
    }
  }
  if (!any_finite)
    throw std::invalid_argument("at least one finite distortion entry required");
}

bool ExtendedDistortionVector::all_finite() const {
  return std::all_of(cost_.begin(), cost_.end(),
                     [](const ExtendedReal& c) { return c.is_finite(); });
}

bool ExtendedDistortionVector::leq(const ExtendedDistortionVector& other) const {
  check_layout_match(layout_, other.layout_, "ExtendedDistortionVector::leq");
  for (size_t i = 0; i < cost_.size(); ++i)
    if (!(cost_[i] <= other.cost_[i])) return false;
  return true;
}

JointPmf marginalize(const JointPmf& p, FactorSet keep) {
  if (keep.empty()) throw std::invalid_argument("marginalize: empty keep set");
  const AlphabetLayout sub = p.layout().marginal_layout(keep);
  const std::vector<int32_t> map = p.layout().cell_map_onto(sub);
  std::vector<double> out(sub.cell_count(), 0.0);
  const std::vector<double>& mass = p.mass();
  for (size_t i = 0; i < mass.size(); ++i) out[map[i]] += mass[i];
  return JointPmf(sub, std::move(out));
}

CmiEvaluator::CmiEvaluator(const AlphabetLayout& layout, FactorSet a, FactorSet b,
                           FactorSet c) {
  if (a.empty() || b.empty())
    throw std::invalid_argument("conditional MI: a and b must be nonempty");
  if (!a.disjoint_with(b) || !a.disjoint_with(c) || !b.disjoint_with(c))
    throw std::invalid_argument("conditional MI: factor sets must be disjoint");
  FactorSet abc = a.united_with(b).united_with(c);
  if (!abc.subset_of(layout.factors()))
    throw std::invalid_argument("conditional MI: factor not present in layout");

  const AlphabetLayout l_abc = layout.marginal_layout(abc);
  const AlphabetLayout l_ac = layout.marginal_layout(a.united_with(c));
  const AlphabetLayout l_bc = layout.marginal_layout(b.united_with(c));

  to_abc_ = layout.cell_map_onto(l_abc);
  abc_to_ac_ = l_abc.cell_map_onto(l_ac);
  abc_to_bc_ = l_abc.cell_map_onto(l_bc);
  m_abc_.assign(l_abc.cell_count(), 0.0);
  m_ac_.assign(l_ac.cell_count(), 0.0);
  m_bc_.assign(l_bc.cell_count(), 0.0);

  c_empty_ = c.empty();
  if (!c_empty_) {
    const AlphabetLayout l_c = layout.marginal_layout(c);
    abc_to_c_ = l_abc.cell_map_onto(l_c);
    m_c_.assign(l_c.cell_count(), 0.0);
  }
}

void CmiEvaluator::accumulate(const std::vector<double>& mass) {
  std::fill(m_abc_.begin(), m_abc_.end(), 0.0);
  std::fill(m_ac_.begin(), m_ac_.end(), 0.0);
  std::fill(m_bc_.begin(), m_bc_.end(), 0.0);
  std::fill(m_c_.begin(), m_c_.end(), 0.0);
  total_ = 0.0;
  for (size_t i = 0; i < mass.size(); ++i) m_abc_[to_abc_[i]] += mass[i];
  for (size_t j = 0; j < m_abc_.size(); ++j) {
    const double m = m_abc_[j];
    m_ac_[abc_to_ac_[j]] += m;
    m_bc_[abc_to_bc_[j]] += m;
    if (!c_empty_) m_c_[abc_to_c_[j]] += m;
    total_ += m;
  }
}

double CmiEvaluator::value(const std::vector<double>& mass) {
  accumulate(mass);
  double sum = 0.0;
  for (size_t j = 0; j < m_abc_.size(); ++j) {
    const double m = m_abc_[j];
    if (m <= 0.0) continue;
    // Empty C conditions on nothing: its "marginal" is the total mass, which
    // keeps the gradient formula below exact even off the simplex.
    const double mc = c_empty_ ? total_ : m_c_[abc_to_c_[j]];
    sum += m * std::log2(m * mc / (m_ac_[abc_to_ac_[j]] * m_bc_[abc_to_bc_[j]]));
  }
  return std::max(sum, 0.0);
}

double CmiEvaluator::value_and_grad(const std::vector<double>& mass, double coeff,
                                    std::vector<double>& grad) {
  accumulate(mass);
  // dI/dp_i = log2( m_abc(i) m_c(i) / (m_ac(i) m_bc(i)) ), clamped near
  // empty cells where the ratio degenerates.
  std::vector<double>& logr = m_abc_;  // reuse after reading values
  double sum = 0.0;
  for (size_t j = 0; j < m_abc_.size(); ++j) {
    const double m = m_abc_[j];
    const double mc = c_empty_ ? total_ : m_c_[abc_to_c_[j]];
    const double denom = m_ac_[abc_to_ac_[j]] * m_bc_[abc_to_bc_[j]];
    double lr;
    if (m > 0.0 && denom > 0.0) {
      lr = std::log2(m * mc / denom);
      sum += m * lr;
    } else {
      lr = -kLogRatioClamp;
    }
    logr[j] = std::clamp(lr, -kLogRatioClamp, kLogRatioClamp);
  }
  for (size_t i = 0; i < mass.size(); ++i) grad[i] += coeff * logr[to_abc_[i]];
  return std::max(sum, 0.0);
}

double conditional_mutual_information(const JointPmf& p, FactorSet a, FactorSet b,
                                      FactorSet c) {
  CmiEvaluator eval(p.layout(), a, b, c);
  return eval.value(p.mass());
}

ExtendedReal expected_distortion(const JointPmf& p, const ExtendedDistortionVector& d) {
  check_layout_match(p.layout(), d.layout(), "expected_distortion");
  double sum = 0.0;
  const std::vector<double>& mass = p.mass();
  const std::vector<ExtendedReal>& cost = d.cost();
  for (size_t i = 0; i < mass.size(); ++i) {
    if (mass[i] == 0.0) continue;  // 0 * infinity contributes nothing
    if (cost[i].is_infinite()) return ExtendedReal::infinity();
    sum += mass[i] * cost[i].finite_value();
  }
  return ExtendedReal::finite(sum);
}

}  // namespace rdtrunc
