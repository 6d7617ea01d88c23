// Joint pmfs over product alphabets and their information measures:
// marginalization, conditional mutual information (bits, direct summation)
// and extended-real expected distortion.

#ifndef RDTRUNC_PMF_HPP
#define RDTRUNC_PMF_HPP

#include <vector>

#include "rdtrunc/alphabet.hpp"
#include "rdtrunc/extended.hpp"

namespace rdtrunc {

inline constexpr double kPmfSumTol = 1e-12;

class JointPmf {
 public:
  JointPmf(AlphabetLayout layout, std::vector<double> mass);

  static JointPmf uniform(const AlphabetLayout& layout);

  const AlphabetLayout& layout() const { return layout_; }
  const std::vector<double>& mass() const { return mass_; }
  double at(const AlphabetLayout::Coords& c) const { return mass_[layout_.index(c)]; }

 private:
  AlphabetLayout layout_;
  std::vector<double> mass_;
};

// Nonnegative extended-real cost per cell; at least one entry must be finite.
class ExtendedDistortionVector {
 public:
  ExtendedDistortionVector(AlphabetLayout layout, std::vector<ExtendedReal> cost);

  const AlphabetLayout& layout() const { return layout_; }
  const std::vector<ExtendedReal>& cost() const { return cost_; }
  bool all_finite() const;
  bool leq(const ExtendedDistortionVector& other) const;  // componentwise

 private:
  AlphabetLayout layout_;
  std::vector<ExtendedReal> cost_;
};

// Sums mass over the dropped factors; output is over the kept factors.
JointPmf marginalize(const JointPmf& p, FactorSet keep);

// I(A;B|C) in bits by direct summation; zero-mass terms contribute 0.
// a and b must be nonempty, a/b/c pairwise disjoint; empty c gives I(A;B).
double conditional_mutual_information(const JointPmf& p, FactorSet a, FactorSet b,
                                      FactorSet c);

// <p, d> with 0 * infinity = 0; infinite iff positive mass meets infinite cost.
ExtendedReal expected_distortion(const JointPmf& p, const ExtendedDistortionVector& d);

// Precompiled I(A;B|C) evaluation on raw mass vectors of a fixed layout.
// Built once, then evaluated many times inside solver loops; each instance
// owns its scratch buffers, so use one instance per thread.
class CmiEvaluator {
 public:
  CmiEvaluator(const AlphabetLayout& layout, FactorSet a, FactorSet b, FactorSet c);

  // Value in bits.
  double value(const std::vector<double>& mass);

  // Value in bits; adds coeff * dI/dp into grad (length cell_count).
  double value_and_grad(const std::vector<double>& mass, double coeff,
                        std::vector<double>& grad);

 private:
  void accumulate(const std::vector<double>& mass);

  std::vector<int32_t> to_abc_;  // full cell -> abc marginal cell
  std::vector<int32_t> abc_to_ac_, abc_to_bc_, abc_to_c_;
  std::vector<double> m_abc_, m_ac_, m_bc_, m_c_;
  double total_ = 0.0;  // stands in for the C marginal when C is empty
  bool c_empty_ = false;
};

}  // namespace rdtrunc

#endif  // RDTRUNC_PMF_HPP
