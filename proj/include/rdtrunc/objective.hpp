// Objectives: finite linear combinations of conditional mutual informations.

#ifndef RDTRUNC_OBJECTIVE_HPP
#define RDTRUNC_OBJECTIVE_HPP

#include <memory>
#include <string>
#include <vector>

#include "rdtrunc/pmf.hpp"

namespace rdtrunc {

struct MITerm {
  double coefficient;
  FactorSet a, b, c;

  MITerm(double coefficient_, FactorSet a_, FactorSet b_, FactorSet c_ = {});
  std::string str() const;
};

struct ObjectiveSpec {
  std::vector<MITerm> terms;

  explicit ObjectiveSpec(std::vector<MITerm> terms_);
  bool has_negative_coefficient() const;
  std::string str() const;
};

double evaluate(const ObjectiveSpec& obj, const JointPmf& p);

// Term evaluators bound to one layout, reusable across many mass vectors.
// Not shareable across threads; make one per worker.
class CompiledObjective {
 public:
  CompiledObjective(const ObjectiveSpec& obj, const AlphabetLayout& layout);

  double value(const std::vector<double>& mass);
  double value_and_grad(const std::vector<double>& mass, std::vector<double>& grad);

 private:
  std::vector<double> coeffs_;
  std::vector<CmiEvaluator> evals_;
};

}  // namespace rdtrunc

#endif  // RDTRUNC_OBJECTIVE_HPP
