#include "rdtrunc/objective.hpp"

#include <sstream>
#include <stdexcept>

namespace rdtrunc {

MITerm::MITerm(double coefficient_, FactorSet a_, FactorSet b_, FactorSet c_)
    : coefficient(coefficient_), a(a_), b(b_), c(c_) {
  if (!std::isfinite(coefficient)) {
    throw std::invalid_argument("MITerm: coefficient must be finite");
  }
  if (a.empty() || b.empty()) {
    throw std::invalid_argument("MITerm: argument groups A and B must be nonempty");
  }
  if (!a.disjoint_with(b) || !a.disjoint_with(c) || !b.disjoint_with(c)) {
    throw std::invalid_argument("MITerm: argument groups must be pairwise disjoint");
  }
}

namespace {

std::string joined(FactorSet s) {
  std::string out;
  for (Factor f : s.members()) {
    if (!out.empty()) out += ",";
    out += factor_name(f);
  }
  return out;
}

}  // namespace

std::string MITerm::str() const {
  std::ostringstream os;
  os << coefficient << "*I(" << joined(a) << ";" << joined(b);
  if (!c.empty()) os << "|" << joined(c);
  os << ")";
  return os.str();
}

ObjectiveSpec::ObjectiveSpec(std::vector<MITerm> terms_) : terms(std::move(terms_)) {
  if (terms.empty()) {
    throw std::invalid_argument("ObjectiveSpec: at least one term required");
  }
}

bool ObjectiveSpec::has_negative_coefficient() const {
  for (const MITerm& t : terms) {
    if (t.coefficient < 0.0) return true;
  }
  return false;
}

std::string ObjectiveSpec::str() const {
  std::ostringstream os;
  for (size_t i = 0; i < terms.size(); ++i) {
    if (i > 0) os << " + ";
    os << terms[i].str();
  }
  return os.str();
}

double evaluate(const ObjectiveSpec& obj, const JointPmf& p) {
  double total = 0.0;
  for (const MITerm& t : obj.terms) {
    total += t.coefficient * conditional_mutual_information(p, t.a, t.b, t.c);
  }
  return total;
}

CompiledObjective::CompiledObjective(const ObjectiveSpec& obj, const AlphabetLayout& layout) {
  coeffs_.reserve(obj.terms.size());
  evals_.reserve(obj.terms.size());
  for (const MITerm& t : obj.terms) {
    if (!t.a.subset_of(layout.factors()) || !t.b.subset_of(layout.factors()) ||
        !t.c.subset_of(layout.factors())) {
      throw std::invalid_argument("CompiledObjective: term " + t.str() +
                                  " references factors absent from layout " + layout.str());
    }
    coeffs_.push_back(t.coefficient);
    evals_.emplace_back(layout, t.a, t.b, t.c);
  }
}

double CompiledObjective::value(const std::vector<double>& mass) {
  double total = 0.0;
  for (size_t i = 0; i < evals_.size(); ++i) {
    total += coeffs_[i] * evals_[i].value(mass);
  }
  return total;
}

double CompiledObjective::value_and_grad(const std::vector<double>& mass,
                                         std::vector<double>& grad) {
  grad.assign(mass.size(), 0.0);
  double total = 0.0;
  for (size_t i = 0; i < evals_.size(); ++i) {
    total += coeffs_[i] * evals_[i].value_and_grad(mass, coeffs_[i], grad);
  }
  return total;
}

}  // namespace rdtrunc
