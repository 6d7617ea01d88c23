#include "rdtrunc/alphabet.hpp"

#include <bit>
#include <stdexcept>

namespace rdtrunc {

const char* factor_name(Factor f) {
  switch (f) {
    case Factor::X: return "X";
    case Factor::Y: return "Y";
    case Factor::U: return "U";
    case Factor::Xhat: return "Xhat";
  }
  return "?";
}

int FactorSet::count() const { return std::popcount(bits_); }

std::vector<Factor> FactorSet::members() const {
  std::vector<Factor> out;
  for (int i = 0; i < kFactorCount; ++i) {
    Factor f = static_cast<Factor>(i);
    if (contains(f)) out.push_back(f);
  }
  return out;
}

std::string FactorSet::str() const {
  std::string s = "{";
  bool first = true;
  for (Factor f : members()) {
    if (!first) s += ",";
    s += factor_name(f);
    first = false;
  }
  return s + "}";
}

AlphabetLayout AlphabetLayout::make(const std::array<int, kFactorCount>& sizes) {
  AlphabetLayout l;
  l.sizes_ = sizes;
  long long k = 1;
  bool any_present = false;
  for (int i = 0; i < kFactorCount; ++i) {
    if (sizes[i] < 0) throw std::invalid_argument("AlphabetLayout: negative factor size");
    if (sizes[i] > 0) {
      k *= sizes[i];
      any_present = true;
    }
  }
  if (!any_present) throw std::invalid_argument("AlphabetLayout: at least one factor required");
  if (k > kMaxCells) throw std::invalid_argument("AlphabetLayout: exceeds cell cap");
  l.cell_count_ = static_cast<int>(k);

  // Row-major over present factors: last present factor varies fastest.
  int stride = 1;
  for (int i = kFactorCount - 1; i >= 0; --i) {
    if (sizes[i] > 0) {
      l.strides_[i] = stride;
      stride *= sizes[i];
    } else {
      l.strides_[i] = 0;
    }
  }
  return l;
}

AlphabetLayout AlphabetLayout::make(std::initializer_list<std::pair<Factor, int>> sizes) {
  std::array<int, kFactorCount> arr{0, 0, 0, 0};
  for (const auto& [f, n] : sizes) arr[static_cast<int>(f)] = n;
  return make(arr);
}

FactorSet AlphabetLayout::factors() const {
  FactorSet s;
  std::vector<Factor> present;
  for (int i = 0; i < kFactorCount; ++i)
    if (sizes_[i] > 0) present.push_back(static_cast<Factor>(i));
  return FactorSet::all_of(present);
}

int AlphabetLayout::index(const Coords& c) const {
  int idx = 0;
  for (int i = 0; i < kFactorCount; ++i) {
    if (sizes_[i] == 0) {
      if (c[i] != 0) throw std::invalid_argument("AlphabetLayout: coordinate on absent factor");
      continue;
    }
    if (c[i] < 0 || c[i] >= sizes_[i])
      throw std::invalid_argument("AlphabetLayout: coordinate out of range");
    idx += c[i] * strides_[i];
  }
  return idx;
}

AlphabetLayout::Coords AlphabetLayout::coords(int index) const {
  if (index < 0 || index >= cell_count_)
    throw std::invalid_argument("AlphabetLayout: cell index out of range");
  Coords c{0, 0, 0, 0};
  for (int i = 0; i < kFactorCount; ++i) {
    if (sizes_[i] > 0) c[i] = (index / strides_[i]) % sizes_[i];
  }
  return c;
}

AlphabetLayout AlphabetLayout::marginal_layout(FactorSet keep) const {
  if (!keep.subset_of(factors()))
    throw std::invalid_argument("AlphabetLayout: kept factor not present");
  std::array<int, kFactorCount> sub{0, 0, 0, 0};
  for (int i = 0; i < kFactorCount; ++i)
    if (keep.contains(static_cast<Factor>(i))) sub[i] = sizes_[i];
  return make(sub);
}

std::vector<int32_t> AlphabetLayout::cell_map_onto(const AlphabetLayout& sub) const {
  std::vector<int32_t> map(cell_count_);
  for (int i = 0; i < cell_count_; ++i) {
    Coords c = coords(i);
    for (int f = 0; f < kFactorCount; ++f)
      if (!sub.has(static_cast<Factor>(f))) c[f] = 0;
    map[i] = sub.index(c);
  }
  return map;
}

std::string AlphabetLayout::str() const {
  std::string s;
  for (int i = 0; i < kFactorCount; ++i) {
    if (sizes_[i] == 0) continue;
    if (!s.empty()) s += "x";
    s += std::string(factor_name(static_cast<Factor>(i))) + ":" + std::to_string(sizes_[i]);
  }
  return s;
}

}  // namespace rdtrunc
