// Product alphabets over the four variable slots X, Y, U, Xhat and the
// row-major cell indexing used by every pmf and distortion vector.

#ifndef RDTRUNC_ALPHABET_HPP
#define RDTRUNC_ALPHABET_HPP

#include <array>
#include <cstdint>
#include <initializer_list>
#include <string>
#include <utility>
#include <vector>

namespace rdtrunc {

enum class Factor : uint8_t { X = 0, Y = 1, U = 2, Xhat = 3 };

inline constexpr int kFactorCount = 4;

const char* factor_name(Factor f);

// Small set of factors, stored as a bitmask over the four slots.
class FactorSet {
 public:
  constexpr FactorSet() : bits_(0) {}
  FactorSet(std::initializer_list<Factor> fs) : bits_(0) {
    for (Factor f : fs) bits_ |= bit(f);
  }

  static FactorSet all_of(const std::vector<Factor>& fs) {
    FactorSet s;
    for (Factor f : fs) s.bits_ |= bit(f);
    return s;
  }

  bool contains(Factor f) const { return (bits_ & bit(f)) != 0; }
  bool empty() const { return bits_ == 0; }
  int count() const;
  bool disjoint_with(FactorSet o) const { return (bits_ & o.bits_) == 0; }
  bool subset_of(FactorSet o) const { return (bits_ & ~o.bits_) == 0; }
  FactorSet united_with(FactorSet o) const {
    FactorSet s;
    s.bits_ = static_cast<uint8_t>(bits_ | o.bits_);
    return s;
  }

  // Present factors in canonical X, Y, U, Xhat order.
  std::vector<Factor> members() const;

  std::string str() const;

  bool operator==(const FactorSet& o) const { return bits_ == o.bits_; }

 private:
  static constexpr uint8_t bit(Factor f) {
    return static_cast<uint8_t>(1u << static_cast<uint8_t>(f));
  }
  uint8_t bits_;
};

// Sizes of the present factors plus the cell <-> coordinate bijection.
// Absent factors have size 0 and coordinate fixed at 0. Cells are indexed
// row-major in canonical factor order (Xhat varies fastest).
class AlphabetLayout {
 public:
  using Coords = std::array<int, kFactorCount>;

  // sizes[f] >= 1 for present factors, 0 for absent ones.
  static AlphabetLayout make(const std::array<int, kFactorCount>& sizes);
  static AlphabetLayout make(std::initializer_list<std::pair<Factor, int>> sizes);

  bool has(Factor f) const { return sizes_[static_cast<int>(f)] > 0; }
  int size(Factor f) const { return sizes_[static_cast<int>(f)]; }
  int cell_count() const { return cell_count_; }
  FactorSet factors() const;

  int index(const Coords& c) const;
  Coords coords(int index) const;

  // Layout over a subset of this layout's factors.
  AlphabetLayout marginal_layout(FactorSet keep) const;

  // Map from this layout's cells onto the kept-factor sub-layout's cells.
  std::vector<int32_t> cell_map_onto(const AlphabetLayout& sub) const;

  bool operator==(const AlphabetLayout& o) const { return sizes_ == o.sizes_; }
  bool operator!=(const AlphabetLayout& o) const { return !(*this == o); }

  std::string str() const;

 private:
  AlphabetLayout() = default;

  std::array<int, kFactorCount> sizes_{0, 0, 0, 0};
  std::array<int, kFactorCount> strides_{0, 0, 0, 0};
  int cell_count_ = 0;
};

inline constexpr int kMaxCells = 65536;

}  // namespace rdtrunc

#endif  // RDTRUNC_ALPHABET_HPP
