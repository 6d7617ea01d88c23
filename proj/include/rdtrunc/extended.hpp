// Extended-real scalar: a finite double or a distinguished infinity tag.
//
// Distortion entries and expected distortions can take the value infinity.
// We keep infinity as an explicit tag rather than an IEEE inf so that the
// product 0 * infinity is defined to be 0 and sums saturate without NaNs.

#ifndef RDTRUNC_EXTENDED_HPP
#define RDTRUNC_EXTENDED_HPP

#include <cmath>
#include <stdexcept>
#include <string>

namespace rdtrunc {

class ExtendedReal {
 public:
  constexpr ExtendedReal() : value_(0.0), infinite_(false) {}

  static constexpr ExtendedReal finite(double v) { return ExtendedReal(v, false); }
  static constexpr ExtendedReal infinity() { return ExtendedReal(0.0, true); }

  constexpr bool is_infinite() const { return infinite_; }
  constexpr bool is_finite() const { return !infinite_; }

  // Finite value; calling this on the infinity tag is a caller bug.
  double finite_value() const {
    if (infinite_) throw std::logic_error("ExtendedReal: finite_value() on infinity");
    return value_;
  }

  ExtendedReal operator+(const ExtendedReal& o) const {
    if (infinite_ || o.infinite_) return infinity();
    return finite(value_ + o.value_);
  }

  ExtendedReal operator-(double finite_rhs) const {
    if (infinite_) return infinity();
    return finite(value_ - finite_rhs);
  }

  // p * d with the convention 0 * infinity = 0; p must be a finite weight.
  ExtendedReal scaled_by(double p) const {
    if (p == 0.0) return finite(0.0);
    if (infinite_) return infinity();
    return finite(p * value_);
  }

  bool operator==(const ExtendedReal& o) const {
    if (infinite_ != o.infinite_) return false;
    return infinite_ || value_ == o.value_;
  }
  bool operator<(const ExtendedReal& o) const {
    if (infinite_) return false;           // inf < anything is false
    if (o.infinite_) return true;          // finite < inf
    return value_ < o.value_;
  }
  bool operator<=(const ExtendedReal& o) const { return *this < o || *this == o; }
  bool operator>(const ExtendedReal& o) const { return o < *this; }
  bool operator>=(const ExtendedReal& o) const { return o <= *this; }

  bool operator<=(double finite_rhs) const {
    return !infinite_ && value_ <= finite_rhs;
  }

  std::string str() const {
    return infinite_ ? std::string("inf") : std::to_string(value_);
  }

 private:
  constexpr ExtendedReal(double v, bool inf) : value_(v), infinite_(inf) {}

  double value_;
  bool infinite_;
};

}  // namespace rdtrunc

#endif  // RDTRUNC_EXTENDED_HPP
