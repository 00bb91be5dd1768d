#pragma once

#include <cmath>
#include <compare>
#include <stdexcept>
#include <string>

namespace mkdual {

/// Extended real number: a finite double or one of the two infinities,
/// carried as an explicit tag. Non-finite doubles are rejected at the
/// boundary so a value like 1e308 or HUGE_VAL can never stand in for a
/// forbidden cell.
class Extended {
 public:
  enum class Kind : unsigned char { Finite, PosInf, NegInf };

  constexpr Extended() = default;
  explicit Extended(double v) : value_(v) {
    if (!std::isfinite(v)) throw std::invalid_argument("Extended: non-finite double");
  }

  static constexpr Extended infinity() { return Extended(Kind::PosInf); }
  static constexpr Extended neg_infinity() { return Extended(Kind::NegInf); }

  constexpr Kind kind() const { return kind_; }
  constexpr bool is_finite() const { return kind_ == Kind::Finite; }
  constexpr bool is_pos_inf() const { return kind_ == Kind::PosInf; }
  constexpr bool is_neg_inf() const { return kind_ == Kind::NegInf; }

  double value() const {
    if (!is_finite()) throw std::logic_error("Extended::value on infinite value");
    return value_;
  }
  /// Lossy view for reporting only.
  double to_double() const {
    switch (kind_) {
      case Kind::PosInf: return HUGE_VAL;
      case Kind::NegInf: return -HUGE_VAL;
      default: return value_;
    }
  }

  /// Sum; -inf absorbs everything, +inf absorbs finite values.
  /// (+inf) + (-inf) is undefined and throws.
  friend Extended operator+(Extended a, Extended b) {
    if (a.is_finite() && b.is_finite()) return Extended(a.value_ + b.value_);
    if ((a.is_pos_inf() && b.is_neg_inf()) || (a.is_neg_inf() && b.is_pos_inf()))
      throw std::domain_error("Extended: inf - inf");
    return a.is_finite() ? b : a;
  }
  friend Extended operator-(Extended a) {
    switch (a.kind_) {
      case Kind::PosInf: return neg_infinity();
      case Kind::NegInf: return infinity();
      default: return Extended(-a.value_);
    }
  }
  friend Extended operator-(Extended a, Extended b) { return a + (-b); }

  /// Scaling by a nonnegative weight with 0 * inf = 0.
  friend Extended scale(double w, Extended a) {
    if (w < 0.0 || !std::isfinite(w)) throw std::invalid_argument("Extended: bad weight");
    if (w == 0.0) return Extended(0.0);
    return a.is_finite() ? Extended(w * a.value_) : a;
  }

  friend std::partial_ordering operator<=>(Extended a, Extended b) {
    auto rank = [](Extended e) { return e.is_neg_inf() ? -1 : e.is_pos_inf() ? 1 : 0; };
    if (rank(a) != rank(b)) return rank(a) <=> rank(b);
    if (a.is_finite()) return a.value_ <=> b.value_;
    return std::partial_ordering::equivalent;
  }
  friend bool operator==(Extended a, Extended b) {
    return a.kind_ == b.kind_ && (!a.is_finite() || a.value_ == b.value_);
  }

  std::string str() const;

 private:
  constexpr explicit Extended(Kind k) : kind_(k) {}

  double value_ = 0.0;
  Kind kind_ = Kind::Finite;
};

}  // namespace mkdual
