#pragma once

#include <cstdint>
#include <numeric>
#include <string>

#include "dicewalk/errors.hpp"

namespace dicewalk {

// Exact rational on 64-bit numerator/denominator with 128-bit
// intermediates. Covers die probabilities and the enumeration oracle;
// anything hotter consumes the double view. Overflow throws rather than
// wrapping.
class rational {
 public:
  constexpr rational() : num_(0), den_(1) {}
  constexpr rational(long long n) : num_(n), den_(1) {}
  rational(long long num, long long den) : num_(num), den_(den) {
    if (den_ == 0) throw error(errc::invalid_input, "rational: zero denominator");
    normalize();
  }

  long long num() const { return num_; }
  long long den() const { return den_; }
  double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }
  bool is_zero() const { return num_ == 0; }

  friend rational operator+(const rational& a, const rational& b) {
    __int128 n = i128(a.num_) * b.den_ + i128(b.num_) * a.den_;
    __int128 d = i128(a.den_) * b.den_;
    return from_i128(n, d);
  }
  friend rational operator-(const rational& a, const rational& b) {
    __int128 n = i128(a.num_) * b.den_ - i128(b.num_) * a.den_;
    __int128 d = i128(a.den_) * b.den_;
    return from_i128(n, d);
  }
  friend rational operator*(const rational& a, const rational& b) {
    return from_i128(i128(a.num_) * b.num_, i128(a.den_) * b.den_);
  }
  friend rational operator/(const rational& a, const rational& b) {
    if (b.num_ == 0) throw error(errc::invalid_input, "rational: division by zero");
    return from_i128(i128(a.num_) * b.den_, i128(a.den_) * b.num_);
  }
  rational& operator+=(const rational& o) { return *this = *this + o; }
  rational& operator-=(const rational& o) { return *this = *this - o; }
  rational& operator*=(const rational& o) { return *this = *this * o; }

  friend bool operator==(const rational& a, const rational& b) {
    return a.num_ == b.num_ && a.den_ == b.den_;
  }
  friend bool operator!=(const rational& a, const rational& b) { return !(a == b); }
  friend bool operator<(const rational& a, const rational& b) {
    return i128(a.num_) * b.den_ < i128(b.num_) * a.den_;
  }

  std::string str() const {
    return den_ == 1 ? std::to_string(num_)
                     : std::to_string(num_) + "/" + std::to_string(den_);
  }

 private:
  using i128 = __int128;

  static rational from_i128(i128 n, i128 d) {
    if (d < 0) { n = -n; d = -d; }
    i128 g = gcd128(n < 0 ? -n : n, d);
    if (g > 1) { n /= g; d /= g; }
    constexpr i128 lo = INT64_MIN, hi = INT64_MAX;
    if (n < lo || n > hi || d > hi)
      throw error(errc::numeric, "rational: overflow after reduction");
    rational r;
    r.num_ = static_cast<long long>(n);
    r.den_ = static_cast<long long>(d);
    return r;
  }

  static i128 gcd128(i128 a, i128 b) {
    while (b != 0) { i128 t = a % b; a = b; b = t; }
    return a == 0 ? 1 : a;
  }

  void normalize() {
    if (den_ < 0) { num_ = -num_; den_ = -den_; }
    long long g = std::gcd(num_ < 0 ? -num_ : num_, den_);
    if (g > 1) { num_ /= g; den_ /= g; }
  }

  long long num_, den_;  // den_ > 0, gcd(|num_|, den_) == 1
};

}  // namespace dicewalk
