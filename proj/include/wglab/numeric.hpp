#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace wglab {

using u32 = std::uint32_t;
using u64 = std::uint64_t;
using i64 = std::int64_t;
using u128 = unsigned __int128;
using i128 = __int128;

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

inline constexpr long double kTwoPi = 2.0L * std::numbers::pi_v<long double>;
inline constexpr long double kEulerGamma = std::numbers::egamma_v<long double>;

/// Neumaier compensated summation.
class CompensatedSum {
 public:
  void add(long double x) {
    const long double t = sum_ + x;
    if (std::fabs(sum_) >= std::fabs(x)) {
      carry_ += (sum_ - t) + x;
    } else {
      carry_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  CompensatedSum& operator+=(long double x) {
    add(x);
    return *this;
  }
  long double value() const { return sum_ + carry_; }

 private:
  long double sum_ = 0.0L;
  long double carry_ = 0.0L;
};

inline BigInt to_bigint(u128 v) {
  BigInt r = static_cast<u64>(v >> 64);
  r <<= 64;
  r += static_cast<u64>(v);
  return r;
}

inline BigInt to_bigint(i128 v) {
  return v < 0 ? BigInt(-to_bigint(static_cast<u128>(-v))) : to_bigint(static_cast<u128>(v));
}

/// num/den as a long double without materialising either operand as a float;
/// both are shifted down to 64 significant bits first.
inline long double ratio_to_long_double(const BigInt& num, const BigInt& den) {
  if (num == 0) return 0.0L;
  const bool negative = (num < 0) != (den < 0);
  BigInt n = boost::multiprecision::abs(num);
  BigInt d = boost::multiprecision::abs(den);
  const long nb = static_cast<long>(boost::multiprecision::msb(n));
  const long db = static_cast<long>(boost::multiprecision::msb(d));
  const long ns = nb > 63 ? nb - 63 : 0;
  const long ds = db > 63 ? db - 63 : 0;
  n >>= ns;
  d >>= ds;
  const long double value = std::ldexp(static_cast<long double>(n.convert_to<u64>()) /
                                           static_cast<long double>(d.convert_to<u64>()),
                                       static_cast<int>(ns - ds));
  return negative ? -value : value;
}

inline long double to_long_double(const Rational& r) {
  return ratio_to_long_double(boost::multiprecision::numerator(r),
                              boost::multiprecision::denominator(r));
}

/// Product of many integers by pairwise reduction, so operand sizes stay
/// balanced.
inline BigInt product_tree(std::vector<BigInt> v) {
  if (v.empty()) return 1;
  while (v.size() > 1) {
    std::size_t out = 0;
    for (std::size_t i = 0; i + 1 < v.size(); i += 2) v[out++] = v[i] * v[i + 1];
    if (v.size() % 2 == 1) v[out++] = std::move(v.back());
    v.resize(out);
  }
  return v.front();
}

/// Exact conversion of a finite long double (a dyadic rational) to Rational.
inline Rational exact_rational(long double x) {
  if (x == 0.0L) return Rational(0);
  int exponent = 0;
  const long double mantissa = std::frexp(x, &exponent);
  const long double scaled = std::ldexp(mantissa, 64);
  const bool negative = scaled < 0;
  BigInt m = static_cast<u64>(negative ? -scaled : scaled);
  if (negative) m = -m;
  const int shift = exponent - 64;
  if (shift >= 0) return Rational(m << shift);
  return Rational(m, BigInt(1) << -shift);
}

}  // namespace wglab
