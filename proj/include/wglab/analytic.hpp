#pragma once

// Generating series, the major-arc approximations, the v-integrals, the
// singular integral and the Farey dissection.

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>

#include "wglab/arith.hpp"
#include "wglab/errors.hpp"
#include "wglab/local.hpp"
#include "wglab/numeric.hpp"
#include "wglab/params.hpp"
#include "wglab/product_sets.hpp"

namespace wglab {

// ---------------------------------------------------------------------------
// Frequencies as 64-bit fixed-point fractions of a turn

/// alpha mod 1 stored as round(alpha * 2^64). Phases m*alpha mod 1 are then
/// exact wrapping products, so alpha + 1 and alpha give bit-identical series
/// and -alpha gives the exact conjugate.
class Frequency {
 public:
  Frequency() = default;
  static Frequency from_raw(u64 raw) {
    Frequency f;
    f.raw_ = raw;
    return f;
  }
  static Frequency from_real(long double alpha) {
    const long double frac = alpha - std::floor(alpha);
    const long double scaled = std::nearbyint(std::ldexp(frac, 64));
    if (scaled >= std::ldexp(1.0L, 64)) return from_raw(0);
    return from_raw(static_cast<u64>(scaled));
  }
  static Frequency from_rational(const Rational& alpha) {
    const BigInt num = boost::multiprecision::numerator(alpha);
    const BigInt den = boost::multiprecision::denominator(alpha);
    BigInt r = num % den;
    if (r < 0) r += den;
    // nearest integer to r * 2^64 / den
    BigInt scaled = ((r << 65) + den) / (2 * den);
    if (scaled >= (BigInt(1) << 64)) scaled = 0;
    return from_raw(scaled.convert_to<u64>());
  }
  /// a/q + beta, with a/q rounded exactly once.
  static Frequency near(u64 q, i64 a, long double beta) {
    return from_rational(Rational(a, static_cast<i64>(q))) + from_real(beta);
  }

  u64 raw() const { return raw_; }
  long double value() const { return std::ldexp(static_cast<long double>(raw_), -64); }
  u64 phase(u64 m) const { return m * raw_; }

  Frequency operator-() const { return from_raw(0 - raw_); }
  Frequency operator+(Frequency o) const { return from_raw(raw_ + o.raw_); }
  bool operator==(const Frequency&) const = default;

 private:
  u64 raw_ = 0;
};

/// e(phase / 2^64), evaluated at the representative in [-1/2, 1/2).
inline Complex e_phase(u64 phase) {
  if (phase == (1ULL << 63)) return {-1.0L, 0.0L};
  const long double x = std::ldexp(static_cast<long double>(static_cast<i64>(phase)), -64);
  const long double t = kTwoPi * x;
  return {std::cos(t), std::sin(t)};
}

/// e(x) for a real argument, reduced mod 1 first.
inline Complex e_real(long double x) {
  const double t = static_cast<double>(kTwoPi * (x - std::nearbyint(x)));
  return {std::cos(t), std::sin(t)};
}

// ---------------------------------------------------------------------------
// Weyl-type series

enum class SeriesKind { F3, F3Star, f2, f3, f3Star };

inline const char* to_string(SeriesKind k) {
  switch (k) {
    case SeriesKind::F3: return "F3";
    case SeriesKind::F3Star: return "F3*";
    case SeriesKind::f2: return "f2";
    case SeriesKind::f3: return "f3";
    case SeriesKind::f3Star: return "f3*";
  }
  return "?";
}

struct SeriesValue {
  SeriesKind kind = SeriesKind::F3;
  long double alpha = 0;
  Complex value;
  u64 term_count = 0;
  long double weight_total = 0;  // sum of |weights|; equals term_count when unweighted
};

/// Terms of one series, built once and evaluated at many frequencies.
class WeylSeries {
 public:
  WeylSeries(SeriesKind kind, const ScaleParams& params, u64 d = 1) : kind_(kind) {
    if (d == 0) throw DomainError("weyl_series: d must be >= 1");
    switch (kind) {
      case SeriesKind::F3:
        add_integers(params.range_U3(), 3);
        break;
      case SeriesKind::F3Star:
        add_integers(params.range_U3s(), 3);
        break;
      case SeriesKind::f3:
        add_primes(params.range_U3(), 3);
        break;
      case SeriesKind::f3Star:
        add_primes(params.range_U3s(), 3);
        break;
      case SeriesKind::f2: {
        // U2 < d l <= 2U2: the multiples of d in the box.
        const IntRange box = params.range_U2();
        if (!box.empty()) {
          for (u64 m = (box.lo + d - 1) / d * d; m <= box.hi; m += d) {
            powers_.push_back(m * m);
            ++weight_total_;
          }
        }
        break;
      }
    }
  }

  SeriesKind kind() const { return kind_; }
  u64 term_count() const { return powers_.size(); }
  long double weight_total() const { return weight_total_; }

  SeriesValue operator()(Frequency alpha) const {
    detail::ComplexSum sum;
    if (weights_.empty()) {
      for (u64 m : powers_) sum.add(e_phase(alpha.phase(m)));
    } else {
      for (std::size_t i = 0; i < powers_.size(); ++i) sum.add(weights_[i] * e_phase(alpha.phase(powers_[i])));
    }
    return {kind_, alpha.value(), sum.value(), powers_.size(), weight_total_};
  }

 private:
  void add_integers(IntRange r, int k) {
    for (u64 n = r.lo; n <= r.hi && !r.empty(); ++n) {
      powers_.push_back(k == 3 ? n * n * n : n * n);
      ++weight_total_;
    }
  }
  void add_primes(IntRange r, int k) {
    if (r.empty()) return;
    for (u64 p : prime_table(r.lo, r.hi)) {
      powers_.push_back(k == 3 ? p * p * p : p * p);
      const long double w = std::log(static_cast<long double>(p));
      weights_.push_back(w);
      weight_total_ += w;
    }
  }

  SeriesKind kind_;
  std::vector<u64> powers_;
  std::vector<long double> weights_;
  long double weight_total_ = 0;
};

inline SeriesValue weyl_series(SeriesKind kind, Frequency alpha, const ScaleParams& params, u64 d = 1) {
  return WeylSeries(kind, params, d)(alpha);
}

inline SeriesValue weyl_series(SeriesKind kind, long double alpha, const ScaleParams& params, u64 d = 1) {
  SeriesValue v = weyl_series(kind, Frequency::from_real(alpha), params, d);
  v.alpha = alpha;
  return v;
}

// ---------------------------------------------------------------------------
// The sieve-twisted series h(alpha) and its coefficients c(d)

using Coefficient = std::function<long double(u64)>;

struct TwistedCoefficients {
  Coefficient a = [](u64) { return 1.0L; };
  Coefficient b = [](u64) { return 1.0L; };
};

/// Largest m >= 0 with m^3 <= X, so that m <= X^{1/3} is decided without a
/// fractional power.
inline u64 max_cube_le(long double X) {
  if (!(X >= 1)) return 0;
  u64 m = static_cast<u64>(std::cbrt(X));
  auto cube = [](u64 v) { return static_cast<long double>(v) * v * v; };
  while (m > 0 && cube(m) > X) --m;
  while (cube(m + 1) <= X) ++m;
  return m;
}

/// Ranges m <= D^{2/3} and n <= D^{1/3}.
inline std::pair<u64, u64> twisted_ranges(long double D) { return {max_cube_le(D * D), max_cube_le(D)}; }

/// c(d) = sum over d = mn with m <= D^{2/3}, n <= D^{1/3} of a(m) b(n).
inline long double sieve_coefficient_c(u64 d, long double D, const TwistedCoefficients& coef = {}) {
  const auto [M, Nn] = twisted_ranges(D);
  long double c = 0;
  for (u64 n = 1; n <= Nn && n <= d; ++n) {
    if (d % n != 0) continue;
    const u64 m = d / n;
    if (m <= M) c += coef.a(m) * coef.b(n);
  }
  return c;
}

/// h(alpha) by the literal double sum over (m, n) of a(m) b(n) f2(alpha, mn).
inline Complex twisted_series_h(Frequency alpha, const ScaleParams& params, const TwistedCoefficients& coef = {}) {
  const auto [M, Nn] = twisted_ranges(params.D);
  const IntRange box = params.range_U2();
  detail::ComplexSum total;
  if (box.empty()) return 0;
  for (u64 m = 1; m <= M; ++m) {
    const long double am = coef.a(m);
    if (am == 0) continue;
    for (u64 n = 1; n <= Nn; ++n) {
      const long double w = am * coef.b(n);
      if (w == 0) continue;
      const u64 d = m * n;
      if (d > box.hi) break;
      detail::ComplexSum f2;
      for (u64 x = (box.lo + d - 1) / d * d; x <= box.hi; x += d) f2.add(e_phase(alpha.phase(x * x)));
      total.add(w * f2.value());
    }
  }
  return total.value();
}

/// h(alpha) = sum over x in (U2, 2U2] of C(x) e(alpha x^2), with
/// C(x) = sum over d | x of c(d); the coefficients are built once.
class TwistedSeries {
 public:
  TwistedSeries(const ScaleParams& params, const TwistedCoefficients& coef = {}) {
    const auto [M, Nn] = twisted_ranges(params.D);
    const IntRange box = params.range_U2();
    if (box.empty()) return;
    std::vector<long double> C(box.hi - box.lo + 1, 0.0L);
    for (u64 m = 1; m <= M; ++m) {
      const long double am = coef.a(m);
      if (am == 0) continue;
      for (u64 n = 1; n <= Nn; ++n) {
        const long double w = am * coef.b(n);
        const u64 d = m * n;
        if (d > box.hi) break;
        if (w == 0) continue;
        for (u64 x = (box.lo + d - 1) / d * d; x <= box.hi; x += d) C[x - box.lo] += w;
      }
    }
    for (u64 x = box.lo; x <= box.hi; ++x) {
      if (C[x - box.lo] != 0) {
        squares_.push_back(x * x);
        weights_.push_back(C[x - box.lo]);
      }
    }
  }
  Complex operator()(Frequency alpha) const {
    detail::ComplexSum s;
    for (std::size_t i = 0; i < squares_.size(); ++i) s.add(weights_[i] * e_phase(alpha.phase(squares_[i])));
    return s.value();
  }

 private:
  std::vector<u64> squares_;
  std::vector<long double> weights_;
};

// ---------------------------------------------------------------------------
// v_k(beta) = integral over (U, 2U] of e(beta u^k) du

enum class VKind { v2, v3, v3Star };

inline const char* to_string(VKind k) {
  switch (k) {
    case VKind::v2: return "v2";
    case VKind::v3: return "v3";
    case VKind::v3Star: return "v3*";
  }
  return "?";
}

struct VIntegralValue {
  Complex value;
  long double error_estimate = 0;
  u64 panels = 0;           // 0 when the asymptotic expansion was used
  bool asymptotic = false;
};

struct VIntegralOptions {
  long double rel_tolerance = 1e-12L;
  u64 max_panels = 4'000'000;
  long double asymptotic_threshold = 200.0L;  // |beta| U^k beyond which parts are integrated
};

namespace detail {

template <class F>
Complex gauss20(F&& f, long double a, long double b) {
  using G = boost::math::quadrature::gauss<long double, 20>;
  const auto& x = G::abscissa();
  const auto& w = G::weights();
  const long double c = (a + b) / 2, h = (b - a) / 2;
  Complex s = 0;
  for (std::size_t i = 0; i < x.size(); ++i) s += w[i] * (f(c + h * x[i]) + f(c - h * x[i]));
  return s * h;
}

// In t = u^k: integral over [U^k, (2U)^k] of e(beta t) t^{1/k - 1}/k dt.
inline Complex v_panels(int k, long double beta, long double U, u64 panels) {
  const long double a = std::pow(U, static_cast<long double>(k));
  const long double b = std::pow(2 * U, static_cast<long double>(k));
  const long double s = 1.0L / k - 1.0L;
  const long double width = (b - a) / static_cast<long double>(panels);
  ComplexSum sum;
  for (u64 i = 0; i < panels; ++i) {
    const long double lo = a + width * static_cast<long double>(i);
    const long double hi = i + 1 == panels ? b : lo + width;
    sum.add(gauss20(
        [&](long double t) {
          return e_real(beta * t) * static_cast<long double>(std::pow(static_cast<double>(t), static_cast<double>(s)) / k);
        },
        lo, hi));
  }
  return sum.value();
}

// Repeated integration by parts; the remainder after `terms` steps is bounded
// by the next term's magnitude times (b - a) / t-scale.
inline std::pair<Complex, long double> v_asymptotic(int k, long double beta, long double U, int terms = 12) {
  const long double a = std::pow(U, static_cast<long double>(k));
  const long double b = std::pow(2 * U, static_cast<long double>(k));
  const long double s = 1.0L / k - 1.0L;
  const Complex iw(0.0L, kTwoPi * beta);
  auto antiderivative = [&](long double t) {
    Complex total = 0;
    long double coeff = 1.0L / k;  // s (s-1) ... (s-j+1) / k
    Complex denom = iw;
    for (int j = 0; j < terms; ++j) {
      const long double gj = coeff * std::pow(t, s - j);
      total += (j % 2 == 0 ? 1.0L : -1.0L) * gj / denom;
      coeff *= (s - j);
      denom *= iw;
    }
    return total * e_real(beta * t);
  };
  // Next-term bound: |g^{(terms)}| / (2 pi |beta|)^{terms} integrated over [a, b].
  long double coeff = 1.0L / k;
  for (int j = 0; j < terms; ++j) coeff *= std::fabs(s - j);
  const long double rest = coeff * std::pow(a, s - terms) * (b - a) / std::pow(kTwoPi * std::fabs(beta), terms);
  return {antiderivative(b) - antiderivative(a), rest};
}

}  // namespace detail

inline long double v_range_start(VKind kind, const ScaleParams& params) {
  return kind == VKind::v2 ? params.U2 : kind == VKind::v3 ? params.U3 : params.U3s;
}

inline VIntegralValue v_integral(VKind kind, long double beta, const ScaleParams& params,
                                 const VIntegralOptions& opt = {}) {
  const int k = kind == VKind::v2 ? 2 : 3;
  const long double U = v_range_start(kind, params);
  if (!(U > 0)) throw DomainError("v_integral: range start must be positive");
  if (beta == 0) return {Complex(U, 0), 0, 0, false};
  const long double Uk = std::pow(U, static_cast<long double>(k));
  const long double tol = opt.rel_tolerance * U;
  if (std::fabs(beta) * Uk >= opt.asymptotic_threshold) {
    const auto [v, err] = detail::v_asymptotic(k, beta, U);
    if (err > tol) throw PrecisionError("v_integral: asymptotic remainder above tolerance");
    return {v, err, 0, true};
  }
  // Panels proportional to 1 + |beta| k (2U)^k; doubled until two levels agree.
  const long double span = std::pow(2 * U, static_cast<long double>(k));
  u64 panels = static_cast<u64>(std::ceil(1.0L + std::fabs(beta) * k * span / 4.0L));
  Complex prev = detail::v_panels(k, beta, U, panels);
  while (true) {
    const u64 next = panels * 2;
    if (next > opt.max_panels) throw PrecisionError("v_integral: panel budget exhausted");
    const Complex cur = detail::v_panels(k, beta, U, next);
    const long double diff = std::abs(cur - prev);
    if (diff <= tol) return {cur, diff, next, false};
    panels = next;
    prev = cur;
  }
}

/// min(U, 2 / (pi k |beta| U^{k-1})): the first-derivative bound with
/// m = 2 pi k |beta| U^{k-1}.
inline long double v_integral_bound(VKind kind, long double beta, const ScaleParams& params) {
  const int k = kind == VKind::v2 ? 2 : 3;
  const long double U = v_range_start(kind, params);
  if (beta == 0) return U;
  const long double b = 2.0L / (std::numbers::pi_v<long double> * k * std::fabs(beta) *
                                std::pow(U, static_cast<long double>(k - 1)));
  return std::min(U, b);
}

// ---------------------------------------------------------------------------
// Major-arc approximations at alpha = a/q + beta

struct MajorArcForms {
  u64 q = 1;
  i64 a = 0;
  long double beta = 0;
  Complex V2, V3, W3, W, Delta3;
  Complex f3;          // f3(alpha) itself
  Complex F3_beta;     // sum over U3 < n <= 2U3 of e(beta n^3)
};

inline MajorArcForms major_arc_forms(u64 q, i64 a, long double beta, const ScaleParams& params,
                                     const TwistedCoefficients& coef = {}) {
  if (q == 0) throw DomainError("major_arc_forms: q must be >= 1");
  if (std::gcd(static_cast<u64>(a < 0 ? -a : a), q) != 1) throw DomainError("major_arc_forms: (a, q) must be 1");
  MajorArcForms out;
  out.q = q;
  out.a = a;
  out.beta = beta;
  const long double phi = static_cast<long double>(euler_phi(q));
  const Complex s2 = unit_power_sum(q, a, 2).value / phi;
  const Complex s3 = unit_power_sum(q, a, 3).value / phi;
  const Complex v2 = v_integral(VKind::v2, beta, params).value;
  out.V2 = s2 * v2;
  out.V3 = s3 * v_integral(VKind::v3, beta, params).value;
  out.W3 = s3 * v_integral(VKind::v3Star, beta, params).value;

  const PowerSumTable squares(q, 2);
  detail::ComplexSum w;
  const u64 Dmax = static_cast<u64>(std::floor(params.D));
  for (u64 d = 1; d <= Dmax; ++d) {
    const long double c = sieve_coefficient_c(d, params.D, coef);
    if (c == 0) continue;
    const u64 dd = mul_mod(d % q, d % q, q);
    const i64 ad = static_cast<i64>(mul_mod(detail::reduce(a, q), dd, q));
    w.add(c / static_cast<long double>(d * q) * squares.complete(ad).value);
  }
  out.W = w.value() * v2;

  const Frequency alpha = Frequency::near(q, a, beta);
  out.f3 = weyl_series(SeriesKind::f3, alpha, params).value;
  out.F3_beta = weyl_series(SeriesKind::F3, Frequency::from_real(beta), params).value;
  out.Delta3 = out.f3 - s3 * out.F3_beta;
  return out;
}

/// g_r(alpha) = sum over l in N_r and primes p with lp in (U2, 2U2] of
/// log p / log(U2/l) e(alpha (lp)^2).
class GrSeries {
 public:
  GrSeries(int r, const ScaleParams& params) {
    const IntRange box = params.range_U2();
    const AlmostPrimeProductSet set = enumerate_product_sets(ProductSetKind::N, r, params);
    if (set.members.empty() || box.empty()) return;
    u64 lmin = ~0ULL;
    for (const auto& m : set.members) lmin = std::min(lmin, m.value);
    const PrimeTable primes = prime_table(2, box.hi / lmin);
    for (const auto& m : set.members) {
      const u64 l = m.value;
      const long double inv_log = 1.0L / std::log(params.U2 / static_cast<long double>(l));
      const u64 plo = (box.lo + l - 1) / l, phi = box.hi / l;
      auto it = std::lower_bound(primes.begin(), primes.end(), plo);
      for (; it != primes.end() && *it <= phi; ++it) {
        const u64 x = l * *it;
        squares_.push_back(x * x);
        weights_.push_back(std::log(static_cast<long double>(*it)) * inv_log);
      }
    }
  }
  u64 term_count() const { return squares_.size(); }
  Complex operator()(Frequency alpha) const {
    detail::ComplexSum s;
    for (std::size_t i = 0; i < squares_.size(); ++i) s.add(weights_[i] * e_phase(alpha.phase(squares_[i])));
    return s.value();
  }

 private:
  std::vector<u64> squares_;
  std::vector<long double> weights_;
};

// ---------------------------------------------------------------------------
// Singular integral in volume form

enum class JMethod { Grid, MonteCarlo };

inline const char* to_string(JMethod m) { return m == JMethod::Grid ? "grid" : "mc"; }

struct SingularIntegralOptions {
  int grid = 28;                 // midpoint nodes per outer dimension
  u64 samples = 4'000'000;       // Monte Carlo draws
  u64 seed = 1;
  long double agreement = 0.01L;
};

struct SingularIntegralValue {
  u64 N = 0;
  JMethod method = JMethod::Grid;
  long double value = 0;
  long double error_estimate = 0;
  u64 evaluations = 0;
};

namespace detail {

// The five cube variables in units of their box starts:
// u_j = U3 (1 + t_j) for j = 1..3 and U3* (1 + t_j) for j = 4, 5, t in (0, 1].
// Integrating out x = sqrt(s), s = N - sum u^3, leaves weight 1/(2 sqrt s) on
// U2^2 < s <= 4 U2^2.
struct JGeometry {
  long double N, U2, U3, U3s, s_lo, s_hi, c3, c3s, jac;
  explicit JGeometry(const ScaleParams& p)
      : N(static_cast<long double>(p.N)),
        U2(p.U2),
        U3(p.U3),
        U3s(p.U3s),
        s_lo(p.U2 * p.U2),
        s_hi(4 * p.U2 * p.U2),
        c3(p.U3 * p.U3 * p.U3),
        c3s(p.U3s * p.U3s * p.U3s),
        jac(p.U3 * p.U3 * p.U3 * p.U3s * p.U3s) {}
};

}  // namespace detail

inline SingularIntegralValue singular_integral_J(const ScaleParams& params, JMethod method,
                                                 const SingularIntegralOptions& opt = {}) {
  if (params.N < 10'000) throw DomainError("singular_integral_J: N must be >= 1e4");
  const detail::JGeometry g(params);
  SingularIntegralValue out;
  out.N = params.N;
  out.method = method;

  if (method == JMethod::Grid) {
    // Inner variable t1 integrated exactly over its admissible interval by
    // Gauss-Legendre; the other four on a midpoint grid.
    const int n = opt.grid;
    const long double h = 1.0L / n;
    std::vector<long double> cube3(n), cube3s(n);
    for (int i = 0; i < n; ++i) {
      const long double t = 1 + (i + 0.5L) * h;
      cube3[i] = g.c3 * t * t * t;
      cube3s[i] = g.c3s * t * t * t;
    }
    CompensatedSum total;
    for (int i2 = 0; i2 < n; ++i2)
      for (int i3 = 0; i3 < n; ++i3)
        for (int i4 = 0; i4 < n; ++i4)
          for (int i5 = 0; i5 < n; ++i5) {
            const long double R = g.N - cube3[i2] - cube3[i3] - cube3s[i4] - cube3s[i5];
            // s = R - c3 (1 + t1)^3 must lie in (s_lo, s_hi].
            const long double w_lo = std::max(1.0L, std::cbrt(std::max(0.0L, (R - g.s_hi) / g.c3)));
            const long double w_hi = std::min(2.0L, std::cbrt(std::max(0.0L, (R - g.s_lo) / g.c3)));
            if (!(w_hi > w_lo)) continue;
            const Complex inner = detail::gauss20(
                [&](long double w) { return Complex(0.5L / std::sqrt(R - g.c3 * w * w * w), 0); }, w_lo, w_hi);
            total.add(inner.real());
            ++out.evaluations;
          }
    out.value = total.value() * h * h * h * h * g.jac;
    out.error_estimate = std::fabs(out.value) * h * h;
    return out;
  }

  std::mt19937_64 rng(opt.seed);
  auto uniform = [&rng] { return std::ldexp(static_cast<long double>(rng() >> 11) + 0.5L, -53); };
  CompensatedSum sum, sum_sq;
  for (u64 i = 0; i < opt.samples; ++i) {
    long double sigma = 0;
    for (int j = 0; j < 3; ++j) {
      const long double t = 1 + uniform();
      sigma += g.c3 * t * t * t;
    }
    for (int j = 0; j < 2; ++j) {
      const long double t = 1 + uniform();
      sigma += g.c3s * t * t * t;
    }
    const long double s = g.N - sigma;
    if (s > g.s_lo && s <= g.s_hi) {
      const long double f = 0.5L / std::sqrt(s);
      sum.add(f);
      sum_sq.add(f * f);
    }
  }
  const long double m = static_cast<long double>(opt.samples);
  const long double mean = sum.value() / m;
  const long double var = std::max(0.0L, sum_sq.value() / m - mean * mean);
  out.value = mean * g.jac;
  out.error_estimate = std::sqrt(var / m) * g.jac;
  out.evaluations = opt.samples;
  return out;
}

inline SingularIntegralValue singular_integral_J(u64 N, JMethod method, const SingularIntegralOptions& opt = {}) {
  return singular_integral_J(ScaleParams::desk(N), method, opt);
}

struct SingularIntegralCheck {
  SingularIntegralValue grid, mc;
  long double relative_gap = 0;
};

/// Both methods; PrecisionError when they differ by more than the agreement
/// tolerance.
inline SingularIntegralCheck singular_integral_checked(const ScaleParams& params,
                                                       const SingularIntegralOptions& opt = {}) {
  SingularIntegralCheck c{singular_integral_J(params, JMethod::Grid, opt),
                          singular_integral_J(params, JMethod::MonteCarlo, opt), 0};
  c.relative_gap = std::fabs(c.grid.value - c.mc.value) / std::fabs(c.grid.value);
  if (!(c.relative_gap < opt.agreement)) {
    throw PrecisionError("singular_integral_J: grid and Monte Carlo differ by " +
                         std::to_string(static_cast<double>(c.relative_gap)));
  }
  return c;
}

// ---------------------------------------------------------------------------
// Farey dissection with exact rational endpoints

enum class ArcLabel { Major0, Minor0, Minor1, Minor2 };

inline const char* to_string(ArcLabel l) {
  switch (l) {
    case ArcLabel::Major0: return "M0";
    case ArcLabel::Minor0: return "m0";
    case ArcLabel::Minor1: return "m1";
    case ArcLabel::Minor2: return "m2";
  }
  return "?";
}

/// Half-open piece (lo, hi] with its label; q = 0 for m2 gaps.
struct Arc {
  ArcLabel label = ArcLabel::Minor2;
  u64 q = 0;
  i64 a = 0;
  Rational lo, hi;
  Rational length() const { return hi - lo; }
};

struct DissectionBounds {
  Rational Q0, Q2, N;
  u64 q_major = 0;  // floor(Q0^5)
  u64 q_minor = 0;  // floor(Q1)
  Rational lower, upper;  // I0 = (lower, upper] = (-1/Q2, 1 - 1/Q2]
  Rational major_width(u64 q) const { return 1 / (Q2 * q); }
  Rational major0_width() const { return Q0 / N; }

  static DissectionBounds from(const ScaleParams& params) {
    params.validate_dissection();
    DissectionBounds b;
    b.Q0 = exact_rational(params.Q0);
    b.Q2 = exact_rational(params.Q2);
    b.N = Rational(params.N);
    const Rational q05 = b.Q0 * b.Q0 * b.Q0 * b.Q0 * b.Q0;
    b.q_major = static_cast<u64>(BigInt(boost::multiprecision::numerator(q05) /
                                        boost::multiprecision::denominator(q05)));
    b.q_minor = static_cast<u64>(std::floor(params.Q1));
    b.lower = -1 / b.Q2;
    b.upper = 1 - 1 / b.Q2;
    return b;
  }

  /// alpha translated by an integer into (lower, upper].
  Rational reduce(const Rational& alpha) const {
    const Rational shifted = alpha - lower;  // in (0, 1] after reduction
    const BigInt num = boost::multiprecision::numerator(shifted);
    const BigInt den = boost::multiprecision::denominator(shifted);
    BigInt k = num / den;                  // truncation
    if (num < 0 && k * den != num) k -= 1;  // floor
    if (k * den == num) k -= 1;             // exact integers map to 1, not 0
    return alpha - Rational(k);
  }
};

struct ArcDissection {
  DissectionBounds bounds;
  std::vector<Arc> arcs;  // sorted, contiguous, covering (lower, upper]

  ArcLabel locate(const Rational& alpha) const { return find(alpha).label; }
  ArcLabel locate(long double alpha) const { return locate(exact_rational(alpha)); }

  const Arc& find(const Rational& alpha) const {
    const Rational x = bounds.reduce(alpha);
    auto it = std::lower_bound(arcs.begin(), arcs.end(), x, [](const Arc& arc, const Rational& v) { return arc.hi < v; });
    if (it == arcs.end()) throw ConsistencyError("ArcDissection: point outside I0");
    return *it;
  }

  Rational measure(ArcLabel label) const {
    Rational m = 0;
    for (const auto& a : arcs) {
      if (a.label == label) m += a.length();
    }
    return m;
  }
  Rational total_measure() const {
    Rational m = 0;
    for (const auto& a : arcs) m += a.length();
    return m;
  }
  /// Every piece nonempty, consecutive pieces share endpoints, and the
  /// union is exactly (lower, upper].
  bool is_partition() const {
    if (arcs.empty()) return false;
    if (arcs.front().lo != bounds.lower || arcs.back().hi != bounds.upper) return false;
    for (std::size_t i = 0; i < arcs.size(); ++i) {
      if (!(arcs[i].lo < arcs[i].hi)) return false;
      if (i > 0 && arcs[i - 1].hi != arcs[i].lo) return false;
    }
    return true;
  }
};

inline constexpr u64 kArcBudget = 5'000'000;

/// Builds the dissection by walking the Farey sequence of order floor(Q1);
/// the arc around 1/1 is translated to 0/1.
inline ArcDissection farey_dissection(const ScaleParams& params, u64 budget = kArcBudget) {
  ArcDissection out;
  out.bounds = DissectionBounds::from(params);
  const DissectionBounds& b = out.bounds;
  const u64 Q = b.q_minor;
  if (Q < 1) throw ValidationError("farey_dissection: Q1 >= 1 required");
  const Rational w0 = b.major0_width();

  Rational cursor = b.lower;
  auto push = [&](ArcLabel label, u64 q, i64 a, const Rational& lo, const Rational& hi) {
    if (!(lo < hi)) return;
    if (out.arcs.size() >= budget) throw CapacityError("farey_dissection: arc budget exceeded");
    out.arcs.push_back({label, q, a, lo, hi});
  };
  // Farey walk: (a, q) then (c, d), next term from k = (Q + q) / d.
  u64 a = 0, q = 1, c = 1, d = Q;
  while (true) {
    const Rational center(static_cast<i64>(a), static_cast<i64>(q));
    const Rational w = b.major_width(q);
    const Rational lo = center - w, hi = center + w;
    if (lo < cursor) throw ConsistencyError("farey_dissection: overlapping arcs");
    push(ArcLabel::Minor2, 0, 0, cursor, lo);
    const i64 label_a = q == 1 ? 1 : static_cast<i64>(a);
    if (q <= b.q_major) {
      push(ArcLabel::Minor0, q, label_a, lo, center - w0);
      push(ArcLabel::Major0, q, label_a, center - w0, center + w0);
      push(ArcLabel::Minor0, q, label_a, center + w0, hi);
    } else {
      push(ArcLabel::Minor1, q, label_a, lo, hi);
    }
    cursor = hi;
    if (c == 1 && d == 1) break;
    const u64 k = (Q + q) / d;
    const u64 na = k * c - a, nq = k * d - q;
    a = c;
    q = d;
    c = na;
    d = nq;
  }
  if (cursor > b.upper) throw ConsistencyError("farey_dissection: last arc passes the end of I0");
  push(ArcLabel::Minor2, 0, 0, cursor, b.upper);
  return out;
}

/// Neighbours l <= x <= r of x among fractions with denominator <= Q, by
/// Stern-Brocot descent with maximal jumps.
inline std::pair<Rational, Rational> farey_neighbours(const Rational& x, u64 Q) {
  using boost::multiprecision::denominator;
  using boost::multiprecision::numerator;
  const BigInt num = numerator(x), den = denominator(x);
  BigInt fl = num / den;
  if (num < 0 && fl * den != num) fl -= 1;
  BigInt ln = fl, ld = 1, rn = fl + 1, rd = 1;
  if (fl * den == num) return {Rational(fl), Rational(fl)};
  const BigInt Qb = Q;
  while (true) {
    const BigInt mn = ln + rn, md = ld + rd;
    if (md > Qb) break;
    const BigInt lhs = mn * den, rhs = num * md;
    if (lhs == rhs) return {Rational(mn, md), Rational(mn, md)};
    if (lhs < rhs) {
      // advance l = l + k r while still below x and within Q
      BigInt k = (num * ld - ln * den) / (rn * den - num * rd);
      const BigInt kq = (Qb - ld) / rd;
      if (k > kq) k = kq;
      if (k < 1) k = 1;
      ln += k * rn;
      ld += k * rd;
      if (ln * den == num * ld) return {Rational(ln, ld), Rational(ln, ld)};
    } else {
      BigInt k = (rn * den - num * rd) / (num * ld - ln * den);
      const BigInt kq = (Qb - rd) / ld;
      if (k > kq) k = kq;
      if (k < 1) k = 1;
      rn += k * ln;
      rd += k * ld;
      if (rn * den == num * rd) return {Rational(rn, rd), Rational(rn, rd)};
    }
  }
  return {Rational(ln, ld), Rational(rn, rd)};
}

/// Label of alpha without materialising the dissection: only the two Farey
/// neighbours of order Q1 can carry an arc containing alpha, because the
/// arcs are pairwise disjoint.
inline ArcLabel locate_fast(const Rational& alpha, const DissectionBounds& b) {
  const Rational x = b.reduce(alpha);
  const auto [l, r] = farey_neighbours(x, b.q_minor);
  for (const Rational& c : {l, r}) {
    const u64 q = boost::multiprecision::denominator(c).convert_to<u64>();
    const Rational w = b.major_width(q);
    if (x > c - w && x <= c + w) {
      if (q > b.q_major) return ArcLabel::Minor1;
      const Rational w0 = b.major0_width();
      return (x > c - w0 && x <= c + w0) ? ArcLabel::Major0 : ArcLabel::Minor0;
    }
  }
  return ArcLabel::Minor2;
}

inline ArcLabel locate_fast(long double alpha, const DissectionBounds& b) {
  return locate_fast(exact_rational(alpha), b);
}

/// The arcs N(q, a) = (a/q - 1/(q Q0), a/q + 1/(q Q0)] for q <= Q0,
/// -q <= a <= 2q, (a, q) = 1.
inline std::vector<Arc> nfrak_arcs(const ScaleParams& params, u64 budget = kArcBudget) {
  const Rational Q0 = exact_rational(params.Q0);
  const u64 qmax = static_cast<u64>(std::floor(params.Q0));
  std::vector<Arc> out;
  for (u64 q = 1; q <= qmax; ++q) {
    const Rational w = 1 / (Q0 * q);
    for (i64 a = -static_cast<i64>(q); a <= 2 * static_cast<i64>(q); ++a) {
      if (std::gcd(static_cast<u64>(a < 0 ? -a : a), q) != 1) continue;
      if (out.size() >= budget) throw CapacityError("nfrak_arcs: arc budget exceeded");
      const Rational c(a, static_cast<i64>(q));
      out.push_back({ArcLabel::Minor2, q, a, c - w, c + w});
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Minor-arc scan of h(alpha)

struct MinorArcRow {
  u64 N = 0;
  u64 samples = 0;
  long double max_abs_h = 0;
  long double mean_abs_h = 0;
  long double ratio = 0;        // max |h| / N^{5/18}
  long double small_q_max = 0;  // max |h(a/q)| over q <= 3, for contrast
};

inline std::vector<MinorArcRow> minor_arc_scan(const std::vector<ScaleParams>& grid, u64 samples, u64 seed,
                                               const TwistedCoefficients& coef = {}) {
  std::vector<MinorArcRow> rows;
  for (const ScaleParams& params : grid) {
    const u64 N = params.N;
    const DissectionBounds b = DissectionBounds::from(params);
    const TwistedSeries h(params, coef);
    std::mt19937_64 rng(seed ^ N);
    MinorArcRow row;
    row.N = N;
    long double total = 0;
    u64 draws = 0;
    while (row.samples < samples) {
      if (++draws > 1000 * samples + 1000) throw CapacityError("minor_arc_scan: m2 too thin to sample");
      const Frequency alpha = Frequency::from_raw(rng());
      if (locate_fast(Rational(BigInt(alpha.raw()), BigInt(1) << 64), b) != ArcLabel::Minor2) continue;
      const long double v = std::abs(h(alpha));
      row.max_abs_h = std::max(row.max_abs_h, v);
      total += v;
      ++row.samples;
    }
    row.mean_abs_h = row.samples ? total / row.samples : 0;
    row.ratio = row.max_abs_h / std::pow(static_cast<long double>(N), 5.0L / 18.0L);
    for (u64 q = 1; q <= 3; ++q) {
      for (u64 a = 0; a < q; ++a) {
        if (std::gcd(a, q) != 1) continue;
        row.small_q_max = std::max(row.small_q_max, std::abs(h(Frequency::near(q, static_cast<i64>(a), 0))));
      }
    }
    rows.push_back(row);
  }
  return rows;
}

/// Scan at desk parameters but with the sieve level D = N^{1/24}: with the
/// desk level N^{1/4} the D^{2/3} part of h dominates and the N^{5/18} scale
/// is not the relevant one.
inline std::vector<MinorArcRow> minor_arc_scan(const std::vector<u64>& Ns, u64 samples, u64 seed,
                                               const TwistedCoefficients& coef = {}) {
  std::vector<ScaleParams> grid;
  for (u64 N : Ns) {
    ScaleParams p = ScaleParams::desk(N);
    p.set("D", std::pow(static_cast<long double>(N), 1.0L / 24.0L));
    grid.push_back(p);
  }
  return minor_arc_scan(grid, samples, seed, coef);
}

}  // namespace wglab
