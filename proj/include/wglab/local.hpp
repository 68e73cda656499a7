#pragma once

// Exact local (mod q) arithmetic: complete exponential sums, congruence
// counts, the local factors A_d(q, N), the singular series and the sifting
// density omega.

#include <cfloat>
#include <cmath>
#include <complex>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "wglab/arith.hpp"
#include "wglab/errors.hpp"
#include "wglab/numeric.hpp"

namespace wglab {

using Complex = std::complex<long double>;

inline constexpr u64 kPowerSumLimit = 1'000'000;
inline constexpr u64 kHistogramLimit = 10'000;
inline constexpr u64 kClassCountLimit = 2'000'000;

struct PowerSumValue {
  u64 q = 1;
  i64 a = 0;
  int k = 1;
  Complex value;
  long double error_bound = 0.0L;
};

namespace detail {

inline u64 reduce(i64 v, u64 q) {
  const i64 r = v % static_cast<i64>(q);
  return static_cast<u64>(r < 0 ? r + static_cast<i64>(q) : r);
}

/// Table of e(r/q) for r in [0, q).
class RootTable {
 public:
  explicit RootTable(u64 q) : q_(q), roots_(q) {
    for (u64 r = 0; r < q; ++r) {
      // Evaluate at the representative nearest zero so that e(-x) is the exact
      // conjugate of e(x).
      const long double x = (2 * r <= q) ? static_cast<long double>(r) / static_cast<long double>(q)
                                         : -static_cast<long double>(q - r) / static_cast<long double>(q);
      roots_[r] = Complex(std::cos(kTwoPi * x), std::sin(kTwoPi * x));
    }
  }
  const Complex& operator[](u64 r) const { return roots_[r]; }
  u64 modulus() const { return q_; }

 private:
  u64 q_;
  std::vector<Complex> roots_;
};

// Absolute error bound for a compensated sum of `terms` table roots: each
// root carries under 9 ulp (argument rounding plus cos/sin), the
// compensated accumulation adds 2 ulp of the result per component.
inline long double root_sum_error(u64 terms) {
  const long double n = static_cast<long double>(terms);
  return (12.0L * n + n * n * LDBL_EPSILON) * LDBL_EPSILON * 1.5L;
}

struct ComplexSum {
  CompensatedSum re, im;
  void add(const Complex& z) {
    re.add(z.real());
    im.add(z.imag());
  }
  Complex value() const { return {re.value(), im.value()}; }
};

inline void check_power_sum_args(u64 q, int k) {
  if (q == 0) throw DomainError("power sum: modulus must be >= 1");
  if (k < 1) throw DomainError("power sum: exponent must be >= 1");
  if (q > kPowerSumLimit) {
    throw CapacityError("power sum: q=" + std::to_string(q) + " exceeds direct summation cap");
  }
}

inline PowerSumValue power_sum(u64 q, i64 a, int k, bool units_only) {
  check_power_sum_args(q, k);
  const RootTable roots(q);
  const u64 am = reduce(a, q);
  ComplexSum sum;
  u64 terms = 0;
  for (u64 n = 1; n <= q; ++n) {
    if (units_only && std::gcd(n, q) != 1) continue;
    const u64 r = mul_mod(am, pow_mod(n, static_cast<u64>(k), q), q);
    sum.add(roots[r]);
    ++terms;
  }
  const long double bound = root_sum_error(terms);
  if (bound >= 1e-6L * static_cast<long double>(q)) {
    throw PrecisionError("power sum: rounding bound exceeds 1e-6 q");
  }
  return {q, a, k, sum.value(), bound};
}

}  // namespace detail

/// All S_k(q, a) or S*_k(q, a) for a fixed modulus share one root table and
/// one table of k-th power residues.
class PowerSumTable {
 public:
  PowerSumTable(u64 q, int k) : roots_((detail::check_power_sum_args(q, k), q)), k_(k) {
    std::vector<u64> all(q, 0), units(q, 0);
    for (u64 n = 1; n <= q; ++n) {
      const u64 r = pow_mod(n, static_cast<u64>(k), q);
      ++all[r];
      if (std::gcd(n, q) == 1) {
        ++units[r];
        ++unit_count_;
      }
    }
    for (u64 r = 0; r < q; ++r) {
      if (all[r] != 0) all_.emplace_back(r, all[r]);
      if (units[r] != 0) units_.emplace_back(r, units[r]);
    }
  }
  u64 modulus() const { return roots_.modulus(); }
  u64 unit_count() const { return unit_count_; }

  PowerSumValue complete(i64 a) const { return sum(a, all_, modulus()); }
  PowerSumValue unit(i64 a) const { return sum(a, units_, unit_count_); }

 private:
  // Residues r = n^k with their multiplicities.
  using Histogram = std::vector<std::pair<u64, u64>>;

  PowerSumValue sum(i64 a, const Histogram& residues, u64 terms) const {
    const u64 q = modulus();
    const u64 am = detail::reduce(a, q);
    detail::ComplexSum total;
    for (const auto& [r, m] : residues) total.add(static_cast<long double>(m) * roots_[am * r % q]);
    return {q, a, k_, total.value(), detail::root_sum_error(terms)};
  }

  detail::RootTable roots_;
  int k_;
  u64 unit_count_ = 0;
  Histogram all_, units_;
};

/// S_k(q, a) = sum_{n=1}^{q} e(a n^k / q).
inline PowerSumValue complete_power_sum(u64 q, i64 a, int k) {
  return detail::power_sum(q, a, k, false);
}

/// S*_k(q, a): the same sum restricted to (n, q) = 1.
inline PowerSumValue unit_power_sum(u64 q, i64 a, int k) {
  return detail::power_sum(q, a, k, true);
}

/// Exponent beyond which S*_k(p^l, a) vanishes for (a, p) = 1.
inline int gamma_exponent(u64 p, int k) {
  if (!is_prime(p)) throw DomainError("gamma_exponent: p must be prime");
  if (k < 2) throw DomainError("gamma_exponent: k must be >= 2");
  int theta = 0;
  for (u64 kk = static_cast<u64>(k); kk % p == 0; kk /= p) ++theta;
  if (p == 2 && theta > 0) return theta + 3;
  return theta + 2;
}

// ---------------------------------------------------------------------------
// Congruence counts

enum class CountVariant { K, L };

namespace detail {

/// Number of unit 5-tuples mod q with each cube-sum residue.
inline std::vector<u128> five_cube_histogram(u64 q) {
  std::vector<u64> cube_hist(q, 0);
  for (u64 u = 1; u <= q; ++u) {
    if (std::gcd(u, q) == 1) ++cube_hist[pow_mod(u, 3, q)];
  }
  std::vector<std::pair<u64, u64>> support;
  for (u64 r = 0; r < q; ++r) {
    if (cube_hist[r] != 0) support.emplace_back(r, cube_hist[r]);
  }
  std::vector<u128> f(q, 0), g(q, 0);
  f[0] = 1;
  for (int step = 0; step < 5; ++step) {
    std::fill(g.begin(), g.end(), u128{0});
    for (u64 s = 0; s < q; ++s) {
      if (f[s] == 0) continue;
      for (const auto& [r, c] : support) {
        u64 t = s + r;
        if (t >= q) t -= q;
        g[t] += f[s] * c;
      }
    }
    std::swap(f, g);
  }
  return f;
}

}  // namespace detail

/// K(q, N): unit 5-tuples with u1^3 + ... + u5^3 = N (mod q).
/// L(q, N): additionally a free x mod q with (d x)^2 added.
struct CongruenceCounts {
  u64 q = 1;
  u64 N_mod = 0;
  u64 d = 1;
  BigInt K;
  BigInt L;
};

/// Histogram route: per-residue cube histogram of the units, convolved five
/// times. Valid for any q <= 1e4.
inline CongruenceCounts congruence_counts(u64 q, i64 N, u64 d = 1) {
  if (q == 0) throw DomainError("congruence_counts: q must be >= 1");
  if (d == 0) throw DomainError("congruence_counts: d must be >= 1");
  if (q > kHistogramLimit) {
    throw CapacityError("congruence_counts: q=" + std::to_string(q) + " exceeds histogram cap");
  }
  const std::vector<u128> f = detail::five_cube_histogram(q);
  const u64 n_mod = detail::reduce(N, q);
  const u64 dd = mul_mod(d % q, d % q, q);
  u128 L = 0;
  for (u64 x = 0; x < q; ++x) {
    const u64 sq = mul_mod(dd, mul_mod(x, x, q), q);
    L += f[(n_mod + q - sq) % q];
  }
  return {q, n_mod, d, to_bigint(f[n_mod]), to_bigint(L)};
}

inline BigInt count_congruence(u64 q, i64 N, CountVariant variant, u64 d = 1) {
  const CongruenceCounts c = congruence_counts(q, N, d);
  return variant == CountVariant::K ? c.K : c.L;
}

namespace detail {

inline u64 primitive_root(u64 p) {
  if (p == 2) return 1;
  const Factorization f = factorize(p - 1);
  for (u64 g = 2;; ++g) {
    bool ok = true;
    for (const auto& [q, e] : f.factors) {
      if (pow_mod(g, (p - 1) / q, p) == 1) {
        ok = false;
        break;
      }
    }
    if (ok) return g;
  }
}

}  // namespace detail

/// Class route for a prime p >= 5, O(p): the 5-fold cube sum count depends on
/// the target only through its cubic-residue class, so the convolution
/// collapses to a (e+1)x(e+1) kernel with e = gcd(3, p - 1).
inline CongruenceCounts prime_congruence_counts(u64 p, i64 N, u64 d = 1) {
  if (!is_prime(p)) throw DomainError("prime_congruence_counts: p must be prime");
  if (d == 0) throw DomainError("prime_congruence_counts: d must be >= 1");
  if (p < 5) return congruence_counts(p, N, d);
  if (p > kClassCountLimit) {
    throw CapacityError("prime_congruence_counts: p exceeds 128-bit count range");
  }
  const u64 e = (p - 1) % 3 == 0 ? 3 : 1;
  std::vector<std::uint32_t> ind;
  u64 g = 1;
  if (e == 3) {
    g = detail::primitive_root(p);
    ind.assign(p, 0);
    u64 cur = 1;
    for (u64 i = 0; i + 1 < p; ++i) {
      ind[cur] = static_cast<std::uint32_t>(i);
      cur = cur * g % p;
    }
  }
  // class 0 = residue 0; class 1 + j = nonzero with index = j mod e.
  auto cls = [&](u64 t) -> std::size_t {
    if (t == 0) return 0;
    return e == 1 ? 1 : 1 + ind[t] % 3;
  };
  const std::size_t nclasses = 1 + e;
  std::vector<u64> reps{0};
  for (u64 j = 0, t = 1; j < e; ++j, t = t * g % p) reps.push_back(t);

  // kernel[Y][X] = #{r cube of a unit : rep_Y - r in class X}. The unit
  // cubes are every unit when e = 1 and the indices divisible by 3 otherwise.
  std::vector<std::vector<u128>> kernel(nclasses, std::vector<u128>(nclasses, 0));
  for (u64 r = 1; r < p; ++r) {
    if (e == 3 && ind[r] % 3 != 0) continue;
    for (std::size_t y = 0; y < nclasses; ++y) {
      const u64 t = reps[y] >= r ? reps[y] - r : reps[y] + p - r;
      ++kernel[y][cls(t)];
    }
  }
  std::vector<u128> f(nclasses, 0), next(nclasses, 0);
  f[0] = 1;
  for (int step = 0; step < 5; ++step) {
    for (std::size_t y = 0; y < nclasses; ++y) {
      u128 acc = 0;
      for (std::size_t x = 0; x < nclasses; ++x) acc += kernel[y][x] * f[x];
      next[y] = acc * e;  // each unit cube has e cube roots
    }
    std::swap(f, next);
  }
  const u64 n_mod = detail::reduce(N, p);
  u128 L = 0;
  if (d % p == 0) {
    L = static_cast<u128>(p) * f[cls(n_mod)];
  } else {
    // x^2 advanced by 2x + 1 each step, reduced by subtraction.
    u64 sq = 0;
    for (u64 x = 0; x < p; ++x) {
      L += f[cls(n_mod >= sq ? n_mod - sq : n_mod + p - sq)];
      sq += 2 * x + 1;
      while (sq >= p) sq -= p;
    }
  }
  return {p, n_mod, d, to_bigint(f[cls(n_mod)]), to_bigint(L)};
}

// ---------------------------------------------------------------------------
// Local factors by complex summation

struct LocalData {
  u64 q = 1;
  i64 N = 0;
  u64 d = 1;
  BigInt B;
  Rational A;               // B / (q phi(q)^5)
  long double B_real = 0;   // unrounded complex sum
  long double B_imag = 0;
  long double error_bound = 0;
};

/// B_d(q, N) = sum_{(a,q)=1} S_2(q, a d^2) S*_3(q, a)^5 e(-aN/q), rounded to
/// the nearest integer under an a-posteriori rounding bound.
inline LocalData local_factor(u64 q, i64 N, u64 d = 1) {
  if (q == 0) throw DomainError("local_factor: q must be >= 1");
  if (d == 0) throw DomainError("local_factor: d must be >= 1");
  if (q > kPowerSumLimit) throw CapacityError("local_factor: q exceeds direct summation cap");
  const detail::RootTable roots(q);
  const PowerSumTable squares(q, 2), cubes(q, 3);
  const u64 phi = cubes.unit_count();
  const u64 dd = mul_mod(d % q, d % q, q);
  const u64 n_mod = detail::reduce(N, q);
  const long double e2 = detail::root_sum_error(q);
  const long double e3 = detail::root_sum_error(phi);

  detail::ComplexSum total;
  long double abs_total = 0, term_error = 0;
  for (u64 a = 1; a <= q; ++a) {
    if (std::gcd(a, q) != 1) continue;
    const Complex s2 = squares.complete(static_cast<i64>(mul_mod(a % q, dd, q))).value;
    const Complex s3 = cubes.unit(static_cast<i64>(a % q)).value;
    const Complex s3_2 = s3 * s3;
    const Complex term = s2 * (s3_2 * s3_2 * s3) * roots[(q - a % q * n_mod % q) % q];
    total.add(term);
    const long double m2 = std::abs(s2), m3 = std::abs(s3);
    const long double m3_4 = std::pow(m3 + e3, 4);
    term_error += e2 * m3_4 * (m3 + e3) + 5.0L * (m2 + e2) * m3_4 * e3 +
                  16.0L * LDBL_EPSILON * m2 * m3_4 * (m3 + e3);
    abs_total += std::abs(term);
  }
  const long double bound = term_error + 4.0L * LDBL_EPSILON * abs_total;
  const Complex sum = total.value();
  long double phi5 = 1;
  for (int i = 0; i < 5; ++i) phi5 *= static_cast<long double>(phi);
  if (bound >= 0.5L || bound >= 1e-6L * static_cast<long double>(q) * phi5) {
    throw PrecisionError("local_factor: rounding bound " + std::to_string(static_cast<double>(bound)) +
                         " too large at q=" + std::to_string(q));
  }
  if (std::fabs(sum.imag()) > bound + 1e-9L) {
    throw ConsistencyError("local_factor: B has a non-real part at q=" + std::to_string(q));
  }
  const long double rounded = std::nearbyint(sum.real());
  LocalData out;
  out.q = q;
  out.N = N;
  out.d = d;
  out.B = rounded < 0 ? BigInt(-BigInt(static_cast<u64>(-rounded))) : BigInt(static_cast<u64>(rounded));
  BigInt denom = q;
  for (int i = 0; i < 5; ++i) denom *= phi;
  out.A = Rational(out.B, denom);
  out.B_real = sum.real();
  out.B_imag = sum.imag();
  out.error_bound = bound;
  return out;
}

/// Exact route: summing over a first turns the e(.) factors into Ramanujan
/// sums, B_d(q, N) = sum_r H(r) c_q(r - N) with H the histogram of
/// (d x)^2 + u1^3 + ... + u5^3 mod q over x and the units u_j.
inline LocalData local_factor_exact(u64 q, i64 N, u64 d = 1) {
  if (q == 0) throw DomainError("local_factor_exact: q must be >= 1");
  if (d == 0) throw DomainError("local_factor_exact: d must be >= 1");
  if (q > kHistogramLimit) throw CapacityError("local_factor_exact: q exceeds histogram cap");
  const std::vector<u128> cubes = detail::five_cube_histogram(q);
  const u64 dd = mul_mod(d % q, d % q, q);
  std::vector<u64> square_hist(q, 0);
  for (u64 x = 0; x < q; ++x) ++square_hist[mul_mod(dd, mul_mod(x, x, q), q)];

  const Factorization fq = factorize(q);
  std::vector<u64> divs{1};
  for (const auto& [p, e] : fq.factors) {
    const std::size_t n = divs.size();
    u64 pk = 1;
    for (int i = 1; i <= e; ++i) {
      pk *= p;
      for (std::size_t j = 0; j < n; ++j) divs.push_back(divs[j] * pk);
    }
  }
  // c_q(m) depends only on gcd(m, q).
  std::vector<i64> ramanujan_by_gcd(q + 1, 0);
  for (u64 g : divs) {
    i64 c = 0;
    for (u64 e : divs) {
      if (g % e == 0) c += moebius(q / e) * static_cast<i64>(e);
    }
    ramanujan_by_gcd[g] = c;
  }
  std::vector<i64> ramanujan(q);
  for (u64 m = 0; m < q; ++m) ramanujan[m] = ramanujan_by_gcd[std::gcd(m, q)];
  // |partial sums| <= q^2 phi^5 <= 1e28, well inside 128 bits.
  const u64 n_mod = detail::reduce(N, q);
  i128 acc = 0;
  for (u64 s = 0; s < q; ++s) {
    if (square_hist[s] == 0) continue;
    i128 inner = 0;
    u64 m = (s + q - n_mod) % q;
    for (u64 r = 0; r < q; ++r, m = m + 1 == q ? 0 : m + 1) {
      inner += static_cast<i128>(cubes[r]) * ramanujan[m];
    }
    acc += inner * static_cast<i128>(square_hist[s]);
  }
  const BigInt B = to_bigint(acc);
  LocalData out;
  out.q = q;
  out.N = N;
  out.d = d;
  out.B = B;
  BigInt denom = q;
  const u64 phi = euler_phi(fq);
  for (int i = 0; i < 5; ++i) denom *= phi;
  out.A = Rational(B, denom);
  out.B_real = ratio_to_long_double(B, BigInt(1));
  return out;
}

// ---------------------------------------------------------------------------
// Counting-route local densities

/// For p != 3: 1 + A_d(p, N) = L_d(p, N) / (p - 1)^5.
/// For p == 3: 1 + A_d(3, N) + A_d(9, N) = L_d(9, N) / 6^5.
/// Higher prime powers contribute nothing (S*_3 vanishes there).
inline Rational euler_factor(u64 p, i64 N, u64 d = 1) {
  if (p == 3) {
    const CongruenceCounts c = congruence_counts(9, N, d);
    return Rational(c.L, BigInt(7776));
  }
  const CongruenceCounts c = prime_congruence_counts(p, N, d);
  BigInt denom = 1;
  for (int i = 0; i < 5; ++i) denom *= (p - 1);
  return Rational(c.L, denom);
}

struct OmegaDensity {
  u64 d = 1;
  Rational value;
};

/// omega(p) = p K(p,N) / L(p,N) for p != 3, and 9 K(9,N) / L(9,N) for p = 3.
inline OmegaDensity omega_density(u64 p, i64 N) {
  if (!is_prime(p)) throw DomainError("omega_density: p must be prime");
  const CongruenceCounts c = p == 3 ? congruence_counts(9, N) : prime_congruence_counts(p, N);
  if (c.L == 0) {
    throw ConsistencyError("omega_density: L(" + std::to_string(c.q) + ", N) vanished");
  }
  const u64 scale = p == 3 ? 9 : p;
  return {p, Rational(BigInt(scale) * c.K, c.L)};
}

/// Multiplicative extension to squarefree d.
inline OmegaDensity omega_density_squarefree(u64 d, i64 N) {
  if (d == 0) throw DomainError("omega_density: d must be >= 1");
  const Factorization f = factorize(d);
  if (!f.squarefree()) throw DomainError("omega_density: d must be squarefree");
  Rational value = 1;
  for (const auto& [p, e] : f.factors) value *= omega_density(p, N).value;
  return {d, value};
}

// ---------------------------------------------------------------------------
// Singular series

struct SingularSeriesValue {
  i64 N = 0;
  u64 d = 1;
  u64 cutoff = 0;
  long double value = 0;         // Euler product over p <= cutoff
  long double tail_estimate = 0; // |prod over the last decade of primes - 1|
  u64 dual_cutoff = 0;
  long double product_at_dual = 0;
  long double direct_sum = 0;
  long double relative_gap = 0;
  u64 direct_terms = 0;
};

struct SingularSeriesOptions {
  u64 dual_cutoff = 1000;        // direct-sum route runs at min(cutoff, dual_cutoff)
  u64 direct_modulus_limit = 300; // composite q up to this are summed from their own B
  long double prune_tolerance = 1e-18L;
  long double agreement_tolerance = 1e-9L;
};

namespace detail {

struct ModulusTerm {
  u64 q;
  long double A;
};

// Sum of A_d(q, N) over all q assembled from the given per-prime moduli.
inline std::pair<long double, u64> direct_series_sum(const std::vector<std::vector<ModulusTerm>>& per_prime,
                                                     i64 N, u64 d, const SingularSeriesOptions& opt) {
  const std::size_t n = per_prime.size();
  std::vector<long double> suffix(n + 1, 1.0L);
  for (std::size_t j = n; j-- > 0;) {
    long double s = 1.0L;
    for (const auto& t : per_prime[j]) s += std::fabs(t.A);
    suffix[j] = suffix[j + 1] * s;
  }
  CompensatedSum sum;
  sum.add(1.0L);  // q = 1
  u64 terms = 1;
  std::function<void(std::size_t, u64, long double)> walk = [&](std::size_t start, u64 q, long double v) {
    for (std::size_t j = start; j < n; ++j) {
      if (std::fabs(v) * (suffix[j] - 1.0L) < opt.prune_tolerance) break;
      for (const auto& t : per_prime[j]) {
        if (t.A == 0.0L) continue;
        const u64 child_q = q > ~0ULL / t.q ? ~0ULL : q * t.q;
        long double child = v * t.A;
        if (q > 1 && child_q <= opt.direct_modulus_limit) {
          child = to_long_double(local_factor(child_q, N, d).A);
        }
        sum.add(child);
        ++terms;
        walk(j + 1, child_q, child);
      }
    }
  };
  walk(0, 1, 1.0L);
  return {sum.value(), terms};
}

}  // namespace detail

inline SingularSeriesValue singular_series(i64 N, u64 d, u64 cutoff, const SingularSeriesOptions& opt = {}) {
  if (N % 2 != 0) throw DomainError("singular_series: N must be even");
  if (cutoff < 5) throw DomainError("singular_series: cutoff must be >= 5");
  if (d == 0) throw DomainError("singular_series: d must be >= 1");
  const PrimeTable primes = prime_table(2, cutoff);
  SingularSeriesValue out;
  out.N = N;
  out.d = d;
  out.cutoff = cutoff;
  out.dual_cutoff = std::min(cutoff, opt.dual_cutoff);

  // Counting route: exact factor per prime, product accumulated in log space.
  CompensatedSum log_sum, log_tail, log_dual;
  bool zero = false;
  for (u64 p : primes) {
    const long double f = to_long_double(euler_factor(p, N, d));
    if (f == 0.0L) {
      zero = true;
      continue;
    }
    const long double lf = std::log1p(f - 1.0L);
    log_sum.add(lf);
    if (p * 10 > cutoff) log_tail.add(lf);
    if (p <= out.dual_cutoff) log_dual.add(lf);
  }
  out.value = zero ? 0.0L : std::exp(log_sum.value());
  out.tail_estimate = std::fabs(std::expm1(log_tail.value()));
  out.product_at_dual = zero ? 0.0L : std::exp(log_dual.value());

  // Direct route: A_d(q, N) by complex summation on the supported moduli.
  std::vector<std::vector<detail::ModulusTerm>> per_prime;
  for (u64 p : primes) {
    if (p > out.dual_cutoff) break;
    std::vector<detail::ModulusTerm> terms;
    terms.push_back({p, to_long_double(local_factor(p, N, d).A)});
    if (p == 3) terms.push_back({9, to_long_double(local_factor(9, N, d).A)});
    per_prime.push_back(std::move(terms));
  }
  const auto [direct, count] = detail::direct_series_sum(per_prime, N, d, opt);
  out.direct_sum = direct;
  out.direct_terms = count;
  const long double scale = std::max(std::fabs(out.product_at_dual), 1e-300L);
  out.relative_gap = out.product_at_dual == 0.0L ? std::fabs(direct)
                                                 : std::fabs(direct - out.product_at_dual) / scale;
  if (out.relative_gap >= opt.agreement_tolerance) {
    throw ConsistencyError("singular_series: product and direct sum disagree (relative gap " +
                           std::to_string(static_cast<double>(out.relative_gap)) + ")");
  }
  return out;
}

// ---------------------------------------------------------------------------
// Sifting product V(z) = prod_{2 < p < z} (1 - omega(p)/p)

using OmegaSource = std::function<Rational(u64 p)>;

/// Exact accumulation of numerator and denominator; only the final ratio is
/// rounded.
inline long double sifting_product_V(long double z, const OmegaSource& omega) {
  if (z < 3.0L) throw DomainError("sifting_product_V: z must be >= 3");
  const u64 zmax = static_cast<u64>(std::ceil(z)) - 1;
  std::vector<BigInt> num, den;
  for (u64 p : prime_table(3, std::max<u64>(zmax, 3))) {
    if (static_cast<long double>(p) >= z) break;
    const Rational factor = 1 - omega(p) / p;
    num.push_back(boost::multiprecision::numerator(factor));
    den.push_back(boost::multiprecision::denominator(factor));
  }
  return ratio_to_long_double(product_tree(std::move(num)), product_tree(std::move(den)));
}

inline long double sifting_product_V(long double z, i64 N) {
  return sifting_product_V(z, [N](u64 p) { return omega_density(p, N).value; });
}

}  // namespace wglab
