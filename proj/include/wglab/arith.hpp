#pragma once

// Integer foundations: primality, prime tables, factorisation, multiplicative
// functions and almost-prime classification.

#include <algorithm>
#include <array>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "wglab/errors.hpp"
#include "wglab/numeric.hpp"

namespace wglab {

inline constexpr u64 kPrimeTableLimit = 1'000'000'000'000ULL;
inline constexpr u64 kFactorLimit = ~0ULL;
inline constexpr u64 kTrialDivisionBound = 1'000'000;

inline u64 mul_mod(u64 a, u64 b, u64 m) {
  return static_cast<u64>(static_cast<u128>(a) * b % m);
}

inline u64 pow_mod(u64 base, u64 exp, u64 m) {
  u64 result = 1 % m;
  base %= m;
  while (exp > 0) {
    if (exp & 1) result = mul_mod(result, base, m);
    base = mul_mod(base, base, m);
    exp >>= 1;
  }
  return result;
}

/// Floor of the square root, exact for all 64-bit inputs.
inline u64 isqrt(u64 n) {
  u64 r = static_cast<u64>(std::sqrt(static_cast<long double>(n)));
  while (r > 0 && static_cast<u128>(r) * r > n) --r;
  while (static_cast<u128>(r + 1) * (r + 1) <= n) ++r;
  return r;
}

/// Floor of the cube root, exact for all 64-bit inputs.
inline u64 icbrt(u64 n) {
  u64 r = static_cast<u64>(std::cbrt(static_cast<long double>(n)));
  auto cube = [](u64 x) { return static_cast<u128>(x) * x * x; };
  while (r > 0 && cube(r) > n) --r;
  while (cube(r + 1) <= n) ++r;
  return r;
}

/// Deterministic Miller-Rabin. The first twelve prime bases are a proven
/// witness set for every 64-bit integer.
inline bool is_prime(u64 n) {
  if (n < 2) return false;
  static constexpr std::array<u64, 12> kBases{2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};
  for (u64 p : kBases) {
    if (n % p == 0) return n == p;
  }
  u64 d = n - 1;
  int s = 0;
  while ((d & 1) == 0) {
    d >>= 1;
    ++s;
  }
  for (u64 a : kBases) {
    u64 x = pow_mod(a, d, n);
    if (x == 1 || x == n - 1) continue;
    bool composite = true;
    for (int i = 1; i < s; ++i) {
      x = mul_mod(x, x, n);
      if (x == n - 1) {
        composite = false;
        break;
      }
    }
    if (composite) return false;
  }
  return true;
}

/// Plain sieve of Eratosthenes, primes <= limit.
inline std::vector<u64> small_primes(u64 limit) {
  std::vector<u64> primes;
  if (limit < 2) return primes;
  std::vector<bool> composite(limit + 1, false);
  for (u64 i = 2; i <= limit; ++i) {
    if (composite[i]) continue;
    primes.push_back(i);
    for (u64 j = i * i; j <= limit; j += i) composite[j] = true;
  }
  return primes;
}

/// Primes in the closed interval [lo, hi], strictly increasing.
struct PrimeTable {
  u64 lo = 0;
  u64 hi = 0;
  std::vector<u64> primes;

  std::size_t size() const { return primes.size(); }
  bool empty() const { return primes.empty(); }
  auto begin() const { return primes.begin(); }
  auto end() const { return primes.end(); }
  u64 operator[](std::size_t i) const { return primes[i]; }
  bool contains(u64 n) const { return std::binary_search(primes.begin(), primes.end(), n); }
};

/// Segmented sieve over [lo, hi]. Memory is bounded by the segment width plus
/// the base primes up to sqrt(hi).
inline PrimeTable prime_table(u64 lo, u64 hi, u64 limit = kPrimeTableLimit) {
  if (lo > hi) throw DomainError("prime_table: lo > hi");
  if (hi > limit) {
    throw CapacityError("prime_table: hi=" + std::to_string(hi) +
                        " exceeds limit " + std::to_string(limit));
  }
  PrimeTable table{lo, hi, {}};
  const u64 start = std::max<u64>(lo, 2);
  if (start > hi) return table;

  const std::vector<u64> base = small_primes(isqrt(hi));
  constexpr u64 kSegment = 1ULL << 20;
  std::vector<char> composite;
  for (u64 seg_lo = start; seg_lo <= hi; seg_lo += kSegment) {
    const u64 seg_hi = std::min(hi, seg_lo + kSegment - 1);
    composite.assign(seg_hi - seg_lo + 1, 0);
    for (u64 p : base) {
      if (p * p > seg_hi) break;
      u64 first = std::max(p * p, (seg_lo + p - 1) / p * p);
      for (u64 j = first; j <= seg_hi; j += p) composite[j - seg_lo] = 1;
    }
    for (u64 n = seg_lo; n <= seg_hi; ++n) {
      if (!composite[n - seg_lo]) table.primes.push_back(n);
    }
    if (seg_hi == hi) break;
  }
  return table;
}

struct Factorization {
  u64 n = 1;
  std::vector<std::pair<u64, int>> factors;  // (prime, exponent), primes increasing

  int big_omega() const {
    int total = 0;
    for (const auto& [p, e] : factors) total += e;
    return total;
  }
  bool squarefree() const {
    return std::all_of(factors.begin(), factors.end(), [](const auto& f) { return f.second == 1; });
  }
  std::vector<u64> primes() const {
    std::vector<u64> out;
    out.reserve(factors.size());
    for (const auto& f : factors) out.push_back(f.first);
    return out;
  }
};

namespace detail {

inline const std::vector<u64>& trial_primes() {
  static const std::vector<u64> primes = small_primes(kTrialDivisionBound);
  return primes;
}

// Brent's variant of Pollard rho; n must be odd composite. Deterministic
// sequence of increments c = 1, 2, ...
inline u64 rho_brent(u64 n) {
  for (u64 c = 1;; ++c) {
    auto f = [&](u64 x) { return (mul_mod(x, x, n) + c) % n; };
    u64 y = 2, x = 2, g = 1, q = 1, ys = 2;
    constexpr u64 m = 128;
    u64 r = 1;
    do {
      x = y;
      for (u64 i = 0; i < r; ++i) y = f(y);
      u64 k = 0;
      do {
        ys = y;
        for (u64 i = 0; i < std::min(m, r - k); ++i) {
          y = f(y);
          q = mul_mod(q, x > y ? x - y : y - x, n);
        }
        g = std::gcd(q, n);
        k += m;
      } while (k < r && g == 1);
      r <<= 1;
    } while (g == 1);
    if (g == n) {
      do {
        ys = f(ys);
        g = std::gcd(x > ys ? x - ys : ys - x, n);
      } while (g == 1);
    }
    if (g != n) return g;
  }
}

inline void split_large(u64 n, std::vector<u64>& out) {
  if (n == 1) return;
  if (is_prime(n)) {
    out.push_back(n);
    return;
  }
  const u64 s = isqrt(n);
  if (s * s == n) {
    split_large(s, out);
    split_large(s, out);
    return;
  }
  const u64 d = rho_brent(n);
  split_large(d, out);
  split_large(n / d, out);
}

}  // namespace detail

/// Complete factorisation: trial division to 1e6, then Pollard-Brent.
inline Factorization factorize(u64 n, u64 limit = kFactorLimit) {
  if (n == 0) throw DomainError("factorize: n must be positive");
  if (n > limit) throw CapacityError("factorize: n exceeds configured limit");
  Factorization result{n, {}};
  u64 m = n;
  for (u64 p : detail::trial_primes()) {
    if (p * p > m) break;
    if (m % p != 0) continue;
    int e = 0;
    while (m % p == 0) {
      m /= p;
      ++e;
    }
    result.factors.emplace_back(p, e);
  }
  if (m > 1) {
    std::vector<u64> rest;
    detail::split_large(m, rest);
    std::sort(rest.begin(), rest.end());
    for (u64 p : rest) {
      if (!result.factors.empty() && result.factors.back().first == p) {
        ++result.factors.back().second;
      } else {
        result.factors.emplace_back(p, 1);
      }
    }
  }
  return result;
}

inline int moebius(const Factorization& f) {
  if (!f.squarefree()) return 0;
  return f.factors.size() % 2 == 0 ? 1 : -1;
}

inline u64 euler_phi(const Factorization& f) {
  u64 phi = 1;
  for (const auto& [p, e] : f.factors) {
    phi *= p - 1;
    for (int i = 1; i < e; ++i) phi *= p;
  }
  return phi;
}

/// k-fold divisor function: prod over p^e || n of C(e + k - 1, k - 1).
inline u64 divisor_tau(const Factorization& f, int k) {
  if (k < 1) throw DomainError("divisor_tau: k must be >= 1");
  u64 tau = 1;
  for (const auto& [p, e] : f.factors) {
    u64 c = 1;
    for (int i = 1; i <= e; ++i) c = c * static_cast<u64>(k - 1 + i) / static_cast<u64>(i);
    tau *= c;
  }
  return tau;
}

inline int moebius(u64 n) { return moebius(factorize(n)); }
inline u64 euler_phi(u64 n) { return euler_phi(factorize(n)); }
inline int big_omega(u64 n) { return factorize(n).big_omega(); }
inline u64 divisor_tau(u64 n, int k) { return divisor_tau(factorize(n), k); }

struct MultFunctions {
  u64 n = 1;
  int mu = 1;
  u64 phi = 1;
  int big_omega = 0;
  std::vector<std::pair<int, u64>> tau;  // (k, tau_k(n))
};

inline MultFunctions mult_functions(u64 n, std::span<const int> ks = {}) {
  if (n == 0) throw DomainError("mult_functions: n must be positive");
  const Factorization f = factorize(n);
  MultFunctions out{n, moebius(f), euler_phi(f), f.big_omega(), {}};
  for (int k : ks) out.tau.emplace_back(k, divisor_tau(f, k));
  return out;
}

/// Omega(n) <= r. By convention is_almost_prime(1, r) is true (Omega(1) = 0).
inline bool is_almost_prime(u64 n, int r) {
  if (n == 0) throw DomainError("is_almost_prime: n must be positive");
  if (r < 1) throw DomainError("is_almost_prime: r must be >= 1");
  if (n == 1) return true;
  return factorize(n).big_omega() <= r;
}

/// Smallest-prime-factor table for fast repeated factorisation of n <= limit.
class SpfTable {
 public:
  explicit SpfTable(u64 limit) : spf_(limit + 1, 0) {
    for (u64 i = 2; i <= limit; ++i) {
      if (spf_[i] != 0) continue;
      for (u64 j = i; j <= limit; j += i) {
        if (spf_[j] == 0) spf_[j] = static_cast<std::uint32_t>(i);
      }
    }
  }
  u64 limit() const { return spf_.size() - 1; }
  Factorization factorize(u64 n) const {
    if (n == 0) throw DomainError("SpfTable::factorize: n must be positive");
    if (n > limit()) return wglab::factorize(n);
    Factorization f{n, {}};
    while (n > 1) {
      const u64 p = spf_[n];
      int e = 0;
      while (n % p == 0) {
        n /= p;
        ++e;
      }
      f.factors.emplace_back(p, e);
    }
    return f;
  }

 private:
  std::vector<std::uint32_t> spf_;
};

}  // namespace wglab
