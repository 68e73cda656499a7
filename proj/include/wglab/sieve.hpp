#pragma once

// Linear sieve: Rosser weights, the sieve functions F and f, the iterated
// integrals c_r and the final margin.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "wglab/arith.hpp"
#include "wglab/errors.hpp"
#include "wglab/local.hpp"
#include "wglab/numeric.hpp"

namespace wglab {

enum class SieveSign { Lower, Upper };

inline const char* to_string(SieveSign s) { return s == SieveSign::Lower ? "lower" : "upper"; }

namespace detail {

// Conditions on the prime factors p1 > p2 > ... > pr (descending), checked
// one prefix at a time. Upper weights test odd positions, lower weights even
// positions: p1 ... p_{m-1} p_m^3 <= D.
inline bool rosser_position_checked(SieveSign sign, std::size_t m) {
  return sign == SieveSign::Upper ? (m % 2 == 1) : (m % 2 == 0);
}

inline bool rosser_prefix_ok(SieveSign sign, std::size_t m, long double prefix_before, u64 p, long double D) {
  const long double lp = static_cast<long double>(p);
  if (prefix_before * lp > D) return false;
  if (rosser_position_checked(sign, m) && prefix_before * lp * lp * lp > D) return false;
  return true;
}

// primes strictly descending, all already known to lie in (2, z)
inline int rosser_lambda_primes(const std::vector<u64>& primes, SieveSign sign, long double D) {
  if (D < 1) return 0;
  long double prefix = 1;
  for (std::size_t m = 1; m <= primes.size(); ++m) {
    if (!rosser_prefix_ok(sign, m, prefix, primes[m - 1], D)) return 0;
    prefix *= static_cast<long double>(primes[m - 1]);
  }
  return primes.size() % 2 == 0 ? 1 : -1;
}

}  // namespace detail

/// lambda^{+/-}(d) of level D for the sifting range 2 < p < z.
inline int rosser_lambda(u64 d, SieveSign sign, long double D,
                         long double z = std::numeric_limits<long double>::infinity()) {
  if (d == 0) throw DomainError("rosser_lambda: d must be >= 1");
  if (static_cast<long double>(d) > D) return 0;
  if (d == 1) return 1;
  const Factorization f = factorize(d);
  if (!f.squarefree()) return 0;
  std::vector<u64> primes;
  for (const auto& [p, e] : f.factors) {
    if (p <= 2 || static_cast<long double>(p) >= z) return 0;
    primes.push_back(p);
  }
  std::sort(primes.rbegin(), primes.rend());
  return detail::rosser_lambda_primes(primes, sign, D);
}

inline constexpr u64 kSieveNodeBudget = 50'000'000;

/// Visits every d with lambda(d) != 0 as (d, lambda(d), primes descending).
/// Primes are added from the largest down, so a failed prefix prunes the
/// whole subtree.
inline void for_each_rosser_support(SieveSign sign, long double D, long double z,
                                    const std::function<void(u64, int, const std::vector<u64>&)>& visit,
                                    u64 budget = kSieveNodeBudget) {
  if (!(D >= 1)) throw DomainError("rosser support: D must be >= 1");
  const u64 zmax = z > 3 ? static_cast<u64>(std::ceil(z)) - 1 : 2;
  std::vector<u64> primes;
  for (u64 p : prime_table(3, std::max<u64>(zmax, 3))) {
    if (static_cast<long double>(p) < z) primes.push_back(p);
  }
  std::vector<u64> stack;
  u64 nodes = 0;
  std::function<void(std::size_t, u64, long double)> walk = [&](std::size_t limit, u64 d, long double prefix) {
    if (++nodes > budget) throw CapacityError("rosser support: node budget exceeded");
    visit(d, stack.size() % 2 == 0 ? 1 : -1, stack);
    const std::size_t m = stack.size() + 1;
    for (std::size_t i = 0; i < limit; ++i) {
      if (!detail::rosser_prefix_ok(sign, m, prefix, primes[i], D)) break;
      stack.push_back(primes[i]);
      walk(i, d * primes[i], prefix * static_cast<long double>(primes[i]));
      stack.pop_back();
    }
  };
  walk(primes.size(), 1, 1.0L);
}

struct SandwichViolation {
  u64 m = 0;
  int lower = 0, indicator = 0, upper = 0;
};

struct SandwichReport {
  u64 m_max = 0;
  long double z = 0, D = 0;
  u64 checked = 0;
  std::vector<SandwichViolation> violations;
};

/// Checks sum_{d | (m, P)} lambda^-(d) <= [(m, P) = 1] <= sum lambda^+(d)
/// for every m <= m_max; any violation raises PropertyFailure.
inline SandwichReport sandwich_verify(u64 m_max, long double z, long double D, bool throw_on_violation = true) {
  SandwichReport rep{m_max, z, D, 0, {}};
  const SpfTable spf(std::max<u64>(m_max, 2));
  for (u64 m = 1; m <= m_max; ++m) {
    std::vector<u64> ps;
    for (const auto& [p, e] : spf.factorize(m).factors) {
      if (p > 2 && static_cast<long double>(p) < z) ps.push_back(p);
    }
    std::reverse(ps.begin(), ps.end());
    int lo = 0, hi = 0;
    const std::size_t k = ps.size();
    for (u64 mask = 0; mask < (1ULL << k); ++mask) {
      std::vector<u64> sub;
      for (std::size_t i = 0; i < k; ++i) {
        if (mask >> i & 1) sub.push_back(ps[i]);
      }
      lo += detail::rosser_lambda_primes(sub, SieveSign::Lower, D);
      hi += detail::rosser_lambda_primes(sub, SieveSign::Upper, D);
    }
    const int ind = k == 0 ? 1 : 0;
    ++rep.checked;
    if (lo > ind || ind > hi) rep.violations.push_back({m, lo, ind, hi});
  }
  if (throw_on_violation && !rep.violations.empty()) {
    const auto& v = rep.violations.front();
    throw PropertyFailure("sandwich_verify: bracketing fails at m = " + std::to_string(v.m));
  }
  return rep;
}

using SieveOmega = std::function<Rational(u64 p)>;

struct SieveSumValue {
  SieveSign sign = SieveSign::Lower;
  Rational exact;
  long double value = 0;
  u64 support_size = 0;
};

/// sum over d | P(z) of lambda(d) omega(d) / d, exact.
inline SieveSumValue sieve_sum(SieveSign sign, long double D, long double z, const SieveOmega& omega,
                               u64 budget = kSieveNodeBudget) {
  SieveSumValue out;
  out.sign = sign;
  std::map<u64, Rational> local;  // omega(p)/p, cached
  // Terms grouped by their largest prime keep the rationals small.
  std::vector<Rational> pieces;
  Rational acc = 0;
  u64 last_top = 0;
  for_each_rosser_support(
      sign, D, z,
      [&](u64, int lambda, const std::vector<u64>& primes) {
        Rational term = lambda;
        for (u64 p : primes) {
          auto it = local.find(p);
          if (it == local.end()) it = local.emplace(p, omega(p) / Rational(p)).first;
          term *= it->second;
        }
        const u64 top = primes.empty() ? 0 : primes.front();
        if (top != last_top) {
          pieces.push_back(acc);
          acc = 0;
          last_top = top;
        }
        acc += term;
        ++out.support_size;
      },
      budget);
  pieces.push_back(acc);
  Rational total = 0;
  for (const auto& r : pieces) total += r;
  out.exact = total;
  out.value = to_long_double(total);
  return out;
}

inline long double linear_sieve_F(long double s) {
  if (!(s >= 1 && s <= 3)) throw DomainError("linear_sieve_F: s must lie in [1, 3]");
  return 2 * std::exp(kEulerGamma) / s;
}

inline long double linear_sieve_f(long double s) {
  if (!(s >= 2 && s <= 4)) throw DomainError("linear_sieve_f: s must lie in [2, 4]");
  return 2 * std::exp(kEulerGamma) * std::log(s - 1) / s;
}

struct SieveComparison {
  long double D = 0, z = 0, s = 0;
  SieveSumValue lower, upper;
  long double V = 0;
  long double lower_ratio = 0;  // lower / (V f(s)); NaN when f is out of range
  long double upper_ratio = 0;  // upper / (V F(s)); NaN when F is out of range
};

/// Both sieve sums against V(z) f(s) and V(z) F(s), s = log D / log z.
inline SieveComparison sieve_compare(long double D, long double z, const SieveOmega& omega) {
  SieveComparison c;
  c.D = D;
  c.z = z;
  c.s = std::log(D) / std::log(z);
  c.lower = sieve_sum(SieveSign::Lower, D, z, omega);
  c.upper = sieve_sum(SieveSign::Upper, D, z, omega);
  c.V = sifting_product_V(z, omega);
  const long double nan = std::numeric_limits<long double>::quiet_NaN();
  // s = 3 up to rounding of z = D^{1/3}
  const long double s = std::fabs(c.s - std::nearbyint(c.s)) < 1e-12L ? std::nearbyint(c.s) : c.s;
  c.lower_ratio = (s >= 2 && s <= 4) ? c.lower.value / (c.V * linear_sieve_f(s)) : nan;
  c.upper_ratio = (s >= 1 && s <= 3) ? c.upper.value / (c.V * linear_sieve_F(s)) : nan;
  return c;
}

// ---------------------------------------------------------------------------
// c_r

enum class CrMethod { Grid, MonteCarlo };

inline const char* to_string(CrMethod m) { return m == CrMethod::Grid ? "grid" : "mc"; }

struct CrConstant {
  int r = 0;
  long double value = 0;
  CrMethod method = CrMethod::Grid;
  long double grid_step = 0;      // grid only
  u64 samples = 0;                // Monte Carlo only
  long double error_estimate = 0; // half-step difference, or one standard error
  long double outer_limit = 35;
};

inline constexpr int kCrMin = 7;
inline constexpr int kCrMax = 36;
inline constexpr long double kCrOuterLimit = 35;

namespace detail {

/// Phi_j on the grid 2, 2 + h, ..., T for j = 2 .. jmax, where
///   Phi_2(t) = int_2^{t-1} log(u-1)/u du,
///   Phi_j(t) = int_j^{t-1} Phi_{j-1}(u)/u du.
/// With h = 1/n every limit is a node.
class PhiChain {
 public:
  PhiChain(int n, int jmax, long double T) : n_(n), T_(T) {
    if (n < 2 || n % 2 != 0) throw DomainError("c_r grid: steps per unit must be even and >= 2");
    h_ = 1.0L / n;
    // nodes 2, 2 + h, ... up to the first node >= T
    const std::size_t count = static_cast<std::size_t>(std::ceil((T - 2) * n - 1e-9L)) + 1;
    nodes_.resize(count);
    for (std::size_t i = 0; i < count; ++i) nodes_[i] = 2 + h_ * static_cast<long double>(i);
    std::vector<long double> g(count);
    for (std::size_t i = 0; i < count; ++i) g[i] = nodes_[i] > 2 ? std::log(nodes_[i] - 1) / nodes_[i] : 0.0L;
    phi_.push_back({});  // j = 0, 1 unused
    phi_.push_back({});
    phi_.push_back(shifted(cumulative(g, 2)));
    for (int j = 3; j <= jmax; ++j) {
      const auto& prev = phi_.back();
      for (std::size_t i = 0; i < count; ++i) g[i] = prev[i] / nodes_[i];
      phi_.push_back(shifted(cumulative(g, j)));
    }
  }

  /// int_{a}^{T} Phi_j(t)/t dt with integer a; a non-node T is reached by
  /// linear interpolation over the last partial step.
  long double outer(int j, int a) const {
    if (a >= T_) return 0;
    std::vector<long double> g(nodes_.size());
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = phi_[j][i] / nodes_[i];
    const std::vector<long double> G = cumulative(g, a);
    const long double x = (T_ - 2) * n_;
    const std::size_t i = static_cast<std::size_t>(std::floor(x + 1e-9L));
    const long double w = x - static_cast<long double>(i);
    if (w <= 1e-9L || i + 1 >= G.size()) return G[std::min(i, G.size() - 1)];
    const long double gT = g[i] * (1 - w) + g[i + 1] * w;
    return G[i] + w * h_ * (g[i] + gT) / 2;
  }

  /// Phi_j at an arbitrary t, by linear interpolation between nodes.
  long double phi(int j, long double t) const {
    if (t <= 2) return 0;
    if (t >= nodes_.back()) return phi_[j].back();
    const long double x = (t - 2) * n_;
    const std::size_t i = static_cast<std::size_t>(x);
    const long double w = x - static_cast<long double>(i);
    return phi_[j][i] * (1 - w) + phi_[j][i + 1] * w;
  }

 private:
  std::size_t index(long double t) const { return static_cast<std::size_t>(std::llround((t - 2) * n_)); }

  // G(x) = int_a^x g for x >= a (0 below), composite Simpson on node pairs
  // measured from a, with the three-point rule for the interior node.
  std::vector<long double> cumulative(const std::vector<long double>& g, long double a) const {
    std::vector<long double> G(g.size(), 0.0L);
    const std::size_t start = index(a);
    for (std::size_t i = start; i + 1 < g.size(); ++i) {
      const bool forward = ((i - start) % 2 == 0) && i + 2 < g.size();
      long double piece;
      if (forward) {
        piece = h_ / 12 * (5 * g[i] + 8 * g[i + 1] - g[i + 2]);
      } else if (i > 0) {
        piece = h_ / 12 * (-g[i - 1] + 8 * g[i] + 5 * g[i + 1]);
      } else {
        piece = h_ / 2 * (g[i] + g[i + 1]);
      }
      G[i + 1] = G[i] + piece;
    }
    return G;
  }

  // Phi(t) = G(t - 1)
  std::vector<long double> shifted(const std::vector<long double>& G) const {
    std::vector<long double> out(G.size(), 0.0L);
    for (std::size_t i = static_cast<std::size_t>(n_); i < G.size(); ++i) out[i] = G[i - n_];
    return out;
  }

  int n_;
  long double T_, h_ = 0;
  std::vector<long double> nodes_;
  std::vector<std::vector<long double>> phi_;
};

inline int steps_per_unit(long double step) {
  if (!(step > 0 && step <= 0.5L)) throw DomainError("c_r grid: step must lie in (0, 1/2]");
  const long double n = 1 / step;
  const long double rounded = std::nearbyint(n);
  if (std::fabs(n - rounded) > 1e-9L * n || static_cast<long long>(rounded) % 2 != 0) {
    throw DomainError("c_r grid: step must be 1/n with n even");
  }
  return static_cast<int>(rounded);
}

inline void check_r(int r) {
  if (r < kCrMin || r > kCrMax) throw DomainError("c_r: r must lie in [7, 36]");
}

}  // namespace detail

struct CrGridOptions {
  long double step = 1.0L / 400;
  long double tolerance = 1e-6L;  // relative change allowed on halving the step
  long double outer_limit = kCrOuterLimit;
};

/// All c_r on one grid pair (step and step/2); the finer value is reported.
inline std::vector<CrConstant> cr_table_grid(const CrGridOptions& opt = {}) {
  const int n = detail::steps_per_unit(opt.step);
  const long double T = opt.outer_limit;
  if (!(T >= 3)) throw DomainError("c_r: outer limit must be >= 3");
  const int jmax = kCrMax - 2;
  const detail::PhiChain coarse(n, jmax, T), fine(2 * n, jmax, T);
  std::vector<CrConstant> out;
  for (int r = kCrMin; r <= kCrMax; ++r) {
    CrConstant c;
    c.r = r;
    c.method = CrMethod::Grid;
    c.grid_step = opt.step / 2;
    c.outer_limit = T;
    if (r - 1 < T) {
      const long double a = coarse.outer(r - 2, r - 1);
      c.value = fine.outer(r - 2, r - 1);
      c.error_estimate = std::fabs(c.value - a);
      if (c.error_estimate > opt.tolerance * std::max(std::fabs(c.value), 1e-30L) && c.error_estimate > 1e-15L) {
        throw PrecisionError("c_r grid: step too coarse for r = " + std::to_string(r));
      }
    }
    out.push_back(c);
  }
  return out;
}

struct CrMonteCarloOptions {
  u64 samples = 20'000'000;
  u64 seed = 1;
  long double outer_limit = kCrOuterLimit;
};

/// Uniform sampling of the simplex in gap coordinates:
///   y_{r-2} = t_{r-2} - 2, y_k = t_k - t_{k+1} - 1, sum y <= T - r + 1.
inline CrConstant c_r_monte_carlo(int r, const CrMonteCarloOptions& opt = {}) {
  detail::check_r(r);
  CrConstant c;
  c.r = r;
  c.method = CrMethod::MonteCarlo;
  c.samples = opt.samples;
  c.outer_limit = opt.outer_limit;
  const int dim = r - 2;
  const double L = static_cast<double>(opt.outer_limit) - r + 1;
  if (L <= 0 || opt.samples == 0) return c;
  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::array<double, kCrMax> u{};
  CompensatedSum sum, sum_sq;
  for (u64 s = 0; s < opt.samples; ++s) {
    for (int i = 0; i < dim; ++i) u[i] = unit(rng);
    std::sort(u.begin(), u.begin() + dim);
    // t_{r-2} = 2 + L y_{r-2}, working upward; sorted uniforms give the gaps.
    double t = 2 + L * u[0];
    double f = std::log(t - 1) / t;
    for (int i = 1; i < dim; ++i) {
      t += 1 + L * (u[i] - u[i - 1]);
      f /= t;
    }
    sum.add(f);
    sum_sq.add(static_cast<long double>(f) * f);
  }
  long double volume = 1;
  for (int i = 1; i <= dim; ++i) volume *= static_cast<long double>(L) / i;
  const long double m = static_cast<long double>(opt.samples);
  const long double mean = sum.value() / m;
  const long double var = std::max(0.0L, sum_sq.value() / m - mean * mean);
  c.value = volume * mean;
  c.error_estimate = volume * std::sqrt(var / m);
  return c;
}

inline CrConstant c_r_constant(int r, CrMethod method, long double step = 1.0L / 400, u64 samples = 20'000'000,
                               u64 seed = 1) {
  detail::check_r(r);
  if (method == CrMethod::Grid) {
    CrGridOptions opt;
    opt.step = step;
    return cr_table_grid(opt)[r - kCrMin];
  }
  CrMonteCarloOptions opt;
  opt.samples = samples;
  opt.seed = seed;
  return c_r_monte_carlo(r, opt);
}

/// The printed upper bounds for c_7, c_8, c_9 and c_j (10 <= j <= 36).
inline std::vector<long double> paper_cr_constants() {
  std::vector<long double> c{0.448639L, 0.113524L, 0.022574L};
  c.resize(kCrMax - kCrMin + 1, 0.003579L);
  return c;
}

inline long double paper_cr_bound(int r) {
  detail::check_r(r);
  return paper_cr_constants()[r - kCrMin];
}

struct Margin {
  long double raw = 0;     // log 2 - sum c_r
  long double scaled = 0;  // f(3) - F(3) sum c_r
};

inline Margin theorem_margin(const std::vector<long double>& c) {
  if (c.size() != static_cast<std::size_t>(kCrMax - kCrMin + 1)) {
    throw DomainError("theorem_margin: expected 30 values for r = 7..36");
  }
  CompensatedSum s;
  for (long double v : c) s.add(v);
  Margin m;
  m.raw = std::numbers::ln2_v<long double> - s.value();
  m.scaled = linear_sieve_f(3) - linear_sieve_F(3) * s.value();
  return m;
}

inline Margin theorem_margin(const std::vector<CrConstant>& c) {
  std::vector<long double> v;
  for (const auto& x : c) v.push_back(x.value);
  return theorem_margin(v);
}

}  // namespace wglab
