#pragma once

// Scale parameters: every cutoff of the problem, in two modes.
//
// Paper mode evaluates the printed formulas verbatim (A = 1e100 makes Q0
// infinite, and for any 64-bit N the sifting bound z falls below 2, so
// paper mode is only useful for reporting which relations fail). Desk mode
// keeps the exponent shape where it is realisable and moves the rest:
//
//   U_k = N^{1/k}/k, U3* = N^{5/18}/3     (as printed)
//   Q1 = N^{4/9}, Q2 = N^{5/9}            (as printed with eps = 0)
//   Q0 = N^{2/27}                         (largest with N >= Q0^6 Q2)
//   D  = N^{1/4}, z = D^{1/3}             (printed D = N^{1/24} gives z < 2)
//
// Any field can be overridden individually afterwards.

#include <cmath>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "wglab/arith.hpp"
#include "wglab/errors.hpp"
#include "wglab/numeric.hpp"

namespace wglab {

enum class ScaleMode { Paper, Desk };

/// Closed integer interval [lo, hi]; empty when lo > hi.
struct IntRange {
  u64 lo = 1;
  u64 hi = 0;
  bool empty() const { return lo > hi; }
  u64 size() const { return empty() ? 0 : hi - lo + 1; }
  bool contains(u64 n) const { return lo <= n && n <= hi; }
};

struct ScaleParams {
  ScaleMode mode = ScaleMode::Desk;
  u64 N = 0;
  long double eps = 0;
  long double A = 0;
  long double Q0 = 0, Q1 = 0, Q2 = 0;
  long double D = 0, z = 0;
  long double U2 = 0, U3 = 0, U3s = 0;
  std::set<std::string> overridden;

  static ScaleParams paper(u64 N, long double eps = 0.0L, long double A = 1e100L) {
    ScaleParams p;
    p.mode = ScaleMode::Paper;
    p.N = N;
    p.eps = eps;
    p.A = A;
    const long double n = static_cast<long double>(N);
    const long double logn = std::log(n);
    p.Q0 = std::exp(20.0L * A * std::log(logn));
    p.Q1 = std::pow(n, 4.0L / 9.0L + 50.0L * eps);
    p.Q2 = std::pow(n, 5.0L / 9.0L - 50.0L * eps);
    p.D = std::pow(n, 1.0L / 24.0L - 51.0L * eps);
    p.z = std::cbrt(p.D);
    p.set_ranges();
    return p;
  }

  static ScaleParams desk(u64 N) {
    ScaleParams p;
    p.mode = ScaleMode::Desk;
    p.N = N;
    const long double n = static_cast<long double>(N);
    p.A = 0;
    p.Q0 = std::pow(n, 2.0L / 27.0L);
    p.Q1 = std::pow(n, 4.0L / 9.0L);
    p.Q2 = std::pow(n, 5.0L / 9.0L);
    p.D = std::pow(n, 0.25L);
    p.z = std::cbrt(p.D);
    p.set_ranges();
    return p;
  }

  static const std::vector<std::string>& keys() {
    static const std::vector<std::string> k{"eps", "A", "Q0", "Q1", "Q2", "D", "z", "U2", "U3", "U3s"};
    return k;
  }

  /// Override a single cutoff by name. Unknown names raise ValidationError.
  ScaleParams& set(std::string_view key, long double value) {
    const std::map<std::string_view, long double*> fields{
        {"eps", &eps}, {"A", &A},   {"Q0", &Q0}, {"Q1", &Q1}, {"Q2", &Q2},
        {"D", &D},     {"z", &z},   {"U2", &U2}, {"U3", &U3}, {"U3s", &U3s}};
    const auto it = fields.find(key);
    if (it == fields.end()) throw ValidationError("ScaleParams: unknown parameter '" + std::string(key) + "'");
    *it->second = value;
    overridden.insert(std::string(key));
    return *this;
  }

  bool is_overridden(const std::string& key) const { return overridden.count(key) != 0; }

  /// Hard requirements; each entry names the failed inequality.
  std::vector<std::string> violations() const {
    std::vector<std::string> out;
    auto finite = [](long double v) { return std::isfinite(v); };
    for (auto [name, v] : {std::pair{"Q0", Q0}, {"Q1", Q1}, {"Q2", Q2}, {"D", D}, {"z", z}, {"U2", U2},
                           {"U3", U3}, {"U3s", U3s}}) {
      if (!finite(v) || v <= 0) out.push_back(std::string(name) + " finite and positive");
    }
    if (!(z > 2)) out.push_back("z > 2");
    if (!(2 * Q1 <= Q2)) out.push_back("2 Q1 <= Q2");
    return out;
  }

  /// Additional requirements of the arc dissection.
  std::vector<std::string> dissection_violations() const {
    std::vector<std::string> out = violations();
    // Desk defaults meet these with equality, so allow rounding in the powers.
    const long double slack = 1 + 1e-15L;
    if (!(std::pow(Q0, 5.0L) <= Q1 * slack)) out.push_back("Q0^5 <= Q1");
    if (!(std::pow(Q0, 6.0L) * Q2 <= static_cast<long double>(N) * slack)) out.push_back("N >= Q0^6 Q2");
    if (!(Q0 >= 1)) out.push_back("Q0 >= 1");
    return out;
  }

  /// Advisory observations that do not block evaluation.
  std::vector<std::string> flags() const {
    std::vector<std::string> out;
    if (D < z * z * z * (1 - 1e-15L)) out.push_back("D < z^3");
    if (N % 2 != 0) out.push_back("N odd");
    if (!std::isfinite(Q0)) out.push_back("Q0 overflows (A too large for direct evaluation)");
    if (!(z > 2)) out.push_back("z <= 2");
    return out;
  }

  void validate() const {
    const auto v = violations();
    if (!v.empty()) throw ValidationError("ScaleParams: requirement failed: " + v.front());
  }

  void validate_dissection() const {
    const auto v = dissection_violations();
    if (!v.empty()) throw ValidationError("ScaleParams: requirement failed: " + v.front());
  }

  // Integer boxes. When the endpoint follows its formula the comparison is
  // exact in integers; an overridden endpoint is floored.

  /// m in (U2, 2U2]; formula mode: 4m^2 > N and m^2 <= N.
  IntRange range_U2() const {
    if (is_overridden("U2")) return floor_range(U2);
    const u64 hi = isqrt(N);
    u64 lo = isqrt(N / 4);
    while (4 * static_cast<u128>(lo) * lo <= N) ++lo;
    while (lo > 1 && 4 * static_cast<u128>(lo - 1) * (lo - 1) > N) --lo;
    return {lo, hi};
  }

  /// n in (U3, 2U3]; formula mode: 27n^3 > N and 27n^3 <= 8N.
  IntRange range_U3() const {
    if (is_overridden("U3")) return floor_range(U3);
    auto c27 = [](u64 n) { return 27 * static_cast<u128>(n) * n * n; };
    u64 lo = icbrt(N / 27);
    while (c27(lo) <= N) ++lo;
    while (lo > 1 && c27(lo - 1) > N) --lo;
    u64 hi = icbrt(N / 27 * 8 + 8);
    while (hi > 0 && c27(hi) > 8 * static_cast<u128>(N)) --hi;
    while (c27(hi + 1) <= 8 * static_cast<u128>(N)) ++hi;
    return {lo, hi};
  }

  /// n in (U3*, 2U3*]; formula mode: (3n)^18 > N^5 and (3n)^18 <= 2^18 N^5.
  IntRange range_U3s() const {
    if (is_overridden("U3s")) return floor_range(U3s);
    const BigInt n5 = boost::multiprecision::pow(BigInt(N), 5);
    const BigInt hi5 = n5 << 18;
    auto p18 = [](u64 n) -> BigInt { return boost::multiprecision::pow(BigInt(3 * n), 18); };
    const IntRange approx = floor_range(U3s);
    u64 lo = approx.lo > 2 ? approx.lo - 2 : 1;
    while (p18(lo) <= n5) ++lo;
    while (lo > 1 && p18(lo - 1) > n5) --lo;
    u64 hi = approx.hi + 2;
    while (hi > 0 && p18(hi) > hi5) --hi;
    while (p18(hi + 1) <= hi5) ++hi;
    return {lo, hi};
  }

  /// Smallest integer >= z.
  u64 z_ceil() const { return static_cast<u64>(std::ceil(z)); }

 private:
  static IntRange floor_range(long double U) {
    if (!(U >= 0)) return {1, 0};
    if (2 * U >= 18446744073709551615.0L) throw CapacityError("scale range does not fit in 64 bits");
    return {static_cast<u64>(std::floor(U)) + 1, static_cast<u64>(std::floor(2 * U))};
  }

  void set_ranges() {
    const long double n = static_cast<long double>(N);
    U2 = std::sqrt(n) / 2;
    U3 = std::cbrt(n) / 3;
    U3s = std::pow(n, 5.0L / 18.0L) / 3;
  }
};

inline const char* to_string(ScaleMode m) { return m == ScaleMode::Paper ? "paper" : "desk"; }

}  // namespace wglab
