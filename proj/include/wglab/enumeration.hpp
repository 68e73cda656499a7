#pragma once

// Representations N = x^2 + p1^3 + ... + p5^3, the weighted counts J and
// J_r, the empirical c_r sums, and the mean-value equation counts.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <tuple>
#include <string>
#include <unordered_map>
#include <vector>

#include "wglab/arith.hpp"
#include "wglab/errors.hpp"
#include "wglab/numeric.hpp"
#include "wglab/params.hpp"
#include "wglab/product_sets.hpp"
#include "wglab/sieve.hpp"

namespace wglab {

enum class RepMode { Unrestricted, PaperRange };

inline const char* to_string(RepMode m) { return m == RepMode::Unrestricted ? "unrestricted" : "paper-range"; }

/// Unrestricted records hold the five primes sorted; paper-range records hold
/// (p1, p2, p3) and (p4, p5) each sorted, the first group from the U3 box and
/// the second from the U3* box.
struct RepresentationRecord {
  u64 N = 0;
  u64 x = 0;
  std::array<u64, 5> primes{};
  int omega_x = 0;
  RepMode mode = RepMode::Unrestricted;

  auto key() const { return std::tuple(x, primes); }
  bool operator==(const RepresentationRecord&) const = default;
};

inline constexpr u64 kMaxRepresentationN = 10'000'000'000ULL;
inline constexpr u64 kRecordBudget = 5'000'000;
inline constexpr u64 kLookupBudget = 2'000'000'000ULL;

inline RepresentationRecord make_record(u64 N, u64 x, std::array<u64, 5> primes, RepMode mode) {
  u128 total = static_cast<u128>(x) * x;
  for (u64 p : primes) {
    if (!is_prime(p)) throw ConsistencyError("representation: " + std::to_string(p) + " is not prime");
    total += static_cast<u128>(p) * p * p;
  }
  if (total != N) throw ConsistencyError("representation: sum does not equal N");
  if (x == 0) throw ConsistencyError("representation: x must be positive");
  return {N, x, primes, factorize(x).big_omega(), mode};
}

/// Number of ordered prime tuples a record stands for.
inline u64 ordered_multiplicity(const RepresentationRecord& r) {
  auto arrangements = [](auto first, auto last) {
    u64 n = static_cast<u64>(last - first), total = 1;
    for (u64 i = 2; i <= n; ++i) total *= i;
    for (auto it = first; it != last;) {
      auto run = it;
      u64 len = 0;
      while (run != last && *run == *it) ++run, ++len;
      for (u64 i = 2; i <= len; ++i) total /= i;
      it = run;
    }
    return total;
  };
  if (r.mode == RepMode::Unrestricted) return arrangements(r.primes.begin(), r.primes.end());
  return arrangements(r.primes.begin(), r.primes.begin() + 3) * arrangements(r.primes.begin() + 3, r.primes.end());
}

namespace detail {

struct RepBoxes {
  u64 x_lo = 1, x_hi = 0;
  std::vector<u64> triple_primes;  // candidates for p1, p2, p3
  std::vector<u64> pair_primes;    // candidates for p4, p5
  bool joint_order = false;        // unrestricted: require p3 <= p4
};

inline std::vector<u64> primes_in(const IntRange& r) {
  if (r.empty() || r.hi < 2) return {};
  const auto t = prime_table(std::max<u64>(r.lo, 2), r.hi);
  return {t.begin(), t.end()};
}

inline RepBoxes unrestricted_boxes(u64 N) {
  RepBoxes b;
  b.x_lo = 1;
  b.x_hi = isqrt(N);
  const u64 cap = icbrt(N);
  if (cap >= 2) b.triple_primes = primes_in({2, cap});
  b.pair_primes = b.triple_primes;
  b.joint_order = true;
  return b;
}

inline RepBoxes paper_boxes(const ScaleParams& p) {
  RepBoxes b;
  const IntRange x = p.range_U2();
  b.x_lo = std::max<u64>(x.lo, 1);
  b.x_hi = x.hi;
  b.triple_primes = primes_in(p.range_U3());
  b.pair_primes = primes_in(p.range_U3s());
  return b;
}

inline void check_N(u64 N) {
  if (N % 2 != 0) throw DomainError("representations: N must be even");
  if (N > kMaxRepresentationN) throw CapacityError("representations: N above 1e10");
}

struct TripleIndex {
  std::vector<std::pair<u64, std::array<u32, 3>>> sums;  // sorted by sum
  explicit TripleIndex(const std::vector<u64>& ps, u64 limit, u64 budget = 40'000'000) {
    const std::size_t n = ps.size();
    for (std::size_t i = 0; i < n; ++i) {
      const u64 a = ps[i] * ps[i] * ps[i];
      if (a > limit) break;
      for (std::size_t j = i; j < n; ++j) {
        const u64 b = a + ps[j] * ps[j] * ps[j];
        if (b > limit) break;
        for (std::size_t k = j; k < n; ++k) {
          const u64 c = b + ps[k] * ps[k] * ps[k];
          if (c > limit) break;
          if (sums.size() >= budget) throw CapacityError("representations: triple table exceeds budget");
          sums.push_back({c, {static_cast<u32>(ps[i]), static_cast<u32>(ps[j]), static_cast<u32>(ps[k])}});
        }
      }
    }
    std::sort(sums.begin(), sums.end());
  }
  auto range(u64 s) const {
    return std::equal_range(sums.begin(), sums.end(), std::pair<u64, std::array<u32, 3>>{s, {0, 0, 0}},
                            [](const auto& a, const auto& b) { return a.first < b.first; });
  }
};

inline std::vector<std::pair<u64, std::array<u64, 2>>> pair_sums(const std::vector<u64>& ps, u64 limit) {
  std::vector<std::pair<u64, std::array<u64, 2>>> out;
  for (std::size_t i = 0; i < ps.size(); ++i)
    for (std::size_t j = i; j < ps.size(); ++j) {
      const u64 s = ps[i] * ps[i] * ps[i] + ps[j] * ps[j] * ps[j];
      if (s > limit) break;
      out.push_back({s, {ps[i], ps[j]}});
    }
  return out;
}

// Meet in the middle: the triple sums are indexed; every (pair, x) looks up
// its complement.
inline std::vector<RepresentationRecord> search(u64 N, const RepBoxes& b, RepMode mode, int max_omega,
                                                u64 budget) {
  std::vector<RepresentationRecord> out;
  if (b.x_lo > b.x_hi || b.triple_primes.empty() || b.pair_primes.empty()) return out;
  const TripleIndex triples(b.triple_primes, N);
  const auto pairs = pair_sums(b.pair_primes, N);
  if (static_cast<u128>(pairs.size()) * (b.x_hi - b.x_lo + 1) > kLookupBudget) {
    throw CapacityError("representations: search exceeds the lookup budget");
  }
  std::unordered_map<u64, int> omega_cache;
  auto omega = [&](u64 x) {
    auto it = omega_cache.find(x);
    if (it == omega_cache.end()) it = omega_cache.emplace(x, factorize(x).big_omega()).first;
    return it->second;
  };
  for (u64 x = b.x_lo; x <= b.x_hi; ++x) {
    const u64 sq = x * x;
    if (sq >= N) break;
    if (omega(x) > max_omega) continue;
    for (const auto& [s2, pq] : pairs) {
      if (sq + s2 >= N) continue;
      const auto [lo, hi] = triples.range(N - sq - s2);
      for (auto it = lo; it != hi; ++it) {
        const auto& t = it->second;
        if (b.joint_order && t[2] > pq[0]) continue;
        if (out.size() >= budget) throw CapacityError("representations: record budget exceeded");
        out.push_back(make_record(N, x, {t[0], t[1], t[2], pq[0], pq[1]}, mode));
      }
    }
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& c) { return a.key() < c.key(); });
  return out;
}

}  // namespace detail

/// Complete list under the sortedness convention, filtered by Omega(x) <= max_omega.
inline std::vector<RepresentationRecord> find_representations(u64 N, RepMode mode = RepMode::Unrestricted,
                                                              int max_omega = 64, u64 budget = kRecordBudget) {
  detail::check_N(N);
  const detail::RepBoxes b =
      mode == RepMode::Unrestricted ? detail::unrestricted_boxes(N) : detail::paper_boxes(ScaleParams::desk(N));
  return detail::search(N, b, mode, max_omega, budget);
}

/// Paper-range search with the boxes taken from explicit parameters.
inline std::vector<RepresentationRecord> find_representations(const ScaleParams& params, int max_omega = 64,
                                                              u64 budget = kRecordBudget) {
  detail::check_N(params.N);
  return detail::search(params.N, detail::paper_boxes(params), RepMode::PaperRange, max_omega, budget);
}

/// Five nested prime loops; only for N <= 1e5.
inline std::vector<RepresentationRecord> find_representations_naive(u64 N, RepMode mode = RepMode::Unrestricted,
                                                                    int max_omega = 64) {
  detail::check_N(N);
  if (N > 100'000) throw CapacityError("naive search: N above 1e5");
  const detail::RepBoxes b =
      mode == RepMode::Unrestricted ? detail::unrestricted_boxes(N) : detail::paper_boxes(ScaleParams::desk(N));
  std::vector<RepresentationRecord> out;
  const auto& A = b.triple_primes;
  const auto& B = b.pair_primes;
  auto cube = [](u64 p) { return p * p * p; };
  for (std::size_t i = 0; i < A.size(); ++i)
    for (std::size_t j = i; j < A.size(); ++j)
      for (std::size_t k = j; k < A.size(); ++k)
        for (std::size_t l = 0; l < B.size(); ++l)
          for (std::size_t m = l; m < B.size(); ++m) {
            if (b.joint_order && A[k] > B[l]) continue;
            const u64 s = cube(A[i]) + cube(A[j]) + cube(A[k]) + cube(B[l]) + cube(B[m]);
            if (s >= N) continue;
            const u64 x = isqrt(N - s);
            if (x * x != N - s || x < b.x_lo || x > b.x_hi) continue;
            auto rec = make_record(N, x, {A[i], A[j], A[k], B[l], B[m]}, mode);
            if (rec.omega_x <= max_omega) out.push_back(rec);
          }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& c) { return a.key() < c.key(); });
  return out;
}

/// Number of representations with Omega(x) <= r.
inline u64 R_count(u64 N, int r, RepMode mode = RepMode::Unrestricted, bool ordered = false) {
  if (r < 1) throw DomainError("R_count: r must be >= 1");
  u64 total = 0;
  for (const auto& rec : find_representations(N, mode, r)) total += ordered ? ordered_multiplicity(rec) : 1;
  return total;
}

/// Existence search sharing its tables across a range of N.
class RepresentationSearch {
 public:
  explicit RepresentationSearch(u64 N_max) : N_max_(N_max) {
    if (N_max > kMaxRepresentationN) throw CapacityError("representations: N above 1e10");
    const u64 cap = icbrt(N_max);
    if (cap >= 2) primes_ = detail::primes_in({2, cap});
    for (std::size_t i = 0; i < primes_.size(); ++i)
      for (std::size_t j = i; j < primes_.size(); ++j) {
        const u64 s = primes_[i] * primes_[i] * primes_[i] + primes_[j] * primes_[j] * primes_[j];
        if (s <= N_max) pairs_.push_back(s);
      }
    std::sort(pairs_.begin(), pairs_.end());
    pairs_.erase(std::unique(pairs_.begin(), pairs_.end()), pairs_.end());
  }

  /// Smallest x with Omega(x) <= r admitting some five prime cubes, or 0.
  u64 first_x(u64 N, int r) const {
    detail::check_N(N);
    if (N > N_max_) throw DomainError("RepresentationSearch: N above the table bound");
    for (u64 x = 1; x * x < N; ++x) {
      if (factorize(x).big_omega() > r) continue;
      if (is_five_cubes(N - x * x)) return x;
    }
    return 0;
  }

 private:
  bool is_three_cubes(u64 M) const {
    for (std::size_t i = 0; i < primes_.size(); ++i) {
      const u64 a = primes_[i] * primes_[i] * primes_[i];
      if (3 * a > M) break;
      if (std::binary_search(pairs_.begin(), pairs_.end(), M - a)) return true;
    }
    return false;
  }
  bool is_five_cubes(u64 M) const {
    for (u64 s : pairs_) {
      if (s > M) break;
      if (is_three_cubes(M - s)) return true;
    }
    return false;
  }

  u64 N_max_;
  std::vector<u64> primes_;
  std::vector<u64> pairs_;
};

// ---------------------------------------------------------------------------
// Weighted counts

inline long double record_log_weight(const RepresentationRecord& r) {
  long double w = 1;
  for (u64 p : r.primes) w *= std::log(static_cast<long double>(p));
  return w;
}

/// J(N, d): sum over box solutions with d | x of prod log p_j.
inline long double weighted_J(const std::vector<RepresentationRecord>& records, u64 d, bool ordered = false) {
  if (d == 0) throw DomainError("weighted_J: d must be >= 1");
  CompensatedSum s;
  for (const auto& r : records) {
    if (r.x % d != 0) continue;
    const long double w = record_log_weight(r);
    s.add(ordered ? w * static_cast<long double>(ordered_multiplicity(r)) : w);
  }
  return s.value();
}

inline long double weighted_J(u64 d, const ScaleParams& params, bool ordered = false) {
  return weighted_J(find_representations(params), d, ordered);
}

/// Whether l lies in N_r: r - 1 primes >= z with l times its largest prime at most 2U2.
inline bool in_N_r(u64 l, int r, const ScaleParams& params) {
  const Factorization f = factorize(l);
  if (f.big_omega() != r - 1 || f.factors.empty()) return false;
  if (static_cast<long double>(f.factors.front().first) < params.z) return false;
  const u64 largest = f.factors.back().first;
  return static_cast<u128>(l) * largest <= params.range_U2().hi;
}

/// J_r(N, d): x = l p with l in N_r and p prime, d | x; weight
/// log p / log(U2/l) times prod log p_j over the five cube primes. A record
/// contributes once for each admissible prime p | x.
inline long double weighted_J_r(const std::vector<RepresentationRecord>& records, u64 d, int r,
                                const ScaleParams& params, bool ordered = false) {
  if (d == 0) throw DomainError("weighted_J_r: d must be >= 1");
  if (r < 2) throw DomainError("weighted_J_r: r must be >= 2");
  CompensatedSum s;
  for (const auto& rec : records) {
    if (rec.x % d != 0) continue;
    const long double base =
        record_log_weight(rec) * (ordered ? static_cast<long double>(ordered_multiplicity(rec)) : 1.0L);
    for (const auto& [p, e] : factorize(rec.x).factors) {
      const u64 l = rec.x / p;
      if (!in_N_r(l, r, params)) continue;
      s.add(base * std::log(static_cast<long double>(p)) / std::log(params.U2 / static_cast<long double>(l)));
    }
  }
  return s.value();
}

inline long double weighted_J_r(u64 d, int r, const ScaleParams& params, bool ordered = false) {
  return weighted_J_r(find_representations(params), d, r, params, ordered);
}

// ---------------------------------------------------------------------------
// Empirical c_r

struct CrEmpirical {
  int r = 0;
  u64 members = 0;
  long double value = 0;        // log U2 * sum 1/(l log(U2/l))
  long double outer_limit = 0;  // log(2U2)/log z - 1
  long double integral = 0;     // the iterated integral with that outer limit
  long double ratio = 0;        // value / integral (NaN when the integral vanishes)
};

inline CrEmpirical c_r_empirical(const ScaleParams& params, int r, long double step = 1.0L / 200) {
  CrEmpirical out;
  out.r = r;
  const auto set = enumerate_product_sets(ProductSetKind::N, r, params);
  out.members = set.members.size();
  CompensatedSum s;
  for (const auto& m : set.members) {
    const long double l = static_cast<long double>(m.value);
    s.add(1 / (l * std::log(params.U2 / l)));
  }
  out.value = std::log(params.U2) * s.value();
  out.outer_limit = std::log(2 * params.U2) / std::log(params.z) - 1;
  if (r >= kCrMin && out.outer_limit >= 3) {
    CrGridOptions opt;
    opt.step = step;
    opt.tolerance = 1e-4L;
    opt.outer_limit = out.outer_limit;
    out.integral = cr_table_grid(opt)[r - kCrMin].value;
  }
  out.ratio = out.integral > 0 ? out.value / out.integral : std::numeric_limits<long double>::quiet_NaN();
  return out;
}

// ---------------------------------------------------------------------------
// Equation counts behind the fourth and sixth moments

enum class MomentKind { I, II, III, IV };

inline const char* to_string(MomentKind k) {
  switch (k) {
    case MomentKind::I: return "i";
    case MomentKind::II: return "ii";
    case MomentKind::III: return "iii";
    case MomentKind::IV: return "iv";
  }
  return "?";
}

struct MomentCount {
  MomentKind kind = MomentKind::I;
  u64 X = 0;
  long double count = 0;     // solutions (weighted by prod log p for iii, iv)
  long double diagonal = 0;  // trivially symmetric solutions, same weighting
  u64 solutions = 0;         // unweighted number of solutions of the same equation
  u64 table_size = 0;
  long double max_weight = 1;
};

inline constexpr u64 kMomentTableBudget = 60'000'000;

/// (i)   n1^3 + m1^3 + m2^3 = n2^3 + m3^3 + m4^3, n in (U3, 2U3], m in (U3*, 2U3*]
/// (ii)  n1^3 + n2^3 + m1^3 + m2^3 = n3^3 + n4^3 + m3^3 + m4^3
/// (iii), (iv): the same over primes, each solution weighted by prod log p.
/// Variables are ordered; the boxes are those of ScaleParams at N = X.
inline MomentCount moment_count(MomentKind kind, u64 X, u64 budget = kMomentTableBudget) {
  MomentCount out;
  out.kind = kind;
  out.X = X;
  const ScaleParams p = ScaleParams::desk(X);
  const bool primes = kind == MomentKind::III || kind == MomentKind::IV;
  const int n_count = (kind == MomentKind::I || kind == MomentKind::III) ? 1 : 2;
  auto values = [&](IntRange r) {
    std::vector<std::pair<u64, long double>> v;  // (value, weight)
    if (r.empty()) return v;
    if (primes) {
      for (u64 q : detail::primes_in(r)) v.push_back({q, std::log(static_cast<long double>(q))});
    } else {
      for (u64 n = r.lo; n <= r.hi; ++n) v.push_back({n, 1.0L});
    }
    return v;
  };
  const auto A = values(p.range_U3());
  const auto B = values(p.range_U3s());
  const long double size = std::pow(static_cast<long double>(A.size()), n_count) * B.size() * B.size();
  if (size > static_cast<long double>(budget)) throw CapacityError("moment_count: table exceeds budget");

  // one side of the equation: n_count values from A, two from B, ordered
  struct Cell {
    u64 count = 0;
    long double weight = 0;
    long double weight_sq = 0;
  };
  std::unordered_map<u64, Cell> table;
  table.reserve(static_cast<std::size_t>(size) + 1);
  auto cube = [](u64 v) { return v * v * v; };
  for (const auto& [b1, w1] : B)
    for (const auto& [b2, w2] : B) {
      const u64 sb = cube(b1) + cube(b2);
      const long double wb = w1 * w2;
      for (const auto& [a1, v1] : A) {
        if (n_count == 1) {
          auto& c = table[sb + cube(a1)];
          ++c.count;
          c.weight += wb * v1;
          c.weight_sq += (wb * v1) * (wb * v1);
        } else {
          for (const auto& [a2, v2] : A) {
            auto& c = table[sb + cube(a1) + cube(a2)];
            const long double w = wb * v1 * v2;
            ++c.count;
            c.weight += w;
            c.weight_sq += w * w;
          }
        }
      }
    }
  out.table_size = table.size();
  CompensatedSum total;
  for (const auto& [s, c] : table) {
    out.solutions += c.count * c.count;
    total.add(primes ? c.weight * c.weight : static_cast<long double>(c.count * c.count));
  }
  out.count = total.value();

  // Diagonal: each side is a rearrangement of the other within its group.
  // Weighted: sum over ordered left tuples of w^2 times the number of
  // rearrangements, computed group by group.
  auto group_diag = [&](const std::vector<std::pair<u64, long double>>& vals, int k) {
    long double s = 0;
    if (k == 1) {
      for (const auto& [v, w] : vals) s += w * w;
    } else {
      for (const auto& [v1, w1] : vals)
        for (const auto& [v2, w2] : vals) s += (w1 * w2) * (w1 * w2) * (v1 == v2 ? 1 : 2);
    }
    return s;
  };
  out.diagonal = group_diag(A, n_count) * group_diag(B, 2);
  long double wmax = 1;
  if (primes) {
    const long double la = A.empty() ? 0 : A.back().second, lb = B.empty() ? 0 : B.back().second;
    wmax = std::pow(la, 2 * n_count) * std::pow(lb, 4);
  }
  out.max_weight = wmax;
  return out;
}

}  // namespace wglab
