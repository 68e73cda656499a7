#include <gtest/gtest.h>

#include <cmath>
#include <iostream>
#include <map>
#include <random>
#include <set>

#include "wglab/enumeration.hpp"

using namespace wglab;

namespace {

using Tuple = std::pair<u64, std::array<u64, 5>>;

bool prime_oracle(u64 n) {
  if (n < 2) return false;
  for (u64 d = 2; d * d <= n; ++d)
    if (n % d == 0) return false;
  return true;
}

// Every x, then every multiset of five primes by recursion; no tables.
std::set<Tuple> brute_unrestricted(u64 N) {
  std::vector<u64> ps;
  for (u64 p = 2; p * p * p < N; ++p)
    if (prime_oracle(p)) ps.push_back(p);
  std::set<Tuple> out;
  std::array<u64, 5> cur{};
  std::function<void(std::size_t, int, u64)> rec = [&](std::size_t from, int depth, u64 rest) {
    if (depth == 5) {
      if (rest == 0) return;
      const u64 x = static_cast<u64>(std::llround(std::sqrt(static_cast<double>(rest))));
      for (u64 y = x > 0 ? x - 1 : 0; y <= x + 1; ++y)
        if (y > 0 && y * y == rest) out.insert({y, cur});
      return;
    }
    for (std::size_t i = from; i < ps.size(); ++i) {
      const u64 c = ps[i] * ps[i] * ps[i];
      if (c >= rest) break;
      cur[depth] = ps[i];
      rec(i, depth + 1, rest - c);
    }
  };
  rec(0, 0, N);
  return out;
}

std::set<Tuple> as_set(const std::vector<RepresentationRecord>& v) {
  std::set<Tuple> s;
  for (const auto& r : v) s.insert({r.x, r.primes});
  return s;
}

// Paper boxes written out with real comparisons against the exact cutoffs.
struct Box {
  std::vector<u64> x, A, B;
};
Box boxes_oracle(u64 N) {
  Box b;
  const long double n = static_cast<long double>(N);
  for (u64 x = 1; x * x <= N; ++x)
    if (4 * x * x > N) b.x.push_back(x);
  for (u64 p = 2; 27 * p * p * p <= 8 * N; ++p)
    if (27 * p * p * p > N && prime_oracle(p)) b.A.push_back(p);
  const long double us = std::pow(n, 5.0L / 18.0L) / 3;
  for (u64 p = 2; p <= 2 * us; ++p)
    if (p > us && prime_oracle(p)) b.B.push_back(p);
  return b;
}

std::vector<Tuple> paper_oracle(u64 N) {
  const Box b = boxes_oracle(N);
  std::set<u64> squares;
  for (u64 x : b.x) squares.insert(x * x);
  std::vector<Tuple> out;
  for (std::size_t i = 0; i < b.A.size(); ++i)
    for (std::size_t j = i; j < b.A.size(); ++j)
      for (std::size_t k = j; k < b.A.size(); ++k)
        for (std::size_t l = 0; l < b.B.size(); ++l)
          for (std::size_t m = l; m < b.B.size(); ++m) {
            const u64 s = b.A[i] * b.A[i] * b.A[i] + b.A[j] * b.A[j] * b.A[j] + b.A[k] * b.A[k] * b.A[k] +
                          b.B[l] * b.B[l] * b.B[l] + b.B[m] * b.B[m] * b.B[m];
            if (s >= N || !squares.count(N - s)) continue;
            out.push_back({isqrt(N - s), {b.A[i], b.A[j], b.A[k], b.B[l], b.B[m]}});
          }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST(Representations, FortyFour) {
  const auto recs = find_representations(44);
  bool found = false;
  for (const auto& r : recs) found |= r.x == 2 && r.primes == std::array<u64, 5>{2, 2, 2, 2, 2};
  EXPECT_TRUE(found);
  EXPECT_GE(R_count(44, 6), 1u);
  EXPECT_THROW(R_count(44, 0), DomainError);
  EXPECT_THROW(find_representations(45), DomainError);
  EXPECT_THROW(find_representations(20'000'000'002ULL), CapacityError);
}

TEST(Representations, EngineMatchesOraclesOnAContiguousRange) {
  for (u64 N = 10'000; N <= 10'200; N += 2) {
    const auto fast = find_representations(N);
    const auto slow = find_representations_naive(N);
    ASSERT_EQ(fast, slow) << N;
    ASSERT_EQ(as_set(fast), brute_unrestricted(N)) << N;
  }
}

TEST(Representations, EngineMatchesOraclesAtRandomN) {
  std::mt19937_64 rng(44);
  for (int i = 0; i < 20; ++i) {
    const u64 N = 2 * (1 + rng() % 50'000);
    const auto fast = find_representations(N);
    ASSERT_EQ(fast, find_representations_naive(N)) << N;
    ASSERT_EQ(as_set(fast), brute_unrestricted(N)) << N;
    for (int r : {1, 2, 4})
      ASSERT_EQ(find_representations(N, RepMode::Unrestricted, r),
                find_representations_naive(N, RepMode::Unrestricted, r));
  }
}

TEST(Representations, PaperRangeMatchesBoxLoops) {
  for (u64 N : {1'000'000ULL, 10'000'000ULL, 100'000'000ULL}) {
    const auto recs = find_representations(N, RepMode::PaperRange);
    std::vector<Tuple> got;
    for (const auto& r : recs) got.push_back({r.x, r.primes});
    EXPECT_EQ(got, paper_oracle(N)) << N;
    std::cout << "paper-range records at N=" << N << ": " << recs.size() << "\n";
  }
}

TEST(Representations, RecordsVerifyAndAreDeterministic) {
  const auto a = find_representations(100'000'000, RepMode::PaperRange);
  const auto b = find_representations(100'000'000, RepMode::PaperRange);
  EXPECT_EQ(a, b);
  for (const auto& r : a) {
    EXPECT_NO_THROW(make_record(r.N, r.x, r.primes, r.mode));
    EXPECT_EQ(r.omega_x, big_omega(r.x));
  }
  EXPECT_THROW(make_record(44, 2, {2, 2, 2, 2, 3}, RepMode::Unrestricted), ConsistencyError);
  EXPECT_THROW(make_record(44 - 8 + 64, 2, {2, 2, 2, 2, 4}, RepMode::Unrestricted), ConsistencyError);
}

TEST(Representations, CountsAreMonotoneInR) {
  for (u64 N : {10'000ULL, 50'002ULL, 99'998ULL}) {
    u64 prev = 0;
    for (int r = 1; r <= 8; ++r) {
      const u64 c = R_count(N, r);
      EXPECT_GE(c, prev);
      prev = c;
    }
  }
}

TEST(Representations, OrderedMultiplicity) {
  RepresentationRecord r;
  r.mode = RepMode::Unrestricted;
  r.primes = {2, 2, 2, 2, 2};
  EXPECT_EQ(ordered_multiplicity(r), 1u);
  r.primes = {2, 3, 5, 7, 11};
  EXPECT_EQ(ordered_multiplicity(r), 120u);
  r.primes = {2, 2, 3, 3, 3};
  EXPECT_EQ(ordered_multiplicity(r), 10u);
  r.mode = RepMode::PaperRange;
  EXPECT_EQ(ordered_multiplicity(r), 3u * 1u);
  r.primes = {5, 7, 11, 13, 13};
  EXPECT_EQ(ordered_multiplicity(r), 6u);
  // the ordered count is the number of ordered tuples
  const u64 N = 10'000;
  u64 ordered = 0;
  for (const auto& rec : find_representations(N)) ordered += ordered_multiplicity(rec);
  EXPECT_EQ(R_count(N, 64, RepMode::Unrestricted, true), ordered);
}

TEST(Representations, ExistenceSearch) {
  const RepresentationSearch s(200'000);
  for (u64 N = 10'000; N <= 10'100; N += 2) {
    const u64 x = s.first_x(N, 6);
    const auto recs = find_representations(N, RepMode::Unrestricted, 6);
    if (recs.empty()) {
      EXPECT_EQ(x, 0u);
    } else {
      EXPECT_EQ(x, recs.front().x) << N;
    }
  }
  EXPECT_THROW(s.first_x(300'000, 6), DomainError);
}

// ---------------------------------------------------------------------------

TEST(WeightedJ, DefinitionAndBounds) {
  const auto params = ScaleParams::desk(100'000'000);
  const auto recs = find_representations(params);
  long double direct = 0;
  for (const auto& r : recs) {
    long double w = 1;
    for (u64 p : r.primes) w *= std::log(static_cast<long double>(p));
    direct += w;
  }
  const long double J1 = weighted_J(recs, 1);
  EXPECT_NEAR(static_cast<double>(J1 / direct), 1.0, 1e-12);
  for (u64 d : {2u, 3u, 5u, 30u, 97u, 10'000u}) EXPECT_LE(weighted_J(recs, d), J1);
  EXPECT_EQ(weighted_J(recs, 10'001), 0.0L);
  EXPECT_EQ(weighted_J(recs, 123'456), 0.0L);
  EXPECT_GT(weighted_J(recs, 1, true), J1);
  EXPECT_THROW(weighted_J(recs, 0), DomainError);
}

TEST(WeightedJ, MultiplesAgainstBoxLoops) {
  const u64 N = 100'000'000;
  const auto params = ScaleParams::desk(N);
  const auto oracle = paper_oracle(N);
  for (u64 d : {2u, 3u, 5u, 15u}) {
    long double want = 0;
    for (const auto& [x, ps] : oracle) {
      if (x % d != 0) continue;
      long double w = 1;
      for (u64 p : ps) w *= std::log(static_cast<long double>(p));
      want += w;
    }
    const long double got = weighted_J(d, params);
    if (want == 0) {
      EXPECT_EQ(got, 0.0L) << d;
    } else {
      EXPECT_NEAR(static_cast<double>(got / want), 1.0, 1e-12) << d;
    }
  }
  // box primes are odd and N is even, so x is odd
  EXPECT_EQ(weighted_J(2, params), 0.0L);
}

TEST(WeightedJ, AlmostPrimeStructure) {
  const auto params = ScaleParams::desk(100'000'000);
  const auto recs = find_representations(params);
  const long double two_u2 = static_cast<long double>(params.range_U2().hi);
  for (int r = 2; r <= 5; ++r) {
    long double want = 0;
    for (const auto& rec : recs) {
      long double w = 1;
      for (u64 p : rec.primes) w *= std::log(static_cast<long double>(p));
      std::set<u64> seen;
      u64 y = rec.x;
      std::vector<u64> fac;
      for (u64 q = 2; q * q <= y; ++q)
        while (y % q == 0) fac.push_back(q), y /= q;
      if (y > 1) fac.push_back(y);
      for (u64 p : fac) {
        if (!seen.insert(p).second) continue;
        std::vector<u64> rest = fac;
        rest.erase(std::find(rest.begin(), rest.end(), p));
        if (static_cast<int>(rest.size()) != r - 1 || rest.empty()) continue;
        if (static_cast<long double>(rest.front()) < params.z) continue;
        const long double l = static_cast<long double>(rec.x / p);
        if (l * static_cast<long double>(rest.back()) > two_u2) continue;
        want += w * std::log(static_cast<long double>(p)) / std::log(params.U2 / l);
      }
    }
    const long double got = weighted_J_r(recs, 1, r, params);
    std::cout << "J_" << r << "(1e8, 1) = " << static_cast<double>(got) << "\n";
    if (want == 0) {
      EXPECT_EQ(got, 0.0L);
    } else {
      EXPECT_NEAR(static_cast<double>(got / want), 1.0, 1e-12) << r;
    }
    EXPECT_LE(weighted_J_r(recs, 3, r, params), got);
  }
}

// ---------------------------------------------------------------------------

TEST(CrEmpirical, EmptySet) {
  auto p = ScaleParams::desk(1'000'000);
  p.set("z", 20).set("U2", 1000);
  const auto e = c_r_empirical(p, 7);
  EXPECT_EQ(e.members, 0u);
  EXPECT_EQ(e.value, 0.0L);
}

TEST(CrEmpirical, RatioToTheIntegral) {
  // 2U2 = z^k with small k keeps N_7 enumerable; the integral uses the
  // matching outer limit k - 1
  const std::pair<long double, long double> cases[] = {{8, 10}, {8, 12}, {12, 11}, {20, 10}};
  for (const auto& [z, k] : cases) {
    auto p = ScaleParams::desk(1'000'000);
    p.set("z", z).set("U2", std::pow(z, k) / 2);
    const auto e = c_r_empirical(p, 7);
    std::cout << "z=" << static_cast<double>(z) << " k=" << static_cast<double>(k) << " |N_7|=" << e.members
              << " empirical " << static_cast<double>(e.value) << " integral " << static_cast<double>(e.integral)
              << " ratio " << static_cast<double>(e.ratio) << "\n";
    EXPECT_NEAR(static_cast<double>(e.outer_limit), static_cast<double>(k - 1), 1e-9);
    EXPECT_GE(e.ratio, 0.5L);
    EXPECT_LE(e.ratio, 2.0L);
  }
  auto big = ScaleParams::desk(1'000'000);
  big.set("z", 20).set("U2", std::pow(20.0L, 16) / 2);
  EXPECT_THROW(c_r_empirical(big, 7), CapacityError);
}

// ---------------------------------------------------------------------------

TEST(Moments, HashCountMatchesLoops) {
  const u64 X = 10'000;
  const auto p = ScaleParams::desk(X);
  const auto A = p.range_U3(), B = p.range_U3s();
  // n1^3 + m1^3 + m2^3 = n2^3 + m3^3 + m4^3: loop five variables, solve for n2
  std::map<u64, u64> ncube;
  for (u64 n = A.lo; n <= A.hi; ++n) ncube[n * n * n] = n;
  u64 count = 0, diag = 0;
  for (u64 n1 = A.lo; n1 <= A.hi; ++n1)
    for (u64 m1 = B.lo; m1 <= B.hi; ++m1)
      for (u64 m2 = B.lo; m2 <= B.hi; ++m2)
        for (u64 m3 = B.lo; m3 <= B.hi; ++m3)
          for (u64 m4 = B.lo; m4 <= B.hi; ++m4) {
            const i64 rest = static_cast<i64>(n1 * n1 * n1 + m1 * m1 * m1 + m2 * m2 * m2) -
                             static_cast<i64>(m3 * m3 * m3 + m4 * m4 * m4);
            if (rest <= 0) continue;
            const auto it = ncube.find(static_cast<u64>(rest));
            if (it == ncube.end()) continue;
            ++count;
            if (it->second == n1 && ((m1 == m3 && m2 == m4) || (m1 == m4 && m2 == m3))) ++diag;
          }
  const auto m = moment_count(MomentKind::I, X);
  EXPECT_EQ(m.count, static_cast<long double>(count));
  EXPECT_EQ(m.solutions, count);
  EXPECT_EQ(m.diagonal, static_cast<long double>(diag));
  const u64 nn = A.size(), mm = B.size();
  EXPECT_EQ(diag, nn * (2 * mm * mm - mm));
}

TEST(Moments, EightVariableDiagonal) {
  const auto m = moment_count(MomentKind::II, 100'000);
  const auto p = ScaleParams::desk(100'000);
  const long double nn = p.range_U3().size(), mm = p.range_U3s().size();
  EXPECT_EQ(m.diagonal, (2 * nn * nn - nn) * (2 * mm * mm - mm));
  EXPECT_GE(m.count, m.diagonal);
}

TEST(Moments, GrowthExponent) {
  std::vector<double> xs, ys;
  for (u64 X : {10'000ULL, 100'000ULL, 1'000'000ULL, 10'000'000ULL}) {
    const auto m = moment_count(MomentKind::I, X);
    EXPECT_GE(m.count, m.diagonal);
    std::cout << "X=" << X << " count " << static_cast<double>(m.count) << " diagonal "
              << static_cast<double>(m.diagonal) << "\n";
    xs.push_back(std::log(static_cast<double>(X)));
    ys.push_back(std::log(static_cast<double>(m.count)));
  }
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) mx += xs[i], my += ys[i];
  mx /= xs.size(), my /= ys.size();
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) sxy += (xs[i] - mx) * (ys[i] - my), sxx += (xs[i] - mx) * (xs[i] - mx);
  std::cout << "fitted exponent " << sxy / sxx << "\n";
  EXPECT_LE(sxy / sxx, 8.0 / 9.0 + 0.05);
}

TEST(Moments, PrimeWeightedBoundedByUnweighted) {
  for (u64 X : {100'000ULL, 10'000'000ULL}) {
    const auto w = moment_count(MomentKind::III, X);
    const auto u = moment_count(MomentKind::I, X);
    EXPECT_GE(w.count, w.diagonal * (1 - 1e-12L));
    EXPECT_LE(w.count, w.max_weight * u.count);
    EXPECT_LE(w.solutions, u.solutions);
  }
  const auto w4 = moment_count(MomentKind::IV, 1'000'000);
  const auto u4 = moment_count(MomentKind::II, 1'000'000);
  EXPECT_LE(w4.count, w4.max_weight * u4.count);
  EXPECT_THROW(moment_count(MomentKind::II, 10'000'000'000ULL, 1000), CapacityError);
}
