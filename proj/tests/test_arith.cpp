#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "wglab/arith.hpp"

using namespace wglab;

namespace {

bool trial_division_prime(u64 n) {
  if (n < 2) return false;
  for (u64 d = 2; d * d <= n; ++d) {
    if (n % d == 0) return false;
  }
  return true;
}

std::vector<u64> divisors(u64 n) {
  std::vector<u64> out;
  for (u64 d = 1; d * d <= n; ++d) {
    if (n % d == 0) {
      out.push_back(d);
      if (d * d != n) out.push_back(n / d);
    }
  }
  return out;
}

}  // namespace

TEST(PrimeTable, SmallWindows) {
  EXPECT_EQ(prime_table(2, 10).primes, (std::vector<u64>{2, 3, 5, 7}));
  EXPECT_TRUE(prime_table(1, 1).empty());
  EXPECT_TRUE(prime_table(0, 1).empty());
}

TEST(PrimeTable, MillionWindowMatchesTrialDivision) {
  const PrimeTable t = prime_table(1'000'000, 1'000'100);
  std::vector<u64> oracle;
  for (u64 n = 1'000'000; n <= 1'000'100; ++n) {
    if (trial_division_prime(n)) oracle.push_back(n);
  }
  EXPECT_EQ(t.primes, oracle);
  EXPECT_EQ(t.size(), 6u);
}

TEST(PrimeTable, SegmentBoundariesAreSeamless) {
  const u64 lo = (1ULL << 20) - 50, hi = (1ULL << 21) + 50;
  const PrimeTable t = prime_table(lo, hi);
  for (std::size_t i = 1; i < t.size(); ++i) ASSERT_LT(t[i - 1], t[i]);
  for (u64 n = lo; n <= lo + 200; ++n) EXPECT_EQ(t.contains(n), trial_division_prime(n)) << n;
  for (u64 n = (1ULL << 20) - 100; n <= (1ULL << 20) + 100; ++n) {
    if (n >= lo) {
      EXPECT_EQ(t.contains(n), trial_division_prime(n)) << n;
    }
  }
}

TEST(PrimeTable, Errors) {
  EXPECT_THROW(prime_table(10, 5), DomainError);
  EXPECT_THROW(prime_table(0, kPrimeTableLimit + 1), CapacityError);
  EXPECT_THROW(prime_table(0, 1000, 999), CapacityError);
}

TEST(PrimeTable, PrimeNumberTheoremBand) {
  for (u64 x : {1'000ULL, 10'000ULL, 100'000ULL, 1'000'000ULL}) {
    const double pi = static_cast<double>(prime_table(2, x).size());
    const double approx = static_cast<double>(x) / std::log(static_cast<double>(x));
    EXPECT_LE(std::fabs(pi - approx) / approx, 0.2) << x;
  }
}

TEST(Primality, AgreesWithTrialDivision) {
  for (u64 n = 0; n < 100'000; ++n) ASSERT_EQ(is_prime(n), trial_division_prime(n)) << n;
  EXPECT_TRUE(is_prime((1ULL << 61) - 1));
  EXPECT_FALSE(is_prime(3'215'031'751ULL));  // strong pseudoprime to bases 2, 3, 5, 7
  EXPECT_FALSE(is_prime(341'550'071'728'321ULL));
}

TEST(IntegerRoots, Exact) {
  for (u64 n : {0ULL, 1ULL, 15ULL, 16ULL, 17ULL, 999'999'999'999ULL, ~0ULL}) {
    const u64 r = isqrt(n);
    EXPECT_LE(static_cast<u128>(r) * r, n);
    EXPECT_GT(static_cast<u128>(r + 1) * (r + 1), n);
    const u64 c = icbrt(n);
    EXPECT_LE(static_cast<u128>(c) * c * c, n);
    EXPECT_GT(static_cast<u128>(c + 1) * (c + 1) * (c + 1), n);
  }
}

TEST(Factorize, Examples) {
  EXPECT_TRUE(factorize(1).factors.empty());
  const Factorization f = factorize(360);
  EXPECT_EQ(f.factors, (std::vector<std::pair<u64, int>>{{2, 3}, {3, 2}, {5, 1}}));
  EXPECT_EQ(f.big_omega(), 6);
  EXPECT_THROW(factorize(0), DomainError);
}

TEST(Factorize, TwelveDigitSemiprime) {
  const u64 n = 999'983ULL * 1'000'003ULL;
  const Factorization f = factorize(n);
  ASSERT_EQ(f.factors.size(), 2u);
  EXPECT_EQ(f.factors[0].first * f.factors[1].first, n);
  EXPECT_TRUE(trial_division_prime(f.factors[0].first));
  EXPECT_TRUE(trial_division_prime(f.factors[1].first));
}

TEST(Factorize, MultiplyBackIsIdentity) {
  std::mt19937_64 rng(20240917);
  std::uniform_int_distribution<u64> dist(1, 1ULL << 62);
  for (int i = 0; i < 10'000; ++i) {
    const u64 n = dist(rng);
    const Factorization f = factorize(n);
    u128 product = 1;
    u64 prev = 0;
    for (const auto& [p, e] : f.factors) {
      ASSERT_GT(p, prev);
      ASSERT_TRUE(is_prime(p));
      prev = p;
      for (int k = 0; k < e; ++k) product *= p;
    }
    ASSERT_EQ(product, static_cast<u128>(n)) << n;
  }
}

TEST(MultFunctions, Examples) {
  const std::vector<int> ks{2};
  auto m1 = mult_functions(1, ks);
  EXPECT_EQ(m1.mu, 1);
  EXPECT_EQ(m1.phi, 1u);
  EXPECT_EQ(m1.big_omega, 0);
  EXPECT_EQ(m1.tau[0].second, 1u);
  auto m12 = mult_functions(12, ks);
  EXPECT_EQ(m12.mu, 0);
  EXPECT_EQ(m12.phi, 4u);
  EXPECT_EQ(m12.big_omega, 3);
  EXPECT_EQ(m12.tau[0].second, 6u);
  auto m30 = mult_functions(30, ks);
  EXPECT_EQ(m30.mu, -1);
  EXPECT_EQ(m30.phi, 8u);
  EXPECT_EQ(m30.big_omega, 3);
  EXPECT_EQ(m30.tau[0].second, 8u);
  EXPECT_EQ(divisor_tau(12, 3), 18u);  // tau_3(2^2 3) = C(4,2) C(3,2)
}

TEST(MultFunctions, DivisorSumIdentitiesExhaustive) {
  for (u64 n = 1; n <= 100'000; ++n) {
    long mu_sum = 0;
    u64 phi_sum = 0;
    for (u64 d : divisors(n)) {
      const Factorization f = factorize(d);
      mu_sum += moebius(f);
      phi_sum += euler_phi(f);
    }
    ASSERT_EQ(mu_sum, n == 1 ? 1 : 0) << n;
    ASSERT_EQ(phi_sum, n) << n;
  }
}

TEST(AlmostPrime, Classification) {
  EXPECT_TRUE(is_almost_prime(7, 1));
  EXPECT_TRUE(is_almost_prime(64, 6));
  EXPECT_FALSE(is_almost_prime(128, 6));
  EXPECT_TRUE(is_almost_prime(1, 1));
  EXPECT_THROW(is_almost_prime(0, 1), DomainError);
  EXPECT_THROW(is_almost_prime(5, 0), DomainError);
}

TEST(SpfTable, MatchesFactorize) {
  const SpfTable spf(50'000);
  for (u64 n = 1; n <= 50'000; n += 7) EXPECT_EQ(spf.factorize(n).factors, factorize(n).factors);
  EXPECT_EQ(spf.factorize(1'000'003ULL * 3).factors, factorize(3'000'009ULL).factors);
}
