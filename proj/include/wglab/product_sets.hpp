#pragma once

// The almost-prime product sets
//   M_r = {m in (U2, 2U2] : m = p1...pr, z <= p1 <= ... <= pr}
//   N_r = {l = p1...p_{r-1} : z <= p1 <= ... <= p_{r-1}, p1...p_{r-2} p_{r-1}^2 <= 2U2}
// enumerated by depth-first search over nondecreasing prime tuples.

#include <functional>
#include <string>
#include <vector>

#include "wglab/arith.hpp"
#include "wglab/errors.hpp"
#include "wglab/params.hpp"

namespace wglab {

enum class ProductSetKind { M, N };

struct ProductMember {
  u64 value = 1;
  std::vector<u64> primes;  // nondecreasing
};

struct AlmostPrimeProductSet {
  ProductSetKind kind = ProductSetKind::M;
  int r = 0;
  std::vector<ProductMember> members;  // in DFS order (lexicographic in the primes)
};

inline constexpr u64 kProductSetBudget = 20'000'000;

inline AlmostPrimeProductSet enumerate_product_sets(ProductSetKind kind, int r, const ScaleParams& params,
                                                    u64 budget = kProductSetBudget) {
  if (r < 1 || (kind == ProductSetKind::N && r < 2)) {
    throw DomainError("enumerate_product_sets: r too small for this kind");
  }
  if (!(params.z >= 3)) throw DomainError("enumerate_product_sets: z must be >= 3");
  AlmostPrimeProductSet out{kind, r, {}};
  const IntRange box = params.range_U2();
  const u64 cap = box.hi;  // 2U2 as an integer bound
  const u64 zmin = params.z_ceil();
  const int count = kind == ProductSetKind::M ? r : r - 1;
  if (cap == 0) return out;

  // Largest prime that can appear: all others at their minimum zmin.
  u128 floor_product = 1;
  for (int i = 0; i + 1 < count && floor_product <= cap; ++i) floor_product *= zmin;
  if (floor_product > cap) return out;
  u64 pmax = static_cast<u64>(cap / floor_product);
  if (kind == ProductSetKind::N) pmax = isqrt(pmax);
  if (pmax < zmin) return out;
  const PrimeTable primes = prime_table(zmin, pmax);

  std::vector<u64> stack;
  u64 nodes = 0;
  // `product` is the product of the primes chosen so far; `left` primes remain.
  std::function<void(std::size_t, u128, int)> walk = [&](std::size_t start, u128 product, int left) {
    if (++nodes > budget) throw CapacityError("enumerate_product_sets: node budget exceeded");
    if (left == 0) {
      const u64 v = static_cast<u64>(product);
      if (kind == ProductSetKind::M && !box.contains(v)) return;
      if (out.members.size() >= budget) throw CapacityError("enumerate_product_sets: member budget exceeded");
      out.members.push_back({v, stack});
      return;
    }
    for (std::size_t i = start; i < primes.size(); ++i) {
      const u64 p = primes[i];
      // Minimal completion with every remaining prime equal to p; for N_r the
      // last prime is squared.
      u128 minimal = product;
      const int power = kind == ProductSetKind::N ? left + 1 : left;
      bool over = false;
      for (int k = 0; k < power; ++k) {
        minimal *= p;
        if (minimal > cap) {
          over = true;
          break;
        }
      }
      if (over) break;
      stack.push_back(p);
      walk(i, product * p, left - 1);
      stack.pop_back();
    }
  };
  walk(0, 1, count);
  return out;
}

}  // namespace wglab
