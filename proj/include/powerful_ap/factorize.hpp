#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "powerful_ap/natural.hpp"
#include "powerful_ap/primality.hpp"

namespace powerful_ap {

// Effort cap for one factorization: the total number of Pollard-rho
// polynomial steps spent on composite cofactors left after trial division.
struct FactorBudget {
  std::uint64_t rho_iterations = 4'000'000;
};

struct PrimePower {
  Natural p;
  unsigned e = 0;

  friend bool operator==(const PrimePower&, const PrimePower&) = default;
};

// Primes strictly increasing, every exponent >= 1. The empty list is 1.
struct Factorization {
  std::vector<PrimePower> factors;

  Natural value() const {
    Natural r = 1;
    for (const auto& f : factors) r *= pow(f.p, f.e);
    return r;
  }

  friend bool operator==(const Factorization&, const Factorization&) = default;
};

// Result of a factorization that may stop early: `composites` holds the
// cofactors (with multiplicity) that resisted the budget. Every entry there
// is a certified composite.
struct PartialFactorization {
  std::vector<PrimePower> primes;
  std::vector<std::pair<Natural, unsigned>> composites;

  bool complete() const { return composites.empty(); }
};

namespace detail {

inline Natural rho_step(const Natural& x, const Natural& c, const Natural& n) {
  Natural y = x * x + c;
  mpz_mod(y.get_mpz_t(), y.get_mpz_t(), n.get_mpz_t());
  return y;
}

inline Natural abs_diff(const Natural& a, const Natural& b) { return a > b ? Natural(a - b) : Natural(b - a); }

// Pollard rho with Brent's cycle detection and batched gcds. `n` must be an
// odd composite that is not a perfect power. Returns false once `budget`
// runs out without finding a proper divisor.
inline bool pollard_brent(const Natural& n, std::uint64_t& budget, Natural& divisor) {
  constexpr std::uint64_t kBatch = 128;
  for (unsigned long c_seed = 1; budget > 0; ++c_seed) {
    const Natural c = c_seed;
    Natural y = 2, x, ys, q = 1, g = 1;
    std::uint64_t r = 1;
    do {
      x = y;
      for (std::uint64_t i = 0; i < r && budget > 0; ++i, --budget) y = rho_step(y, c, n);
      std::uint64_t k = 0;
      while (k < r && g == 1 && budget > 0) {
        ys = y;
        const std::uint64_t steps = std::min(kBatch, r - k);
        for (std::uint64_t i = 0; i < steps && budget > 0; ++i, --budget) {
          y = rho_step(y, c, n);
          q = q * abs_diff(x, y);
          mpz_mod(q.get_mpz_t(), q.get_mpz_t(), n.get_mpz_t());
        }
        g = gcd(q, n);
        k += steps;
      }
      r *= 2;
    } while (g == 1 && budget > 0);

    if (g == n) {
      // The batch overshot; replay it one step at a time.
      do {
        ys = rho_step(ys, c, n);
        g = gcd(abs_diff(x, ys), n);
      } while (g == 1);
    }
    if (g != 1 && g != n) {
      divisor = g;
      return true;
    }
  }
  return false;
}

// Smallest k >= 2 such that n is a perfect k-th power, or 0.
inline unsigned long smallest_root_degree(const Natural& n, Natural& root) {
  if (mpz_perfect_power_p(n.get_mpz_t()) == 0 || n < 4) return 0;
  const unsigned long bits = mpz_sizeinbase(n.get_mpz_t(), 2);
  for (std::uint32_t k : small_primes()) {
    if (k > bits) break;
    if (exact_root(n, k, root)) return k;
  }
  return 0;
}

inline void add_prime(std::map<Natural, unsigned>& acc, const Natural& p, unsigned e) { acc[p] += e; }

inline std::vector<PrimePower> to_sorted(const std::map<Natural, unsigned>& acc) {
  std::vector<PrimePower> out;
  out.reserve(acc.size());
  for (const auto& [p, e] : acc) out.push_back({p, e});
  return out;
}

// Trial division by primes up to kTrialDivisionLimit; stops as soon as the
// remaining cofactor is provably 1 or prime. Returns the cofactor.
inline Natural trial_divide(const Natural& n, std::map<Natural, unsigned>& acc) {
  const auto& primes = small_primes();
  if (fits_u64(n)) {
    std::uint64_t c = to_u64(n);
    for (std::uint32_t p : primes) {
      if (static_cast<std::uint64_t>(p) * p > c) break;
      if (c % p != 0) continue;
      unsigned e = 0;
      do {
        c /= p;
        ++e;
      } while (c % p == 0);
      add_prime(acc, Natural(p), e);
    }
    Natural rest = from_u64(c);
    if (c > 1 && c < static_cast<std::uint64_t>(kTrialDivisionLimit) * kTrialDivisionLimit) {
      add_prime(acc, rest, 1);
      return 1;
    }
    return rest;
  }
  Natural c = n;
  for (std::uint32_t p : primes) {
    if (fits_u64(c) && static_cast<std::uint64_t>(p) * p > to_u64(c)) break;
    if (!mpz_divisible_ui_p(c.get_mpz_t(), p)) continue;
    unsigned e = 0;
    do {
      mpz_divexact_ui(c.get_mpz_t(), c.get_mpz_t(), p);
      ++e;
    } while (mpz_divisible_ui_p(c.get_mpz_t(), p));
    add_prime(acc, Natural(p), e);
  }
  if (c > 1 && fits_u64(c) &&
      to_u64(c) < static_cast<std::uint64_t>(kTrialDivisionLimit) * kTrialDivisionLimit) {
    add_prime(acc, c, 1);
    return 1;
  }
  return c;
}

}  // namespace detail

// Factor as far as the budget allows. Never reports a composite as prime.
inline PartialFactorization factor_partial(const Natural& n, FactorBudget budget = {}) {
  if (n < 1) throw InvalidInput("factorize: n must be >= 1");
  std::map<Natural, unsigned> acc;
  PartialFactorization out;
  Natural cofactor = detail::trial_divide(n, acc);

  std::uint64_t remaining = budget.rho_iterations;
  std::vector<std::pair<Natural, unsigned>> work;
  if (cofactor > 1) work.emplace_back(cofactor, 1);
  while (!work.empty()) {
    auto [v, mult] = std::move(work.back());
    work.pop_back();
    if (v == 1) continue;
    if (is_prime(v)) {
      detail::add_prime(acc, v, mult);
      continue;
    }
    Natural root;
    if (unsigned long k = detail::smallest_root_degree(v, root); k != 0) {
      work.emplace_back(root, mult * static_cast<unsigned>(k));
      continue;
    }
    Natural divisor;
    if (remaining > 0 && detail::pollard_brent(v, remaining, divisor)) {
      Natural other = v / divisor;
      work.emplace_back(std::move(divisor), mult);
      work.emplace_back(std::move(other), mult);
      continue;
    }
    out.composites.emplace_back(std::move(v), mult);
  }
  out.primes = detail::to_sorted(acc);
  std::sort(out.composites.begin(), out.composites.end());
  return out;
}

inline Factorization factorize(const Natural& n, FactorBudget budget = {}) {
  PartialFactorization partial = factor_partial(n, budget);
  if (!partial.complete()) {
    throw BudgetExceeded("factorization of " + to_string(n) + " left composite cofactor " +
                         to_string(partial.composites.front().first));
  }
  return Factorization{std::move(partial.primes)};
}

// Factorization of prod(block_i ^ exponent_i), factoring each block on its own.
inline Factorization factorize_product(const std::vector<std::pair<Natural, unsigned>>& blocks,
                                       FactorBudget budget = {}) {
  std::map<Natural, unsigned> acc;
  for (const auto& [block, e] : blocks) {
    for (const auto& f : factorize(block, budget).factors) acc[f.p] += f.e * e;
  }
  return Factorization{detail::to_sorted(acc)};
}

inline unsigned valuation(const Natural& p, const Natural& n) {
  if (p < 2) throw InvalidInput("valuation: p must be >= 2");
  if (n < 1) throw InvalidInput("valuation: n must be >= 1");
  Natural rest;
  return static_cast<unsigned>(mpz_remove(rest.get_mpz_t(), n.get_mpz_t(), p.get_mpz_t()));
}

inline Natural radical(const Factorization& f) {
  Natural r = 1;
  for (const auto& pp : f.factors) r *= pp.p;
  return r;
}

inline Natural radical(const Natural& n, FactorBudget budget = {}) { return radical(factorize(n, budget)); }

inline bool is_squarefree(const Natural& n, FactorBudget budget = {}) {
  const auto f = factorize(n, budget);
  return std::all_of(f.factors.begin(), f.factors.end(), [](const PrimePower& pp) { return pp.e == 1; });
}

namespace detail {

inline constexpr std::uint32_t kPowerfulStripLimit = 10'000;

// Cofactor with no prime factor <= kPowerfulStripLimit.
inline bool large_cofactor_is_powerful(const Natural& c, FactorBudget budget) {
  if (c == 1 || is_perfect_square(c)) return true;
  Natural root;
  if (exact_root(c, 3, root)) return true;
  if (is_prime(c)) return false;
  // At most three prime factors, each > 10^4: only p^2 and p^3 are powerful.
  static const Natural kThreeFactorBound("10000000000000000", 10);
  if (c < kThreeFactorBound) return false;
  const auto f = factorize(c, budget);
  return std::all_of(f.factors.begin(), f.factors.end(), [](const PrimePower& pp) { return pp.e >= 2; });
}

}  // namespace detail

// Powerful test that avoids full factorization: strip primes up to 10^4 with
// an early exit on any exponent 1, then classify the cofactor by root
// extraction and primality; factor only as a last resort.
inline bool is_powerful(const Natural& n, FactorBudget budget = {}) {
  if (n < 1) throw InvalidInput("is_powerful: n must be >= 1");
  const auto& primes = small_primes();
  if (fits_u64(n)) {
    std::uint64_t c = to_u64(n);
    for (std::uint32_t p : primes) {
      if (p > detail::kPowerfulStripLimit) return detail::large_cofactor_is_powerful(from_u64(c), budget);
      const auto p3 = static_cast<unsigned __int128>(p) * p * p;
      if (p3 > c) {
        // c is 1, q, q*r or q^2 with q, r > p.
        const std::uint64_t s = to_u64(isqrt(from_u64(c)));
        return c == 1 || s * s == c;
      }
      if (c % p != 0) continue;
      c /= p;
      if (c % p != 0) return false;
      do c /= p;
      while (c % p == 0);
    }
  }
  Natural c = n;
  for (std::uint32_t p : primes) {
    if (p > detail::kPowerfulStripLimit) break;
    if (mpz_cmp_ui(c.get_mpz_t(), static_cast<unsigned long>(p) * p * p) < 0) {
      return c == 1 || is_perfect_square(c);
    }
    if (!mpz_divisible_ui_p(c.get_mpz_t(), p)) continue;
    mpz_divexact_ui(c.get_mpz_t(), c.get_mpz_t(), p);
    if (!mpz_divisible_ui_p(c.get_mpz_t(), p)) return false;
    do mpz_divexact_ui(c.get_mpz_t(), c.get_mpz_t(), p);
    while (mpz_divisible_ui_p(c.get_mpz_t(), p));
  }
  return detail::large_cofactor_is_powerful(c, budget);
}

// n = a^2 * b with b squarefree.
struct SquarefreeDecomp {
  Natural a = 1;
  Natural b = 1;

  Natural value() const { return a * a * b; }
  friend bool operator==(const SquarefreeDecomp&, const SquarefreeDecomp&) = default;
};

// n = a^2 * b^3 with b squarefree; exists only for powerful n.
struct PowerfulDecomp {
  Natural a = 1;
  Natural b = 1;

  Natural value() const { return a * a * b * b * b; }
  friend bool operator==(const PowerfulDecomp&, const PowerfulDecomp&) = default;
};

inline SquarefreeDecomp decompose_square_times_squarefree(const Factorization& f) {
  SquarefreeDecomp d;
  for (const auto& [p, e] : f.factors) {
    d.a *= pow(p, e / 2);
    if (e % 2 == 1) d.b *= p;
  }
  return d;
}

inline SquarefreeDecomp decompose_square_times_squarefree(const Natural& n, FactorBudget budget = {}) {
  return decompose_square_times_squarefree(factorize(n, budget));
}

inline PowerfulDecomp decompose_powerful(const Factorization& f) {
  PowerfulDecomp d;
  for (const auto& [p, e] : f.factors) {
    if (e == 1) throw NotPowerful("prime " + to_string(p) + " divides exactly once");
    if (e % 2 == 0) {
      d.a *= pow(p, e / 2);
    } else {
      d.b *= p;
      d.a *= pow(p, (e - 3) / 2);
    }
  }
  return d;
}

inline PowerfulDecomp decompose_powerful(const Natural& n, FactorBudget budget = {}) {
  return decompose_powerful(factorize(n, budget));
}

}  // namespace powerful_ap
