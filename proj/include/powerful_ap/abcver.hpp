#pragma once

#include <algorithm>
#include <array>
#include <string>
#include <vector>

#include "powerful_ap/decimal.hpp"
#include "powerful_ap/factorize.hpp"
#include "powerful_ap/witness.hpp"

namespace powerful_ap {

// Quality above this is reported as extraordinary; it is never a failure.
inline constexpr double kExtraordinaryQuality = 1.6;

// (N + d)^2 == N (N + 2d) + d^2, exactly.
inline bool ap_identity_check(const Natural& N, const Natural& d) {
  if (d < 1) throw InvalidInput("ap_identity_check: d must be >= 1");
  const Natural mid = N + d;
  return mid * mid == N * (N + 2 * d) + d * d;
}

namespace detail {

inline void require_triple(const APWitness& w) {
  if (w.k() != 3 || w.decomps.size() != 3) throw InvalidInput("expected a 3-term witness");
}

inline Natural gcd_b(const APWitness& w) { return gcd(gcd(w.decomps[0].b, w.decomps[1].b), w.decomps[2].b); }

}  // namespace detail

// Divide out p^3 for every prime p dividing all three b_i; the result is a
// 3-AP of powerful numbers with gcd(b1, b2, b3) = 1.
inline APWitness reduce_triple(const APWitness& w, FactorBudget budget = {}) {
  detail::require_triple(w);
  APWitness r = w;
  for (Natural g = detail::gcd_b(r); g > 1; g = detail::gcd_b(r)) {
    for (const auto& [p, e] : factorize(g, budget).factors) {
      const Natural p3 = p * p * p;
      for (std::size_t i = 0; i < 3; ++i) {
        if (!divides(p3, r.terms[i]) || !divides(p, r.decomps[i].b)) {
          throw ConsistencyFailure("reduce_triple: p^3 does not divide term");
        }
        r.terms[i] /= p3;
        r.decomps[i].b /= p;
      }
      r.d /= p3;
    }
  }
  return r;
}

// D = gcd(a2^2 b2^3, d), cross-checked against the two other expressions of
// D^2 and against D | a1^2 b1^3, D | a3^2 b3^3.
inline Natural compute_D(const APWitness& w) {
  detail::require_triple(w);
  const Natural& t1 = w.terms[0];
  const Natural& t2 = w.terms[1];
  const Natural& t3 = w.terms[2];
  const Natural D = gcd(t2, w.d);
  const Natural D2 = D * D;
  if (gcd(t2 * t2, w.d * w.d) != D2) throw ConsistencyFailure("gcd(T2^2, d^2) != D^2");
  if (gcd(t2 * t2, t1 * t3) != D2) throw ConsistencyFailure("gcd(T2^2, T1 T3) != D^2");
  if (gcd(t1 * t3, w.d * w.d) != D2) throw ConsistencyFailure("gcd(T1 T3, d^2) != D^2");
  if (!divides(D, t1) || !divides(D, t3)) throw ConsistencyFailure("D does not divide T1 and T3");
  return D;
}

// Given p^delta | a^2 b^3, whether 3 * v_p(ab) >= delta.
inline bool lemma_check(const Natural& a, const Natural& b, const Natural& p, unsigned delta) {
  if (delta < 1) throw InvalidInput("lemma_check: delta must be >= 1");
  if (a < 1 || b < 1) throw InvalidInput("lemma_check: a, b must be >= 1");
  if (!divides(pow(p, delta), a * a * b * b * b)) throw PreconditionViolated("p^delta does not divide a^2 b^3");
  return 3 * valuation(p, a * b) >= delta;
}

// Pairwise coprime refinement: returns elements > 1, pairwise coprime, such
// that every input is a product of powers of them.
inline std::vector<Natural> coprime_base(std::vector<Natural> xs) {
  std::erase_if(xs, [](const Natural& x) { return x <= 1; });
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t i = 0; i < xs.size() && !changed; ++i) {
      for (std::size_t j = i + 1; j < xs.size() && !changed; ++j) {
        const Natural g = gcd(xs[i], xs[j]);
        if (g == 1) continue;
        xs[i] /= g;
        xs[j] /= g;
        xs.push_back(g);
        std::erase_if(xs, [](const Natural& x) { return x <= 1; });
        changed = true;
      }
    }
  }
  std::sort(xs.begin(), xs.end());
  return xs;
}

// Per-prime comparison of v_p(kappa(q1 q2 q3)) against
// v_p(a1 b1 a2 b2 a3 b3) - v_p(D), where q_i = a_i^2 b_i^3 / D.
struct PrimeCheck {
  Natural p;
  bool prime = true;  // false: an unsplit composite block, checked for all its primes at once
  unsigned delta = 0;  // v_p(D)
  long lhs = 0;
  long rhs = 0;
  bool ok = true;
  std::string case_tag;
};

struct RadicalComparison {
  Natural lhs;             // kappa(q1 q2 q3), or an upper bound if !lhs_exact
  bool lhs_exact = true;
  Rational rhs;            // a1 b1 a2 b2 a3 b3 / D
  bool holds = true;
};

struct TripleAnalysis {
  APWitness witness;
  APWitness reduced;
  Natural D;
  std::array<Natural, 3> quotients;  // a_i^2 b_i^3 / D
  std::array<Natural, 3> abc;        // A = q1 q3, B = (d/D)^2, C = q2^2, A + B = C
  std::vector<PrimeCheck> per_prime;
  RadicalComparison radical;
  Decimal quality;  // log C / log kappa(ABC); a lower bound if !quality_exact
  bool quality_exact = true;
  bool identity_ok = true;

  bool extraordinary() const { return quality.to_double() > kExtraordinaryQuality; }

  bool all_primes_ok() const {
    return std::all_of(per_prime.begin(), per_prime.end(), [](const PrimeCheck& c) { return c.ok; });
  }

  bool passed() const { return identity_ok && radical.holds && all_primes_ok(); }

  // Worst rhs - lhs over all checked primes (0 if there are none).
  long worst_margin() const {
    long worst = 0;
    bool first = true;
    for (const auto& c : per_prime) {
      if (first || c.rhs - c.lhs < worst) worst = c.rhs - c.lhs;
      first = false;
    }
    return worst;
  }
};

namespace detail {

// Multiplicity of the base element c in x (c^e || x in the refined base).
inline unsigned block_exponent(const Natural& c, const Natural& x) {
  if (x == 0) return 0;
  Natural rest;
  return static_cast<unsigned>(mpz_remove(rest.get_mpz_t(), x.get_mpz_t(), c.get_mpz_t()));
}

inline std::string case_tag(const APWitness& reduced, const Natural& c, unsigned delta, bool divides_product) {
  if (!divides_product && delta == 0) return "none";
  if (delta == 0) return "not-in-D";
  unsigned in_b = 0;
  for (const auto& dec : reduced.decomps) in_b += divides(c, dec.b) ? 1 : 0;
  const char* parity = delta % 2 == 0 ? "even" : "odd";
  return "case" + std::to_string(in_b + 1) + "-" + parity;
}

inline PrimeCheck block_check(const APWitness& reduced, const std::array<Natural, 3>& q, const Natural& D,
                              const Natural& c, bool is_prime_block) {
  PrimeCheck pc;
  pc.p = c;
  pc.prime = is_prime_block;
  pc.delta = block_exponent(c, D);
  long sum = 0;
  for (const auto& dec : reduced.decomps) sum += block_exponent(c, dec.a) + block_exponent(c, dec.b);
  pc.rhs = sum - static_cast<long>(pc.delta);
  pc.lhs = (divides(c, q[0]) || divides(c, q[1]) || divides(c, q[2])) ? 1 : 0;
  pc.ok = pc.rhs >= pc.lhs;
  pc.case_tag = is_prime_block ? case_tag(reduced, c, pc.delta, sum > 0) : "composite-block";
  return pc;
}

}  // namespace detail

// Check of v_p(kappa(q1 q2 q3)) <= v_p(a1 b1 a2 b2 a3 b3) - v_p(D) for one prime.
inline PrimeCheck valuation_inequality_check(const TripleAnalysis& t, const Natural& p) {
  if (p < 2) throw InvalidInput("valuation_inequality_check: p must be >= 2");
  return detail::block_check(t.reduced, t.quotients, t.D, p, true);
}

inline bool radical_inequality_check(const TripleAnalysis& t) { return t.radical.holds; }

// Runs every check on a 3-AP. Quantities are split over a coprime base of
// {a_i, b_i, D, q_i, d/D}; each base element is factored within `budget`.
// Elements that resist stay as composite blocks: for those the per-prime
// inequality is verified for all their primes at once (rhs scales with
// v_p(block) while lhs <= 1) and kappa is bounded by the block itself.
inline TripleAnalysis analyze_triple(const APWitness& w, FactorBudget budget = {}) {
  detail::require_triple(w);
  TripleAnalysis t;
  t.witness = w;
  t.identity_ok = ap_identity_check(w.first(), w.d);
  t.reduced = reduce_triple(w, budget);
  t.D = compute_D(t.reduced);
  const APWitness& r = t.reduced;
  for (std::size_t i = 0; i < 3; ++i) t.quotients[i] = r.terms[i] / t.D;
  const Natural dD = r.d / t.D;
  t.abc = {t.quotients[0] * t.quotients[2], dD * dD, t.quotients[1] * t.quotients[1]};
  if (t.abc[0] + t.abc[1] != t.abc[2]) throw ConsistencyFailure("quotient identity A + B = C fails");
  if (gcd(t.abc[0], t.abc[1]) != 1 || gcd(t.abc[0], t.abc[2]) != 1 || gcd(t.abc[1], t.abc[2]) != 1) {
    throw ConsistencyFailure("quotient terms are not pairwise coprime");
  }

  std::vector<Natural> inputs = {t.D, dD};
  for (const auto& dec : r.decomps) {
    inputs.push_back(dec.a);
    inputs.push_back(dec.b);
  }
  for (const auto& q : t.quotients) inputs.push_back(q);

  std::vector<Natural> atoms;
  for (const auto& element : coprime_base(inputs)) {
    const PartialFactorization pf = factor_partial(element, budget);
    for (const auto& pp : pf.primes) atoms.push_back(pp.p);
    for (const auto& [c, e] : pf.composites) atoms.push_back(c);
  }
  atoms = coprime_base(std::move(atoms));

  Natural prod_ab = 1;
  for (const auto& dec : r.decomps) prod_ab *= dec.a * dec.b;
  const Natural support = prod_ab * t.D;

  t.radical.lhs = 1;
  t.radical.rhs = Rational(prod_ab, t.D);
  t.radical.rhs.canonicalize();
  Natural kappa_abc = 1;
  for (const auto& c : atoms) {
    const bool prime = is_prime(c);
    const bool in_q = divides(c, t.quotients[0]) || divides(c, t.quotients[1]) || divides(c, t.quotients[2]);
    if (in_q) {
      t.radical.lhs *= c;
      if (!prime) t.radical.lhs_exact = false;
    }
    if (in_q || divides(c, dD)) {
      kappa_abc *= c;
      if (!prime) t.quality_exact = false;
    }
    if (divides(c, support)) t.per_prime.push_back(detail::block_check(r, t.quotients, t.D, c, prime));
  }
  t.radical.holds = t.radical.lhs * t.D <= prod_ab;
  t.quality = divide(log(t.abc[2]), log(kappa_abc));
  return t;
}

// log c / log kappa(abc) for coprime a + b = c.
inline Decimal abc_quality(const Natural& a, const Natural& b, const Natural& c, FactorBudget budget = {}) {
  if (a < 1 || b < 1) throw InvalidInput("abc_quality: a, b must be >= 1");
  if (a + b != c) throw NotASum("a + b != c");
  if (gcd(a, b) != 1) throw NotCoprime("gcd(a, b) != 1");
  const Natural kappa = radical(a, budget) * radical(b, budget) * radical(c, budget);
  return divide(log(c), log(kappa));
}

}  // namespace powerful_ap
