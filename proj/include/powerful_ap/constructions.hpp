#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <vector>

#include "powerful_ap/decimal.hpp"
#include "powerful_ap/factorize.hpp"
#include "powerful_ap/pell.hpp"
#include "powerful_ap/witness.hpp"

namespace powerful_ap {

namespace detail {

// Factorizations of a few building blocks; terms are products of block
// powers, so only the (much smaller) blocks are ever factored.
template <std::size_t B>
class BlockFactors {
 public:
  BlockFactors(const std::array<Natural, B>& blocks, FactorBudget budget) {
    for (std::size_t i = 0; i < B; ++i) factors_[i] = factorize(blocks[i], budget);
  }

  Factorization combine(const std::array<unsigned, B>& exps) const {
    std::map<Natural, unsigned> acc;
    for (std::size_t i = 0; i < B; ++i) {
      if (exps[i] == 0) continue;
      for (const auto& f : factors_[i].factors) acc[f.p] += f.e * exps[i];
    }
    return Factorization{to_sorted(acc)};
  }

 private:
  std::array<Factorization, B> factors_;
};

template <std::size_t B>
std::array<unsigned, B> linear(std::initializer_list<std::pair<unsigned, std::array<unsigned, B>>> parts) {
  std::array<unsigned, B> out{};
  for (const auto& [coef, v] : parts) {
    for (std::size_t i = 0; i < B; ++i) out[i] += coef * v[i];
  }
  return out;
}

inline void check_invariant(bool cond, const char* what) {
  if (!cond) throw std::logic_error(std::string("construction invariant violated: ") + what);
}

}  // namespace detail

// (2m^2 - 1)^2, (2m^2 + 2m + 1)^2, (2m^2 + 4m + 1)^2 with d = 8m^3 + 12m^2 + 4m.
inline APWitness squares_3ap(std::uint64_t m) {
  if (m < 1) throw InvalidInput("squares_3ap: m must be >= 1");
  const Natural mm = from_u64(m);
  const std::array<Natural, 3> roots = {2 * mm * mm - 1, 2 * mm * mm + 2 * mm + 1, 2 * mm * mm + 4 * mm + 1};
  APWitness w;
  for (const auto& r : roots) {
    w.terms.push_back(r * r);
    w.decomps.push_back({r, 1});
  }
  w.d = 8 * mm * mm * mm + 12 * mm * mm + 4 * mm;
  detail::check_invariant(w.terms[1] - w.terms[0] == w.d && w.terms[2] - w.terms[1] == w.d, "squares3 difference");
  w.family = Family::Squares3;
  w.params = {m, Family::Squares3, {}};
  return w;
}

// Parameters of the Pell 3-AP of index m: x = 2*Y_m + 1 and n = X_m, with
// x^2 - 2x - 1 = 2n^2.
struct Pell3Parameters {
  Natural x;
  Natural n;
};

inline Pell3Parameters pell3_parameters(std::uint64_t m) {
  const PellSolution s = pell_solution(PellKind::Neg, m);
  Pell3Parameters p{2 * s.Y + 1, s.X};
  detail::check_invariant(p.x * p.x - 2 * p.x - 1 == 2 * p.n * p.n, "(x-1)^2 - 2n^2 = 2");
  return p;
}

// 2^3 n^2, (2x)^2, (2(x+1))^2 with d = 8x + 4.
inline APWitness pell_3ap(std::uint64_t m) {
  if (m < 1) throw InvalidInput("pell_3ap: m must be >= 1");
  const auto [x, n] = pell3_parameters(m);
  // n is odd (n^2 = 2Y^2 - 1), so 2^3 n^2 decomposes as (n, 2).
  detail::check_invariant(mpz_odd_p(n.get_mpz_t()) != 0, "n odd");
  APWitness w;
  w.terms = {8 * n * n, 4 * x * x, 4 * (x + 1) * (x + 1)};
  w.decomps = {{n, 2}, {2 * x, 1}, {2 * (x + 1), 1}};
  w.d = 8 * x + 4;
  detail::check_invariant(w.terms[1] - w.terms[0] == w.d && w.terms[2] - w.terms[1] == w.d, "pell3 difference");
  w.family = Family::Pell3;
  w.params = {m, Family::Pell3, {}};
  return w;
}

// (x-a)^3 (x+a)^2, (x-a)^2 x (x+a)^2, (x-a)^2 (x+a)^3, (x-a)^2 (x+a)^2 (x+2a)
// with a = 2 and x = 8 Y_m^2, so that x + 4 = 4 X_m^2 from X^2 - 2Y^2 = 1.
inline APWitness four_ap(std::uint64_t m, FactorBudget budget = {}) {
  if (m < 1) throw InvalidInput("four_ap: m must be >= 1");
  const PellSolution s = pell_solution(PellKind::Pos, m);
  const Natural& X = s.X;
  const Natural& Y = s.Y;
  const Natural x = 8 * Y * Y;
  detail::check_invariant(x + 4 == 4 * X * X, "x + 2a = 4X^2");
  const Natural lo = x - 2;
  const Natural hi = x + 2;

  // blocks: 2, 2Y-1, 2Y+1, Y, 4Y^2+1, X
  const detail::BlockFactors<6> blocks({Natural(2), 2 * Y - 1, 2 * Y + 1, Y, 4 * Y * Y + 1, X}, budget);
  constexpr std::array<unsigned, 6> kLo = {1, 1, 1, 0, 0, 0};    // x - 2
  constexpr std::array<unsigned, 6> kMid = {3, 0, 0, 2, 0, 0};   // x
  constexpr std::array<unsigned, 6> kHi = {1, 0, 0, 0, 1, 0};    // x + 2
  constexpr std::array<unsigned, 6> kTop = {2, 0, 0, 0, 0, 2};   // x + 4

  APWitness w;
  w.terms = {lo * lo * lo * hi * hi, lo * lo * x * hi * hi, lo * lo * hi * hi * hi, lo * lo * hi * hi * (x + 4)};
  const std::array<std::array<unsigned, 6>, 4> exps = {
      detail::linear<6>({{3, kLo}, {2, kHi}}),
      detail::linear<6>({{2, kLo}, {1, kMid}, {2, kHi}}),
      detail::linear<6>({{2, kLo}, {3, kHi}}),
      detail::linear<6>({{2, kLo}, {2, kHi}, {1, kTop}}),
  };
  for (std::size_t i = 0; i < 4; ++i) {
    const Factorization f = blocks.combine(exps[i]);
    detail::check_invariant(f.value() == w.terms[i], "four block factorization");
    w.decomps.push_back(decompose_powerful(f));
  }
  w.d = 2 * lo * lo * hi * hi;
  w.family = Family::Four;
  w.params = {m, Family::Four, {}};
  return w;
}

// (y-2a)(y-a)^2(y+a)^2, (y-a)^3(y+a)^2, (y-a)^2 y (y+a)^2, (y-a)^2(y+a)^3,
// (y-a)^2(y+a)^2(y+2a) with y = (2x)^2 and 2a = 8x + 4, x from pell3
// index m, so y - 2a, y, y + 2a is the pell3 progression.
inline APWitness five_ap(std::uint64_t m, FactorBudget budget = {}) {
  if (m < 1) throw InvalidInput("five_ap: m must be >= 1");
  const auto [x, n] = pell3_parameters(m);
  const Natural y = 4 * x * x;
  const Natural a = 4 * x + 2;
  const Natural u = 2 * x * x - 2 * x - 1;  // (y - a) / 2
  const Natural v = 2 * x * x + 2 * x + 1;  // (y + a) / 2
  const Natural lo = y - a;
  const Natural hi = y + a;
  detail::check_invariant(y - 2 * a == 8 * n * n, "y - 2a = 2^3 n^2");

  // blocks: 2, n, u, x, v, x+1
  const detail::BlockFactors<6> blocks({Natural(2), n, u, x, v, x + 1}, budget);
  constexpr std::array<unsigned, 6> kBottom = {3, 2, 0, 0, 0, 0};  // y - 2a
  constexpr std::array<unsigned, 6> kLo = {1, 0, 1, 0, 0, 0};      // y - a
  constexpr std::array<unsigned, 6> kMid = {2, 0, 0, 2, 0, 0};     // y
  constexpr std::array<unsigned, 6> kHi = {1, 0, 0, 0, 1, 0};      // y + a
  constexpr std::array<unsigned, 6> kTop = {2, 0, 0, 0, 0, 2};     // y + 2a

  APWitness w;
  const Natural core = lo * lo * hi * hi;
  w.terms = {(y - 2 * a) * core, lo * core, y * core, hi * core, (y + 2 * a) * core};
  const std::array<std::array<unsigned, 6>, 5> exps = {
      detail::linear<6>({{1, kBottom}, {2, kLo}, {2, kHi}}),
      detail::linear<6>({{3, kLo}, {2, kHi}}),
      detail::linear<6>({{2, kLo}, {1, kMid}, {2, kHi}}),
      detail::linear<6>({{2, kLo}, {3, kHi}}),
      detail::linear<6>({{2, kLo}, {2, kHi}, {1, kTop}}),
  };
  for (std::size_t i = 0; i < 5; ++i) {
    const Factorization f = blocks.combine(exps[i]);
    detail::check_invariant(f.value() == w.terms[i], "five block factorization");
    w.decomps.push_back(decompose_powerful(f));
  }
  w.d = a * core;
  w.family = Family::Five;
  w.params = {m, Family::Five, {}};
  return w;
}

// One induction step: write last + d = a^2 b (b square-free), scale every
// term by b^2 and append a^2 b^3. Common difference becomes d b^2.
inline APWitness extend_ap(const APWitness& w, FactorBudget budget = {}) {
  if (w.terms.empty()) throw InvalidInput("extend_ap: empty witness");
  const SquarefreeDecomp next = decompose_square_times_squarefree(w.last() + w.d, budget);
  const Natural scale = next.b * next.b;
  APWitness out;
  out.terms.reserve(w.k() + 1);
  out.decomps.reserve(w.k() + 1);
  for (std::size_t i = 0; i < w.k(); ++i) {
    out.terms.push_back(w.terms[i] * scale);
    // a_i^2 b_i^3 b^2 = (a_i b)^2 b_i^3
    out.decomps.push_back({w.decomps[i].a * next.b, w.decomps[i].b});
  }
  out.terms.push_back(next.a * next.a * next.b * next.b * next.b);
  out.decomps.push_back({next.a, next.b});
  out.d = w.d * scale;
  out.family = Family::Extended;
  out.params = w.params;
  if (w.family != Family::Extended) out.params.seed = w.family;
  out.params.multipliers.push_back(next.b);
  return out;
}

inline constexpr std::size_t kDefaultMaxLongApLength = 64;

// Extend `seed` until it has k terms.
inline APWitness long_ap(std::size_t k, const APWitness& seed, FactorBudget budget = {},
                         std::size_t max_k = kDefaultMaxLongApLength) {
  if (k < 3) throw InvalidInput("long_ap: k must be >= 3");
  if (k > max_k) throw InvalidInput("long_ap: k exceeds configured maximum " + std::to_string(max_k));
  if (k < seed.k()) throw InvalidInput("long_ap: seed is already longer than k");
  APWitness w = seed;
  for (std::size_t step = 1; w.k() < k; ++step) {
    try {
      w = extend_ap(w, budget);
    } catch (const BudgetExceeded& e) {
      throw ExtensionFailed(step, e.what());
    }
  }
  return w;
}

inline APWitness long_ap(std::size_t k, FactorBudget budget = {}) { return long_ap(k, pell_3ap(1), budget); }

// Exponent 1 - 1/(10 * 3^(k-5)) of the k-term bound, k >= 5.
inline Rational theta_k(std::size_t k) {
  if (k < 5) throw InvalidInput("theta_k: k must be >= 5");
  Natural denom = 10 * pow(Natural(3), k - 5);
  return Rational(denom - 1, denom);
}

// C_5 = c5, C_{j+1} = C_j (1 + j C_j)^(2 / (10 * 3^(j-4))), each step
// evaluated with upward rounding and then rounded up to a multiple of 1/1000,
// so every C_k is an upper bound for the exact recurrence value.
inline Rational ck_constants(std::size_t k, const Rational& c5 = Rational(3)) {
  if (k < 5) throw InvalidInput("ck_constants: k must be >= 5");
  Rational c = c5;
  for (std::size_t j = 5; j < k; ++j) {
    const Rational base_q = 1 + Rational(static_cast<unsigned long>(j)) * c;
    // (1 + jC)^(2 / (10 * 3^(j-4))) = (1 + jC)^(1 / (5 * 3^(j-4)))
    const unsigned long root_degree = 5 * pow(Natural(3), j - 4).get_ui();
    Decimal base = Decimal::from(base_q, MPFR_RNDU);
    Decimal factor;
    mpfr_rootn_ui(factor.get(), base.get(), root_degree, MPFR_RNDU);
    Decimal cj = Decimal::from(c, MPFR_RNDU);
    Decimal next;
    mpfr_mul(next.get(), cj.get(), factor.get(), MPFR_RNDU);
    mpfr_mul_ui(next.get(), next.get(), 1000, MPFR_RNDU);
    mpfr_ceil(next.get(), next.get());
    Natural thousandths;
    mpfr_get_z(thousandths.get_mpz_t(), next.get(), MPFR_RNDU);
    c = Rational(thousandths, 1000);
    c.canonicalize();
  }
  return c;
}

// d / N^theta for the first term N.
inline Decimal theta_ratio(const APWitness& w, const Rational& theta) {
  if (theta <= 0 || theta >= 1) throw InvalidInput("theta must lie in (0, 1)");
  return power_ratio(w.d, w.first(), theta);
}

// Exact check d <= C * N^theta_k(k) for a k-term witness with k >= 5.
inline bool satisfies_ck_bound(const APWitness& w, const Rational& C) {
  return within_power_bound(w.d, w.first(), C, theta_k(w.k()));
}

}  // namespace powerful_ap
