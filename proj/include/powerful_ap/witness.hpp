#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "powerful_ap/factorize.hpp"
#include "powerful_ap/natural.hpp"

namespace powerful_ap {

enum class Family {
  Squares3,
  Pell3,
  Four,
  Five,
  Extended,
  Input,  // supplied from outside (witness file, search hit)
};

inline std::string_view family_name(Family f) {
  switch (f) {
    case Family::Squares3: return "squares3";
    case Family::Pell3: return "pell3";
    case Family::Four: return "four";
    case Family::Five: return "five";
    case Family::Extended: return "extended";
    case Family::Input: return "input";
  }
  return "input";
}

inline Family parse_family(std::string_view s) {
  if (s == "squares3") return Family::Squares3;
  if (s == "pell3") return Family::Pell3;
  if (s == "four") return Family::Four;
  if (s == "five") return Family::Five;
  if (s == "extended") return Family::Extended;
  if (s == "input") return Family::Input;
  throw ParseError("unknown family '" + std::string(s) + "'");
}

// How a witness was generated: the family index of the seed and the
// square-free multipliers b of each extension step, in order.
struct WitnessParams {
  std::uint64_t m = 0;
  Family seed = Family::Input;
  std::vector<Natural> multipliers;
};

// A k-term arithmetic progression of powerful numbers with the a^2 b^3
// decomposition of every term.
struct APWitness {
  std::vector<Natural> terms;
  Natural d;
  std::vector<PowerfulDecomp> decomps;
  Family family = Family::Input;
  WitnessParams params;

  std::size_t k() const { return terms.size(); }
  const Natural& first() const { return terms.front(); }
  const Natural& last() const { return terms.back(); }
};

struct Validation {
  bool ok = true;
  std::string failure;

  explicit operator bool() const { return ok; }
};

// Full re-check: length, constant positive difference, powerfulness through
// is_powerful (not through the stored decompositions), and that every
// decomposition reconstructs its term with a square-free b.
inline Validation validate(const APWitness& w, FactorBudget budget = {}) {
  auto fail = [](std::string why) { return Validation{false, std::move(why)}; };
  if (w.terms.size() < 3) return fail("fewer than 3 terms");
  if (w.decomps.size() != w.terms.size()) return fail("decomposition count differs from term count");
  if (w.d < 1) return fail("non-positive common difference");
  if (w.terms.front() < 1) return fail("first term must be positive");
  for (std::size_t i = 1; i < w.terms.size(); ++i) {
    if (w.terms[i] - w.terms[i - 1] != w.d) return fail("difference broken at term " + std::to_string(i));
  }
  for (std::size_t i = 0; i < w.terms.size(); ++i) {
    if (!is_powerful(w.terms[i], budget)) return fail("term " + std::to_string(i) + " is not powerful");
    const auto& dec = w.decomps[i];
    if (dec.value() != w.terms[i]) return fail("decomposition " + std::to_string(i) + " does not reconstruct");
    if (!is_squarefree(dec.b, budget)) return fail("decomposition " + std::to_string(i) + " has non-squarefree b");
  }
  return {};
}

// Witness from bare terms: checks the progression and decomposes each term.
// Throws NotPowerful / BudgetExceeded / InvalidInput.
inline APWitness witness_from_terms(std::vector<Natural> terms, Family family = Family::Input,
                                    FactorBudget budget = {}) {
  if (terms.size() < 3) throw InvalidInput("a witness needs at least 3 terms");
  APWitness w;
  w.d = terms[1] - terms[0];
  if (w.d < 1) throw InvalidInput("terms must be strictly increasing");
  for (std::size_t i = 1; i < terms.size(); ++i) {
    if (terms[i] - terms[i - 1] != w.d) throw InvalidInput("terms do not form an arithmetic progression");
  }
  if (terms[0] < 1) throw InvalidInput("terms must be positive");
  for (const auto& t : terms) w.decomps.push_back(decompose_powerful(t, budget));
  w.terms = std::move(terms);
  w.family = family;
  w.params.seed = family;
  return w;
}

}  // namespace powerful_ap
