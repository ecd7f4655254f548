#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <string>
#include <string_view>

#include "powerful_ap/errors.hpp"

namespace powerful_ap {

// Arbitrary-precision non-negative integer. Negative values never leave a
// function that returns Natural.
using Natural = mpz_class;

inline Natural from_u64(std::uint64_t v) {
  Natural r;
  mpz_import(r.get_mpz_t(), 1, 1, sizeof(v), 0, 0, &v);
  return r;
}

inline bool fits_u64(const Natural& n) {
  return mpz_sgn(n.get_mpz_t()) >= 0 && mpz_sizeinbase(n.get_mpz_t(), 2) <= 64;
}

inline std::uint64_t to_u64(const Natural& n) {
  std::uint64_t v = 0;
  mpz_export(&v, nullptr, 1, sizeof(v), 0, 0, n.get_mpz_t());
  return v;
}

inline std::string to_string(const Natural& n) { return n.get_str(10); }

// Strict decimal: one or more ASCII digits, nothing else.
inline Natural parse_natural(std::string_view s) {
  if (s.empty()) throw ParseError("empty integer literal");
  for (char c : s) {
    if (c < '0' || c > '9') throw ParseError("not a decimal integer: '" + std::string(s) + "'");
  }
  return Natural(std::string(s), 10);
}

inline Natural pow(const Natural& base, unsigned long e) {
  Natural r;
  mpz_pow_ui(r.get_mpz_t(), base.get_mpz_t(), e);
  return r;
}

inline Natural gcd(const Natural& a, const Natural& b) {
  Natural r;
  mpz_gcd(r.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  return r;
}

// floor(sqrt(n))
inline Natural isqrt(const Natural& n) {
  Natural r;
  mpz_sqrt(r.get_mpz_t(), n.get_mpz_t());
  return r;
}

// floor(n^(1/k))
inline Natural iroot(const Natural& n, unsigned long k) {
  Natural r;
  mpz_root(r.get_mpz_t(), n.get_mpz_t(), k);
  return r;
}

inline bool is_perfect_square(const Natural& n) { return mpz_perfect_square_p(n.get_mpz_t()) != 0; }

// Exact k-th root if n is a perfect k-th power.
inline bool exact_root(const Natural& n, unsigned long k, Natural& root) {
  return mpz_root(root.get_mpz_t(), n.get_mpz_t(), k) != 0;
}

inline bool divides(const Natural& d, const Natural& n) {
  return mpz_divisible_p(n.get_mpz_t(), d.get_mpz_t()) != 0;
}

}  // namespace powerful_ap
