#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "powerful_ap/natural.hpp"

namespace powerful_ap {

inline constexpr std::uint32_t kTrialDivisionLimit = 1'000'000;

namespace detail {

inline std::vector<std::uint32_t> sieve_primes(std::uint32_t limit) {
  std::vector<bool> composite(limit + 1, false);
  std::vector<std::uint32_t> primes;
  for (std::uint64_t i = 2; i <= limit; ++i) {
    if (composite[i]) continue;
    primes.push_back(static_cast<std::uint32_t>(i));
    for (std::uint64_t j = i * i; j <= limit; j += i) composite[j] = true;
  }
  return primes;
}

inline constexpr std::array<std::uint32_t, 13> kMillerRabinBases = {2,  3,  5,  7,  11, 13, 17,
                                                                    19, 23, 29, 31, 37, 41};

inline std::uint64_t mul_mod(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
  return static_cast<std::uint64_t>(static_cast<unsigned __int128>(a) * b % m);
}

inline std::uint64_t pow_mod(std::uint64_t b, std::uint64_t e, std::uint64_t m) {
  std::uint64_t r = 1;
  b %= m;
  while (e != 0) {
    if (e & 1) r = mul_mod(r, b, m);
    b = mul_mod(b, b, m);
    e >>= 1;
  }
  return r;
}

inline bool strong_probable_prime_u64(std::uint64_t n, std::uint64_t base) {
  std::uint64_t d = n - 1;
  int s = 0;
  while ((d & 1) == 0) {
    d >>= 1;
    ++s;
  }
  std::uint64_t x = pow_mod(base, d, n);
  if (x == 1 || x == n - 1) return true;
  for (int i = 1; i < s; ++i) {
    x = mul_mod(x, x, n);
    if (x == n - 1) return true;
  }
  return false;
}

inline bool strong_probable_prime(const Natural& n, unsigned long base) {
  Natural n_minus_1 = n - 1;
  Natural d = n_minus_1;
  unsigned long s = mpz_scan1(d.get_mpz_t(), 0);
  mpz_tdiv_q_2exp(d.get_mpz_t(), d.get_mpz_t(), s);
  Natural x;
  Natural b = base;
  mpz_powm(x.get_mpz_t(), b.get_mpz_t(), d.get_mpz_t(), n.get_mpz_t());
  if (x == 1 || x == n_minus_1) return true;
  for (unsigned long i = 1; i < s; ++i) {
    mpz_powm_ui(x.get_mpz_t(), x.get_mpz_t(), 2, n.get_mpz_t());
    if (x == n_minus_1) return true;
  }
  return false;
}

}  // namespace detail

// All primes up to kTrialDivisionLimit, computed once.
inline const std::vector<std::uint32_t>& small_primes() {
  static const std::vector<std::uint32_t> primes = detail::sieve_primes(kTrialDivisionLimit);
  return primes;
}

inline bool is_prime_u64(std::uint64_t n) {
  if (n < 2) return false;
  for (std::uint32_t p : detail::kMillerRabinBases) {
    if (n == p) return true;
    if (n % p == 0) return false;
  }
  // The first 12 bases are deterministic for all 64-bit inputs.
  for (std::size_t i = 0; i < 12; ++i) {
    if (!detail::strong_probable_prime_u64(n, detail::kMillerRabinBases[i])) return false;
  }
  return true;
}

// Deterministic Miller-Rabin below 3.317e24 (first 13 prime bases); above
// that GMP's BPSW-based test.
inline bool is_prime(const Natural& n) {
  if (n < 2) return false;
  if (fits_u64(n)) return is_prime_u64(to_u64(n));
  static const Natural kDeterministicBound("3317044064679887385961981", 10);
  if (n < kDeterministicBound) {
    for (std::uint32_t p : detail::kMillerRabinBases) {
      if (mpz_divisible_ui_p(n.get_mpz_t(), p)) return false;
    }
    for (std::uint32_t p : detail::kMillerRabinBases) {
      if (!detail::strong_probable_prime(n, p)) return false;
    }
    return true;
  }
  return mpz_probab_prime_p(n.get_mpz_t(), 25) != 0;
}

}  // namespace powerful_ap
