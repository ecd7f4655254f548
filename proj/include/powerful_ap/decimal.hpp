#pragma once

#include <mpfr.h>

#include <cstdint>
#include <cstdlib>
#include <string>
#include <utility>

#include "powerful_ap/natural.hpp"

namespace powerful_ap {

using Rational = mpq_class;

inline constexpr int kDecimalDigits = 50;
inline constexpr mpfr_prec_t kWorkingPrecision = 320;

// Owning MPFR value. Used for reported ratios and logarithms; never for
// pass/fail decisions on exact quantities.
class Decimal {
 public:
  explicit Decimal(mpfr_prec_t prec = kWorkingPrecision) { mpfr_init2(v_, prec); mpfr_set_zero(v_, 1); }
  Decimal(const Decimal& o) {
    mpfr_init2(v_, mpfr_get_prec(o.v_));
    mpfr_set(v_, o.v_, MPFR_RNDN);
  }
  Decimal(Decimal&& o) noexcept : Decimal(mpfr_get_prec(o.v_)) { mpfr_swap(v_, o.v_); }
  Decimal& operator=(Decimal o) noexcept {
    mpfr_swap(v_, o.v_);
    return *this;
  }
  ~Decimal() { mpfr_clear(v_); }

  static Decimal from(const Natural& n, mpfr_rnd_t rnd = MPFR_RNDN) {
    Decimal d;
    mpfr_set_z(d.v_, n.get_mpz_t(), rnd);
    return d;
  }
  static Decimal from(const Rational& q, mpfr_rnd_t rnd = MPFR_RNDN) {
    Decimal d;
    mpfr_set_q(d.v_, q.get_mpq_t(), rnd);
    return d;
  }

  mpfr_ptr get() { return v_; }
  mpfr_srcptr get() const { return v_; }

  double to_double() const { return mpfr_get_d(v_, MPFR_RNDN); }

  // `digits` significant digits, rounded to nearest. Fixed notation for
  // moderate magnitudes, otherwise mantissa 'e' exponent.
  std::string str(int digits = kDecimalDigits) const {
    if (mpfr_zero_p(v_)) return "0";
    if (mpfr_nan_p(v_)) return "nan";
    if (mpfr_inf_p(v_)) return mpfr_sgn(v_) > 0 ? "inf" : "-inf";
    mpfr_exp_t exp10 = 0;
    char* raw = mpfr_get_str(nullptr, &exp10, 10, static_cast<std::size_t>(digits), v_, MPFR_RNDN);
    std::string mant(raw);
    mpfr_free_str(raw);
    std::string sign;
    if (!mant.empty() && mant[0] == '-') {
      sign = "-";
      mant.erase(0, 1);
    }
    // value = 0.mant * 10^exp10
    if (exp10 > 0 && exp10 <= digits) {
      std::string intpart = mant.substr(0, static_cast<std::size_t>(exp10));
      std::string frac = mant.substr(static_cast<std::size_t>(exp10));
      return sign + intpart + (frac.empty() ? "" : "." + frac);
    }
    if (exp10 <= 0 && exp10 > -6) {
      return sign + "0." + std::string(static_cast<std::size_t>(-exp10), '0') + mant;
    }
    return sign + mant.substr(0, 1) + "." + mant.substr(1) + "e" + std::to_string(exp10 - 1);
  }

  friend bool operator<(const Decimal& a, const Decimal& b) { return mpfr_less_p(a.v_, b.v_) != 0; }
  friend bool operator>(const Decimal& a, const Decimal& b) { return b < a; }

 private:
  mpfr_t v_;
};

inline Decimal log(const Natural& n) {
  Decimal x = Decimal::from(n);
  Decimal r;
  mpfr_log(r.get(), x.get(), MPFR_RNDN);
  return r;
}

inline Decimal divide(const Decimal& a, const Decimal& b) {
  Decimal r;
  mpfr_div(r.get(), a.get(), b.get(), MPFR_RNDN);
  return r;
}

// d / N^theta, computed as d * exp(-theta * log N).
inline Decimal power_ratio(const Natural& d, const Natural& N, const Rational& theta) {
  Decimal logn = log(N);
  Decimal t = Decimal::from(theta);
  Decimal e;
  mpfr_mul(e.get(), logn.get(), t.get(), MPFR_RNDN);
  mpfr_neg(e.get(), e.get(), MPFR_RNDN);
  mpfr_exp(e.get(), e.get(), MPFR_RNDN);
  Decimal r = Decimal::from(d);
  mpfr_mul(r.get(), r.get(), e.get(), MPFR_RNDN);
  return r;
}

// Exact test of d <= C * N^theta for rational C > 0 and theta = p/q:
// d^q * den(C)^q <= num(C)^q * N^p.
inline bool within_power_bound(const Natural& d, const Natural& N, const Rational& C, const Rational& theta) {
  Rational th = theta;
  th.canonicalize();
  const unsigned long p = th.get_num().get_ui();
  const unsigned long q = th.get_den().get_ui();
  Rational c = C;
  c.canonicalize();
  const Natural lhs = pow(d, q) * pow(c.get_den(), q);
  const Natural rhs = pow(c.get_num(), q) * pow(N, p);
  return lhs <= rhs;
}

// Three-way exact comparison of d1 / N1^theta against d2 / N2^theta.
inline int compare_power_ratios(const Natural& d1, const Natural& N1, const Natural& d2, const Natural& N2,
                                const Rational& theta) {
  Rational th = theta;
  th.canonicalize();
  const unsigned long p = th.get_num().get_ui();
  const unsigned long q = th.get_den().get_ui();
  const Natural lhs = pow(d1, q) * pow(N2, p);
  const Natural rhs = pow(d2, q) * pow(N1, p);
  return lhs < rhs ? -1 : (lhs > rhs ? 1 : 0);
}

// Accepts "p/q", a plain decimal such as "0.75", or an integer.
inline Rational parse_rational(const std::string& s) {
  if (s.empty()) throw ParseError("empty rational literal");
  if (auto slash = s.find('/'); slash != std::string::npos) {
    Rational r(parse_natural(s.substr(0, slash)), parse_natural(s.substr(slash + 1)));
    if (r.get_den() == 0) throw ParseError("zero denominator in '" + s + "'");
    r.canonicalize();
    return r;
  }
  if (auto dot = s.find('.'); dot != std::string::npos) {
    std::string ip = s.substr(0, dot);
    std::string fp = s.substr(dot + 1);
    if (ip.empty()) ip = "0";
    if (fp.empty()) throw ParseError("malformed decimal '" + s + "'");
    Rational r(parse_natural(ip + fp), pow(Natural(10), fp.size()));
    r.canonicalize();
    return r;
  }
  return Rational(parse_natural(s));
}

inline std::string to_string(const Rational& q) {
  Rational c = q;
  c.canonicalize();
  return c.get_str(10);
}

}  // namespace powerful_ap
