#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "powerful_ap/natural.hpp"

namespace powerful_ap {

enum class PellKind {
  Neg,  // X^2 - 2Y^2 = -1
  Pos,  // X^2 - 2Y^2 = +1
};

struct PellSolution {
  std::uint64_t m = 0;
  Natural X;
  Natural Y;
  PellKind kind = PellKind::Neg;

  // X^2 - 2Y^2 as a signed integer.
  mpz_class norm() const { return X * X - 2 * Y * Y; }
  bool satisfies() const { return norm() == (kind == PellKind::Neg ? -1 : 1); }
};

// Lazy solution stream. Both equations share the step
// (X, Y) -> (3X + 4Y, 2X + 3Y), multiplication by the unit 3 + 2*sqrt(2).
// The negative stream is seeded with (1, 1) at index 0, which is never
// emitted; the positive stream starts at (3, 2) with index 1.
class PellStream {
 public:
  explicit PellStream(PellKind kind) : kind_(kind) {
    if (kind == PellKind::Neg) {
      x_ = 1;
      y_ = 1;
      m_ = 0;
      advance();
    } else {
      x_ = 3;
      y_ = 2;
      m_ = 1;
    }
  }

  PellSolution next() {
    PellSolution s{m_, x_, y_, kind_};
    advance();
    return s;
  }

 private:
  void advance() {
    Natural x = 3 * x_ + 4 * y_;
    Natural y = 2 * x_ + 3 * y_;
    x_ = std::move(x);
    y_ = std::move(y);
    ++m_;
  }

  PellKind kind_;
  Natural x_;
  Natural y_;
  std::uint64_t m_ = 0;
};

inline std::vector<PellSolution> pell_solutions(PellKind kind, std::uint64_t count) {
  PellStream stream(kind);
  std::vector<PellSolution> out;
  out.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) out.push_back(stream.next());
  return out;
}

// Indices 1..count of X^2 - 2Y^2 = -1, i.e. X + Y*sqrt(2) = (1 + sqrt(2))^(2m+1).
inline std::vector<PellSolution> pell_neg_solutions(std::uint64_t count) {
  return pell_solutions(PellKind::Neg, count);
}

// Indices 1..count of X^2 - 2Y^2 = 1, i.e. X + Y*sqrt(2) = (3 + 2*sqrt(2))^m.
inline std::vector<PellSolution> pell_pos_solutions(std::uint64_t count) {
  return pell_solutions(PellKind::Pos, count);
}

// The m-th solution (m >= 1) without keeping the prefix.
inline PellSolution pell_solution(PellKind kind, std::uint64_t m) {
  if (m < 1) throw InvalidInput("Pell index must be >= 1");
  PellStream stream(kind);
  for (std::uint64_t i = 1; i < m; ++i) stream.next();
  return stream.next();
}

}  // namespace powerful_ap
