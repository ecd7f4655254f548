// Acceptance run: one PASS/FAIL line per criterion, each with its wall-clock
// limit. Exits non-zero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "cli_app.hpp"
#include "oracles.hpp"

using namespace powerful_ap;
using powerful_ap::cli::json;

namespace {

struct Outcome {
  bool ok = true;
  std::string detail;

  void require(bool cond, const std::string& what) {
    if (!cond && ok) {
      ok = false;
      detail = what;
    }
  }
};

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun cli_run(std::vector<std::string> args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

int failures = 0;

void criterion(int id, const char* title, double limit_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o.ok = false;
    o.detail = std::string("exception: ") + e.what();
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (o.ok && secs > limit_s) {
    o.ok = false;
    o.detail = "over time limit";
  }
  if (!o.ok) ++failures;
  std::printf("criterion %2d: %s  %-44s %8.2fs / %.0fs%s%s\n", id, o.ok ? "PASS" : "FAIL", title, secs, limit_s,
              o.detail.empty() ? "" : "  ", o.detail.c_str());
  std::fflush(stdout);
}

std::vector<Natural> nat(std::initializer_list<unsigned long> xs) {
  std::vector<Natural> out;
  for (auto x : xs) out.emplace_back(x);
  return out;
}

// d^2 vs c^2 N for rational c, i.e. d / sqrt(N) against c.
int compare_half_ratio(const Natural& d, const Natural& N, const Rational& c) {
  const Rational lhs(d * d);
  const Rational rhs = c * c * Rational(N);
  return lhs < rhs ? -1 : (lhs > rhs ? 1 : 0);
}

const char* kSearchLimit = "1e8";
const char* kSearchDmax = "1e6";

}  // namespace

int main() {
  criterion(1, "folklore 3-AP (1, 25, 49)", 1, [] {
    Outcome o;
    const CliRun r = cli_run({"construct", "--family", "squares3", "--m", "1"});
    o.require(r.code == 0, "exit code " + std::to_string(r.code));
    const json row = json::parse(r.out)["rows"][0];
    o.require(row["terms"] == json::array({"1", "25", "49"}), "terms");
    o.require(row["d"] == "24", "d");
    o.require(row["verified"].get<bool>(), "not verified");
    return o;
  });

  criterion(2, "pell3 family m = 1..200", 10, [] {
    Outcome o;
    const APWitness first = pell_3ap(1);
    o.require(first.terms == nat({392, 484, 576}) && first.d == 92, "m = 1 is not (392, 484, 576), d = 92");
    APWitness prev;
    for (std::uint64_t m = 1; m <= 200; ++m) {
      const APWitness w = pell_3ap(m);
      const std::string at = " at m = " + std::to_string(m);
      o.require(validate(w).ok, "validation" + at);
      o.require(w.d == 8 * pell3_parameters(m).x + 4, "d != 8x + 4" + at);
      o.require(compare_half_ratio(w.d, w.first(), Rational(4)) > 0, "ratio <= 4" + at);
      o.require(compare_half_ratio(w.d, w.first(), Rational(93, 20)) <= 0, "ratio > 4.65" + at);
      if (m > 1) {
        o.require(compare_power_ratios(w.d, w.first(), prev.d, prev.first(), Rational(1, 2)) < 0,
                  "ratio not strictly decreasing" + at);
      }
      prev = w;
    }
    o.require(compare_half_ratio(prev.d, prev.first(), Rational(4001, 1000)) < 0, "|ratio - 4| >= 1e-3 at m = 200");
    return o;
  });

  criterion(3, "4-AP family m = 1..15", 10, [] {
    Outcome o;
    const APWitness first = four_ap(1);
    o.require(first.first() == 31'212'000 && first.d == 2'080'800, "m = 1 is not N = 31212000, d = 2080800");
    APWitness prev;
    for (std::uint64_t m = 1; m <= 15; ++m) {
      const APWitness w = four_ap(m);
      const std::string at = " at m = " + std::to_string(m);
      for (const auto& t : w.terms) o.require(is_powerful(t), "term not powerful" + at);
      o.require(validate(w).ok, "validation" + at);
      o.require(within_power_bound(w.d, w.first(), Rational(3), Rational(4, 5)), "d > 3 N^(4/5)" + at);
      if (m > 1) {
        o.require(compare_power_ratios(w.d, w.first(), prev.d, prev.first(), Rational(4, 5)) < 0,
                  "ratio not decreasing" + at);
      }
      prev = w;
    }
    const double r15 = theta_ratio(prev, Rational(4, 5)).to_double();
    o.require(std::abs(r15 - 2) < 1e-2, "ratio at m = 15 not within 1e-2 of 2");
    return o;
  });

  criterion(4, "5-AP family m = 1..10", 10, [] {
    Outcome o;
    const APWitness first = five_ap(1);
    const auto p = pell3_parameters(1);
    const Natural y = 4 * p.x * p.x;
    const Natural a = 4 * p.x + 2;
    const Natural core = (y - a) * (y - a) * (y + a) * (y + a);
    o.require(first.terms[0] == (y - 2 * a) * core && first.terms[2] == y * core && first.terms[4] == (y + 2 * a) * core,
              "terms do not factor through y - 2a, y, y + 2a");
    o.require(y - 2 * a == 392 && y == 484 && y + 2 * a == 576, "anchor is not (392, 484, 576)");
    for (std::uint64_t m = 1; m <= 10; ++m) {
      const APWitness w = five_ap(m);
      const std::string at = " at m = " + std::to_string(m);
      o.require(validate(w).ok, "validation" + at);
      o.require(within_power_bound(w.d, w.first(), Rational(3), Rational(9, 10)), "d > 3 N^(9/10)" + at);
    }
    return o;
  });

  criterion(5, "induction long_ap(7) from (1, 25, 49)", 300, [] {
    Outcome o;
    const APWitness w = long_ap(7, squares_3ap(1));
    o.require(w.k() == 7, "length");
    o.require(validate(w).ok, "validation");
    for (const auto& t : w.terms) o.require(is_powerful(t), "term not powerful");
    o.require(w.params.multipliers.size() >= 2 && w.params.multipliers[0] * w.params.multipliers[0] == 73 * 73 &&
                  w.params.multipliers[1] * w.params.multipliers[1] == 97 * 97,
              "first multipliers are not 73^2, 97^2");
    try {
      const APWitness w8 = long_ap(8, squares_3ap(1));
      o.require(w8.k() == 8 && validate(w8).ok, "long_ap(8) produced an invalid witness");
    } catch (const ExtensionFailed& e) {
      o.require(e.step() >= 1, "long_ap(8) failed without a step");
    }
    return o;
  });

  criterion(6, "C_k bound chain from five_ap(1), k = 6, 7", 60, [] {
    Outcome o;
    APWitness w = five_ap(1);
    o.require(satisfies_ck_bound(w, ck_constants(5)), "k = 5 bound");
    for (std::size_t k = 6; k <= 7; ++k) {
      w = extend_ap(w);
      o.require(w.k() == k, "length");
      o.require(validate(w).ok, "validation at k = " + std::to_string(k));
      o.require(satisfies_ck_bound(w, ck_constants(k)), "d > C_k N^theta_k at k = " + std::to_string(k));
    }
    return o;
  });

  PowerfulTable big;
  criterion(7, "enumeration oracle 1e6, count 1e8", 60, [&] {
    Outcome o;
    const PowerfulTable t = enumerate_powerful(Natural(1'000'000));
    o.require(t.raw() == oracle::powerful_upto(1'000'000), "table differs from brute force");
    big = enumerate_powerful(Natural(100'000'000));
    const double rel = std::abs(static_cast<double>(big.size()) - 21730.0) / 21730.0;
    o.require(rel <= 0.05, "count " + std::to_string(big.size()) + " not within 5% of 21730");
    o.detail = o.ok ? "count(1e8) = " + std::to_string(big.size()) : o.detail;
    return o;
  });

  criterion(8, "consecutive powerful runs to 1e8", 120, [&] {
    Outcome o;
    if (big.size() == 0) big = enumerate_powerful(Natural(100'000'000));
    const auto runs = consecutive_check(big);
    bool has_8 = false;
    bool has_288 = false;
    for (const auto& r : runs) {
      o.require(r.size() == 2, "run of length " + std::to_string(r.size()) + " at " + to_string(r[0]));
      has_8 = has_8 || r[0] == 8;
      has_288 = has_288 || r[0] == 288;
    }
    o.require(has_8 && has_288, "missing (8, 9) or (288, 289)");
    o.detail = o.ok ? std::to_string(runs.size()) + " runs of length 2" : o.detail;
    return o;
  });

  std::string search_out;
  criterion(9, "verification suite", 1200, [&] {
    Outcome o;
    const CliRun r = cli_run({"search", "--limit", kSearchLimit, "--dmax", kSearchDmax, "--threads", "1"});
    o.require(r.code == 0, "search exit code " + std::to_string(r.code));
    search_out = r.out;
    std::vector<APWitness> witnesses;
    const json doc = json::parse(r.out);
    for (const auto& rec : doc["records"]) {
      const Natural N = parse_natural(rec["N"].get<std::string>());
      const Natural d = parse_natural(rec["d"].get<std::string>());
      witnesses.push_back(witness_from_terms({N, N + d, N + 2 * d}));
    }
    const std::size_t found = witnesses.size();
    witnesses.push_back(squares_3ap(1));
    for (std::uint64_t m = 1; m <= 200; ++m) witnesses.push_back(pell_3ap(m));
    std::size_t failed = 0;
    for (const auto& w : witnesses) {
      try {
        const TripleAnalysis t = analyze_triple(w);
        if (!t.passed()) ++failed;
      } catch (const ConsistencyFailure&) {
        ++failed;
      }
    }
    o.require(failed == 0, std::to_string(failed) + " witnesses failed");
    std::size_t lemma_failures = 0;
    for (unsigned long a = 1; a <= 50; ++a) {
      for (unsigned long b = 1; b <= 50; ++b) {
        for (unsigned long p : {2ul, 3ul, 5ul, 7ul}) {
          const unsigned top = valuation(Natural(p), Natural(a) * a * b * b * b);
          for (unsigned delta = 1; delta <= top; ++delta) {
            if (!lemma_check(Natural(a), Natural(b), Natural(p), delta)) ++lemma_failures;
          }
        }
      }
    }
    o.require(lemma_failures == 0, std::to_string(lemma_failures) + " lemma failures");
    o.detail = o.ok ? std::to_string(found) + " searched + 201 constructed 3-APs" : o.detail;
    return o;
  });

  criterion(10, "search output identical at 1, 4, 8 threads", 600, [&] {
    Outcome o;
    if (search_out.empty()) {
      search_out = cli_run({"search", "--limit", kSearchLimit, "--dmax", kSearchDmax, "--threads", "1"}).out;
    }
    for (const char* th : {"4", "8"}) {
      const CliRun r = cli_run({"search", "--limit", kSearchLimit, "--dmax", kSearchDmax, "--threads", th});
      o.require(r.code == 0 && r.out == search_out, std::string("output differs at ") + th + " threads");
      const CliRun c = cli_run({"search", "--limit", "1e6", "--dmax", "1e4", "--threads", th, "--format", "csv"});
      const CliRun c1 = cli_run({"search", "--limit", "1e6", "--dmax", "1e4", "--threads", "1", "--format", "csv"});
      o.require(c.out == c1.out, std::string("csv output differs at ") + th + " threads");
    }
    return o;
  });

  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
