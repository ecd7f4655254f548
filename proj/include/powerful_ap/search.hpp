#pragma once

#include <openssl/evp.h>

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <unordered_set>
#include <vector>

#include "powerful_ap/decimal.hpp"
#include "powerful_ap/natural.hpp"

namespace powerful_ap {

struct SearchOptions {
  unsigned threads = 1;
  // Largest limit enumerate_powerful accepts (about 2.2e7 table entries).
  std::uint64_t max_limit = 100'000'000'000'000ULL;
};

// Every powerful n <= limit, ascending, with a hash index for membership.
// Values are held as 64-bit words internally; the accessors hand out Naturals.
class PowerfulTable {
 public:
  PowerfulTable() = default;
  PowerfulTable(std::uint64_t limit, std::vector<std::uint64_t> values)
      : limit_(limit), values_(std::move(values)), index_(values_.begin(), values_.end()) {}

  Natural limit() const { return from_u64(limit_); }
  std::uint64_t limit_u64() const { return limit_; }
  std::size_t size() const { return values_.size(); }
  Natural operator[](std::size_t i) const { return from_u64(values_[i]); }
  const std::vector<std::uint64_t>& raw() const { return values_; }

  bool contains(std::uint64_t v) const { return index_.count(v) != 0; }
  bool contains(const Natural& v) const { return fits_u64(v) && contains(to_u64(v)); }

  friend bool operator==(const PowerfulTable& a, const PowerfulTable& b) {
    return a.limit_ == b.limit_ && a.values_ == b.values_;
  }

 private:
  std::uint64_t limit_ = 0;
  std::vector<std::uint64_t> values_;
  std::unordered_set<std::uint64_t> index_;
};

// N, N+d, ..., N+(k-1)d all in the table.
struct APRecord {
  Natural N;
  Natural d;
  unsigned k = 3;
  Decimal ratio_half;  // d / sqrt(N)

  friend bool operator==(const APRecord& a, const APRecord& b) {
    return a.N == b.N && a.d == b.d && a.k == b.k;
  }
};

namespace detail {

inline std::uint64_t icbrt_u64(std::uint64_t n) {
  std::uint64_t r = to_u64(iroot(from_u64(n), 3));
  return r;
}

inline std::uint64_t isqrt_u64(std::uint64_t n) { return to_u64(isqrt(from_u64(n))); }

// Square-free flags on [0, limit] by crossing out multiples of p^2.
inline std::vector<bool> squarefree_sieve(std::uint64_t limit) {
  std::vector<bool> sqfree(limit + 1, true);
  sqfree[0] = false;
  for (std::uint64_t p = 2; p * p <= limit; ++p) {
    for (std::uint64_t m = p * p; m <= limit; m += p * p) sqfree[m] = false;
  }
  return sqfree;
}

template <typename Fn>
void run_workers(unsigned threads, Fn&& fn) {
  if (threads <= 1) {
    fn(0u);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (unsigned t = 0; t < threads; ++t) pool.emplace_back([&fn, t] { fn(t); });
  for (auto& th : pool) th.join();
}

inline Decimal half_ratio(const Natural& d, const Natural& N) {
  Decimal root = Decimal::from(N);
  mpfr_sqrt(root.get(), root.get(), MPFR_RNDN);
  return divide(Decimal::from(d), root);
}

}  // namespace detail

// All powerful n <= limit as a^2 b^3 over square-free b <= limit^(1/3).
// Work is split by b modulo the thread count; the merge sorts, so the
// result does not depend on the split.
inline PowerfulTable enumerate_powerful(const Natural& limit, SearchOptions opts = {}) {
  if (limit < 1) throw InvalidInput("enumerate_powerful: limit must be >= 1");
  if (!fits_u64(limit) || to_u64(limit) > opts.max_limit) {
    throw CapacityExceeded("limit " + to_string(limit) + " exceeds configured capacity " +
                           std::to_string(opts.max_limit));
  }
  const std::uint64_t lim = to_u64(limit);
  const std::uint64_t bmax = detail::icbrt_u64(lim);
  const std::vector<bool> sqfree = detail::squarefree_sieve(bmax);
  const unsigned threads = std::max(1u, opts.threads);

  std::vector<std::vector<std::uint64_t>> shards(threads);
  detail::run_workers(threads, [&](unsigned t) {
    auto& out = shards[t];
    for (std::uint64_t b = 1 + t; b <= bmax; b += threads) {
      if (!sqfree[b]) continue;
      const std::uint64_t b3 = b * b * b;
      const std::uint64_t amax = detail::isqrt_u64(lim / b3);
      for (std::uint64_t a = 1; a <= amax; ++a) out.push_back(a * a * b3);
    }
  });

  std::vector<std::uint64_t> values;
  std::size_t total = 0;
  for (const auto& s : shards) total += s.size();
  values.reserve(total);
  for (auto& s : shards) values.insert(values.end(), s.begin(), s.end());
  std::sort(values.begin(), values.end());
  if (std::adjacent_find(values.begin(), values.end()) != values.end()) {
    throw std::logic_error("enumerate_powerful: a^2 b^3 representation was not unique");
  }
  return PowerfulTable(lim, std::move(values));
}

// Every k-AP N, N+d, ..., N+(k-1)d inside the table with 1 <= d <= d_max,
// sorted by (N, d). Pairs (N, N+d) come from a window scan over the sorted
// values; the remaining terms are hash probes.
inline std::vector<APRecord> find_kaps(const PowerfulTable& table, unsigned k, const Natural& d_max,
                                       SearchOptions opts = {}) {
  if (k < 3) throw InvalidInput("find_kaps: k must be >= 3");
  const auto& v = table.raw();
  if (d_max < 1 || v.empty()) return {};
  const std::uint64_t dmax = fits_u64(d_max) ? to_u64(d_max) : table.limit_u64();
  const std::uint64_t lim = table.limit_u64();
  const unsigned threads = std::max(1u, opts.threads);

  constexpr std::size_t kChunk = 256;
  const std::size_t chunks = (v.size() + kChunk - 1) / kChunk;
  std::vector<std::vector<std::pair<std::uint64_t, std::uint64_t>>> found(chunks);
  std::atomic<std::size_t> next{0};
  detail::run_workers(threads, [&](unsigned) {
    for (std::size_t c = next++; c < chunks; c = next++) {
      auto& out = found[c];
      const std::size_t end = std::min(v.size(), (c + 1) * kChunk);
      for (std::size_t i = c * kChunk; i < end; ++i) {
        const std::uint64_t n = v[i];
        for (std::size_t j = i + 1; j < v.size() && v[j] - n <= dmax; ++j) {
          const std::uint64_t d = v[j] - n;
          // N + (k-1)d <= limit, without overflow
          if ((lim - n) / (k - 1) < d) break;
          bool all = true;
          for (unsigned t = 2; t < k && all; ++t) all = table.contains(n + t * d);
          if (all) out.emplace_back(n, d);
        }
      }
    }
  });

  std::vector<APRecord> records;
  for (const auto& chunk : found) {
    for (const auto& [n, d] : chunk) {
      Natural N = from_u64(n);
      Natural D = from_u64(d);
      Decimal r = detail::half_ratio(D, N);
      records.push_back({std::move(N), std::move(D), k, std::move(r)});
    }
  }
  return records;
}

inline std::vector<APRecord> find_3aps(const PowerfulTable& table, const Natural& d_max, SearchOptions opts = {}) {
  return find_kaps(table, 3, d_max, opts);
}

// Maximal runs n, n+1, ... of consecutive powerful numbers of length >= 2.
inline std::vector<std::vector<Natural>> consecutive_check(const PowerfulTable& table) {
  std::vector<std::vector<Natural>> runs;
  const auto& v = table.raw();
  std::size_t i = 0;
  while (i < v.size()) {
    std::size_t j = i;
    while (j + 1 < v.size() && v[j + 1] == v[j] + 1) ++j;
    if (j > i) {
      std::vector<Natural> run;
      for (std::size_t t = i; t <= j; ++t) run.push_back(from_u64(v[t]));
      runs.push_back(std::move(run));
    }
    i = j + 1;
  }
  return runs;
}

// Records whose d/sqrt(N) is strictly below every earlier record's, scanning
// in (N, d) order. Comparisons are exact: d1^2 N2 < d2^2 N1.
inline std::vector<APRecord> record_min_ratio(std::vector<APRecord> records) {
  std::sort(records.begin(), records.end(), [](const APRecord& a, const APRecord& b) {
    return a.N != b.N ? a.N < b.N : a.d < b.d;
  });
  std::vector<APRecord> minima;
  for (auto& r : records) {
    if (minima.empty() || r.d * r.d * minima.back().N < minima.back().d * minima.back().d * r.N) {
      minima.push_back(std::move(r));
    }
  }
  return minima;
}

// ---- table cache --------------------------------------------------------

namespace detail {

inline std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 digest failed");
  }
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return hex.str();
}

inline std::string table_body(const PowerfulTable& t) {
  std::string body;
  body.reserve(t.size() * 10);
  for (std::uint64_t v : t.raw()) {
    body += std::to_string(v);
    body += '\n';
  }
  return body;
}

}  // namespace detail

inline constexpr std::string_view kCacheMagic = "POWERFUL-TABLE v1";

// Header `POWERFUL-TABLE v1 limit=<L> count=<C> sha256=<hex>`, then one
// decimal value per line. The digest covers every byte after the header line.
inline std::string serialize_table(const PowerfulTable& t) {
  const std::string body = detail::table_body(t);
  std::string out(kCacheMagic);
  out += " limit=" + std::to_string(t.limit_u64()) + " count=" + std::to_string(t.size()) +
         " sha256=" + detail::sha256_hex(body) + "\n";
  out += body;
  return out;
}

inline PowerfulTable parse_table(const std::string& text) {
  const auto nl = text.find('\n');
  if (nl == std::string::npos) throw ParseError("cache: missing header line");
  const std::string header = text.substr(0, nl);
  const std::string body = text.substr(nl + 1);

  std::istringstream hs(header);
  std::string magic1, magic2, limit_kv, count_kv, sha_kv, extra;
  hs >> magic1 >> magic2 >> limit_kv >> count_kv >> sha_kv;
  if (magic1 + " " + magic2 != kCacheMagic) throw ParseError("cache: bad magic");
  if (hs >> extra) throw ParseError("cache: trailing header fields");
  auto field = [](const std::string& kv, const std::string& key) {
    if (kv.rfind(key + "=", 0) != 0) throw ParseError("cache: expected " + key + "=");
    return kv.substr(key.size() + 1);
  };
  const Natural limit = parse_natural(field(limit_kv, "limit"));
  const Natural count = parse_natural(field(count_kv, "count"));
  const std::string sha = field(sha_kv, "sha256");
  if (!fits_u64(limit) || !fits_u64(count)) throw ParseError("cache: header values out of range");
  if (detail::sha256_hex(body) != sha) throw ParseError("cache: checksum mismatch");

  std::vector<std::uint64_t> values;
  std::size_t pos = 0;
  while (pos < body.size()) {
    const auto end = body.find('\n', pos);
    if (end == std::string::npos) throw ParseError("cache: unterminated last line");
    const Natural v = parse_natural(std::string_view(body).substr(pos, end - pos));
    if (!fits_u64(v)) throw ParseError("cache: value out of range");
    values.push_back(to_u64(v));
    pos = end + 1;
  }
  if (values.size() != to_u64(count)) throw ParseError("cache: count mismatch");
  if (!std::is_sorted(values.begin(), values.end()) ||
      std::adjacent_find(values.begin(), values.end()) != values.end()) {
    throw ParseError("cache: values not strictly ascending");
  }
  if (!values.empty() && values.back() > to_u64(limit)) throw ParseError("cache: value above limit");
  return PowerfulTable(to_u64(limit), std::move(values));
}

inline std::filesystem::path cache_file_for(const std::filesystem::path& dir, const Natural& limit) {
  return dir / ("powerful-table-" + to_string(limit) + ".txt");
}

inline void write_table_cache(const std::filesystem::path& file, const PowerfulTable& t) {
  if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
  const auto tmp = file.string() + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot write cache file " + tmp);
    os << serialize_table(t);
  }
  std::filesystem::rename(tmp, file);
}

inline PowerfulTable read_table_cache(const std::filesystem::path& file) {
  std::ifstream is(file, std::ios::binary);
  if (!is) throw ParseError("cannot open cache file " + file.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return parse_table(ss.str());
}

struct CachedTable {
  PowerfulTable table;
  bool from_cache = false;
  std::string cache_note;  // why the cache was not used, if it existed
};

// Read the table for `limit` from `cache_dir` when a valid file is present,
// otherwise enumerate and write it. An empty `cache_dir` disables caching.
inline CachedTable load_or_enumerate(const Natural& limit, const std::filesystem::path& cache_dir,
                                     SearchOptions opts = {}) {
  CachedTable out;
  if (!cache_dir.empty()) {
    const auto file = cache_file_for(cache_dir, limit);
    if (std::filesystem::exists(file)) {
      try {
        PowerfulTable t = read_table_cache(file);
        if (t.limit() == limit) {
          out.table = std::move(t);
          out.from_cache = true;
          return out;
        }
        out.cache_note = "limit mismatch";
      } catch (const ParseError& e) {
        out.cache_note = e.what();
      }
    }
  }
  out.table = enumerate_powerful(limit, opts);
  if (!cache_dir.empty()) write_table_cache(cache_file_for(cache_dir, limit), out.table);
  return out;
}

}  // namespace powerful_ap
