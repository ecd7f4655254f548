#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli_app.hpp"

using namespace powerful_ap;
using powerful_ap::cli::json;

namespace {

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

CliResult run(std::vector<std::string> args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::filesystem::path temp_file(const std::string& name, const std::string& body) {
  auto p = std::filesystem::temp_directory_path() / ("powerful_ap_cli_" + std::to_string(::getpid()) + "_" + name);
  std::ofstream os(p);
  os << body;
  return p;
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream is(s);
  for (std::string l; std::getline(is, l);) out.push_back(l);
  return out;
}

}  // namespace

TEST(Cli, ConstructSquares3Csv) {
  const CliResult r = run({"construct", "--family", "squares3", "--m", "1", "--format", "csv"});
  ASSERT_EQ(r.code, 0);
  const auto ls = lines(r.out);
  ASSERT_EQ(ls.size(), 2u);
  EXPECT_EQ(ls[0], "family,k,m,N,d,theta,ratio,verified");
  EXPECT_EQ(ls[1].rfind("squares3,3,1,1,24,3/4,", 0), 0u);
  EXPECT_EQ(ls[1].substr(ls[1].size() - 5), ",true");
}

TEST(Cli, ConstructPell3Json) {
  const CliResult r = run({"construct", "--family", "pell3", "--m", "1..3"});
  ASSERT_EQ(r.code, 0);
  const json j = json::parse(r.out);
  ASSERT_EQ(j["rows"].size(), 3u);
  EXPECT_EQ(j["rows"][0]["N"], "392");
  EXPECT_EQ(j["rows"][0]["d"], "92");
  EXPECT_TRUE(j["rows"][0]["N"].is_string());
  EXPECT_EQ(j["rows"][0]["terms"][2], "576");
}

TEST(Cli, ConstructKapSeedOnly) {
  const CliResult r = run({"construct", "--family", "kap", "--k", "3", "--format", "csv"});
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(lines(r.out).size(), 2u);
}

TEST(Cli, ConstructKapBudgetExceeded) {
  // extending a large seed needs Pollard rho; one iteration is not enough
  const CliResult r = run({"construct", "--family", "kap", "--k", "6", "--seed", "pell3", "--m", "30", "--budget", "1"});
  ASSERT_EQ(r.code, 2);
  const json partial = json::parse(r.out);
  EXPECT_EQ(partial["rows"].size(), 1u);
  const json e = json::parse(lines(r.err).back());
  EXPECT_EQ(e["error"]["kind"], "BudgetExceeded");
  EXPECT_TRUE(e["error"].contains("step"));
}

TEST(Cli, ThetaOverrideAndValidation) {
  CliResult r = run({"construct", "--family", "pell3", "--m", "1", "--theta", "0.75", "--format", "csv"});
  ASSERT_EQ(r.code, 0);
  EXPECT_NE(lines(r.out)[1].find(",3/4,"), std::string::npos);
  r = run({"construct", "--family", "pell3", "--m", "1", "--theta", "1"});
  EXPECT_EQ(r.code, 3);
}

TEST(Cli, ParseErrors) {
  EXPECT_EQ(run({}).code, 3);
  EXPECT_EQ(run({"bogus"}).code, 3);
  EXPECT_EQ(run({"construct", "--family", "seven"}).code, 3);
  EXPECT_EQ(run({"construct", "--family", "pell3", "--m", "3..1"}).code, 3);
  EXPECT_EQ(run({"search", "--limit", "abc"}).code, 3);
  EXPECT_EQ(run({"search", "--limit", "10", "--format", "xml"}).code, 3);
}

TEST(Cli, SearchSmall) {
  CliResult r = run({"search", "--limit", "10"});
  ASSERT_EQ(r.code, 0);
  json j = json::parse(r.out);
  EXPECT_EQ(j["values"], json::array({"1", "4", "8", "9"}));
  EXPECT_EQ(j["runs"], json::array({json::array({"8", "9"})}));

  r = run({"search", "--limit", "100", "--k", "3", "--dmax", "30"});
  j = json::parse(r.out);
  bool found = false;
  for (const auto& rec : j["records"]) found = found || (rec["N"] == "1" && rec["d"] == "24");
  EXPECT_TRUE(found);

  r = run({"search", "--limit", "1"});
  j = json::parse(r.out);
  EXPECT_EQ(j["count"], 1);
  EXPECT_TRUE(j["records"].empty());
}

TEST(Cli, SearchCountNotation) {
  const CliResult r = run({"search", "--limit", "1e4", "--dmax", "10^2", "--format", "csv"});
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(lines(r.out)[0], "family,k,m,N,d,theta,ratio,verified");
}

TEST(Cli, SearchCapacity) {
  const CliResult r = run({"search", "--limit", "1e20"});
  EXPECT_EQ(r.code, 2);
}

TEST(Cli, SearchCacheFromEnvironment) {
  const auto dir = std::filesystem::temp_directory_path() / ("powerful_ap_env_" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  ::setenv(cli::kCacheEnv, dir.c_str(), 1);
  const CliResult a = run({"search", "--limit", "5000"});
  const CliResult b = run({"search", "--limit", "5000"});
  ::unsetenv(cli::kCacheEnv);
  EXPECT_TRUE(std::filesystem::exists(cache_file_for(dir, Natural(5000))));
  EXPECT_EQ(a.out, b.out);
  std::filesystem::remove_all(dir);
}

TEST(Cli, SearchOutFile) {
  const auto p = std::filesystem::temp_directory_path() / ("powerful_ap_out_" + std::to_string(::getpid()) + ".csv");
  const CliResult r = run({"search", "--limit", "1000", "--format", "csv", "--out", p.string()});
  ASSERT_EQ(r.code, 0);
  EXPECT_TRUE(r.out.empty());
  std::ifstream is(p);
  std::string header;
  std::getline(is, header);
  EXPECT_EQ(header, "family,k,m,N,d,theta,ratio,verified");
  std::filesystem::remove(p);
}

TEST(Cli, VerifyFamilies) {
  CliResult r = run({"verify", "--family", "pell3", "--m", "1"});
  ASSERT_EQ(r.code, 0);
  json j = json::parse(r.out);
  const auto& win = j["results"][0]["windows"][0];
  EXPECT_EQ(win["D"], "4");
  EXPECT_TRUE(win["radical"]["holds"].get<bool>());
  EXPECT_EQ(win["quality"].get<std::string>().substr(0, 6), "1.0345");

  r = run({"verify", "--family", "squares3", "--m", "1"});
  j = json::parse(r.out);
  EXPECT_EQ(j["results"][0]["windows"][0]["D"], "1");
  EXPECT_EQ(j["results"][0]["windows"][0]["radical"]["lhs"], "35");
}

TEST(Cli, VerifyWitnessFile) {
  auto p = temp_file("ok.json", R"({"k": 3, "terms": ["392", "484", "576"], "d": "92", "family": "pell3"})");
  EXPECT_EQ(run({"verify", p.string()}).code, 0);
  // k > 3: every window is analyzed
  p = temp_file("four.json", R"({"k": 4, "terms": ["31212000", "33292800", "35373600", "37454400"], "d": "2080800", "family": "four"})");
  const CliResult r = run({"verify", p.string()});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(json::parse(r.out)["results"][0]["windows"].size(), 2u);
}

TEST(Cli, VerifyFailures) {
  auto p = temp_file("bad.json", R"({"k": 3, "terms": ["1", "25", "50"], "d": "24", "family": "x"})");
  CliResult r = run({"verify", p.string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("verification failed"), std::string::npos);

  p = temp_file("notpowerful.json", R"({"k": 3, "terms": ["2", "4", "6"], "d": "2", "family": "x"})");
  EXPECT_EQ(run({"verify", p.string()}).code, 1);

  p = temp_file("malformed.json", "{ not json");
  EXPECT_EQ(run({"verify", p.string()}).code, 3);
  p = temp_file("numbers.json", R"({"k": 3, "terms": [1, 25, 49], "d": "24", "family": "x"})");
  EXPECT_EQ(run({"verify", p.string()}).code, 3);
  p = temp_file("missing.json", R"({"k": 3, "terms": ["1", "25", "49"]})");
  EXPECT_EQ(run({"verify", p.string()}).code, 3);
  EXPECT_EQ(run({"verify", "/nonexistent/witness.json"}).code, 3);
}

TEST(Cli, RowsRoundTrip) {
  const CliResult r = run({"construct", "--family", "four", "--m", "1..3"});
  const json j = json::parse(r.out);
  for (const auto& row : j["rows"]) {
    const Natural N = parse_natural(row["N"].get<std::string>());
    const Natural d = parse_natural(row["d"].get<std::string>());
    std::vector<Natural> terms;
    for (int i = 0; i < row["k"].get<int>(); ++i) terms.push_back(N + d * i);
    EXPECT_TRUE(validate(witness_from_terms(terms)).ok);
  }
}

TEST(Cli, ReportSmall) {
  const CliResult r = run({"report", "--m", "1..3", "--limit", "1e5", "--dmax", "1e3"});
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = json::parse(r.out);
  EXPECT_TRUE(j["all_passed"].get<bool>());
  EXPECT_FALSE(j["ck_chain"].empty());
  EXPECT_GT(j["verification"]["analyzed"].get<int>(), 0);
}
