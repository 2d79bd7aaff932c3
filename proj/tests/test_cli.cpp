#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <locale>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "srdp/cli.hpp"

using namespace srdp::cli;

namespace {

struct Result {
  int code = 0;
  std::string out, err;
};

Result invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "srdp");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

// Data lines of a CSV document: everything after the column header.
std::vector<std::string> data_rows(const std::string& csv) {
  std::istringstream in(csv);
  std::vector<std::string> rows;
  std::string line;
  bool header = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      header = true;
      continue;
    }
    rows.push_back(line);
  }
  return rows;
}

std::vector<std::string> fields(const std::string& row) {
  std::vector<std::string> f;
  std::istringstream in(row);
  std::string cell;
  while (std::getline(in, cell, ',')) f.push_back(cell);
  if (!row.empty() && row.back() == ',') f.push_back("");
  return f;
}

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("srdp_cli_" + name);
}

}  // namespace

TEST_CASE("number formatting") {
  CHECK(format_number(0.1 + 0.2) == "0.3");
  CHECK(format_number(1.0 / 3.0) == "0.333333333333");
  CHECK(format_number(123456789012345.0) == "1.23456789012e+14");
  CHECK(format_number(1e-20) == "1e-20");
  CHECK(format_number(-0.0) == "0");
  CHECK(format_number(std::numeric_limits<double>::infinity()) == "inf");
  // a global locale with ',' as decimal point must not leak into the output
  struct Comma : std::numpunct<char> {
    char do_decimal_point() const override { return ','; }
  };
  const std::locale previous = std::locale::global(std::locale(std::locale::classic(), new Comma));
  CHECK(format_number(0.5) == "0.5");
  const Result r = invoke({"gaussian-family", "--set", "nu_list=0.5"});
  CHECK(data_rows(r.out).at(0) == "0.5,0.5,0.5,0.5,0");
  std::locale::global(previous);
}

TEST_CASE("key-value config files") {
  std::istringstream ok("# comment\n eta = 0.3 \n\ndelta=1.2 # trailing\n");
  const auto kv = parse_key_values(ok, "f");
  REQUIRE(kv.size() == 2);
  CHECK(kv[0].first == "eta");
  CHECK(kv[0].second == "0.3");
  CHECK(kv[1].second == "1.2");
  std::istringstream dup("eta = 1\neta = 2\n");
  CHECK_THROWS_AS(parse_key_values(dup, "f"), UsageError);
  std::istringstream bare("eta\n");
  CHECK_THROWS_WITH_AS(parse_key_values(bare, "cfg"), "cfg:1: expected key = value", UsageError);

  Params p(command_schema("gaussian-family"));
  CHECK_THROWS_AS(p.set("etaa", "1"), UsageError);
  p.set("nu_list", "0.5, 0.6");
  CHECK(p.list("nu_list") == std::vector<double>{0.5, 0.6});
  p.set("eta", "0,5");
  CHECK_THROWS_AS(p.num("eta"), UsageError);
  CHECK_THROWS_AS(parse_number("1e", "x"), UsageError);
}

TEST_CASE("config file and overrides") {
  const auto path = temp_file("gauss.cfg");
  {
    std::ofstream f(path);
    f << "eta = 0.5\ndelta = 1\nnu_list = 0.5\n";
  }
  const Result r = invoke({"gaussian-family", "--config", path.string(), "--set", "nu_list=0.6"});
  CHECK(r.code == 0);
  CHECK(r.out.find("# eta = 0.5\n") != std::string::npos);
  CHECK(r.out.find("# nu_list = 0.6\n") != std::string::npos);
  CHECK(r.out.find("# note zero_rate_threshold_delta = 1\n") != std::string::npos);
  {
    std::ofstream f(path);
    f << "eta = 0.5\ntypo = 1\n";
  }
  const Result bad = invoke({"gaussian-family", "--config", path.string()});
  CHECK(bad.code == kUsage);
  CHECK(bad.err.find("unknown key 'typo'") != std::string::npos);
  std::filesystem::remove(path);
  CHECK(invoke({"gaussian-family", "--config", "/nonexistent/x.cfg"}).code == kUsage);
}

TEST_CASE("usage errors") {
  CHECK(invoke({}).code == kUsage);
  CHECK(invoke({"no-such-command"}).code == kUsage);
  CHECK(invoke({"osrb", "--format", "xml"}).code == kUsage);
  CHECK(invoke({"osrb", "--set", "seeds"}).code == kUsage);
  CHECK(invoke({"binary-surface", "--set", "r0_min=2"}).code == kUsage);
  CHECK(invoke({"binary-surface", "--help"}).code == 0);
}

TEST_CASE("binary-surface") {
  const Result r = invoke({"binary-surface"});
  REQUIRE(r.code == 0);
  const auto rows = data_rows(r.out);
  CHECK(rows.size() == 2500);
  CHECK(std::find(rows.begin(), rows.end(), "1,0,1") != rows.end());
  CHECK(r.out.rfind("# srdp " SRDP_VERSION "\n", 0) == 0);
  CHECK(r.out.find("R0,D,R_min\n") != std::string::npos);
  CHECK(r.out.find("# note saving_band_D0.1 = R0 +40% to +87% saves 33.6") != std::string::npos);
  CHECK(invoke({"binary-surface"}).out == r.out);

  const Result small = invoke({"binary-surface", "--set", "r0_points=3", "--set", "d_points=2"});
  const auto s = data_rows(small.out);
  REQUIRE(s.size() == 6);
  CHECK(s[0] == "0,0,inf");  // no common randomness, no distortion
  CHECK(s[5] == "1,0.5,0");

  const Result j = invoke({"binary-surface", "--format", "json", "--set", "r0_points=3",
                           "--set", "d_points=2"});
  const auto doc = nlohmann::json::parse(j.out);
  CHECK(doc["rows"].size() == 6);
  CHECK(doc["rows"][0]["R_min"].is_null());
  CHECK(doc["rows"][5]["R0"] == 1.0);
  CHECK(doc["parameters"]["r0_points"] == "3");
}

TEST_CASE("gaussian-family") {
  const Result r = invoke({"gaussian-family", "--set", "nu_list=0.5,0.2500000001"});
  REQUIRE(r.code == 0);
  const auto rows = data_rows(r.out);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0] == "0.5,0.5,0.5,0.5,0");
  CHECK(fields(rows[1])[4] == "1");
  CHECK(std::stod(fields(rows[1])[3]) > 10.0);

  const Result grid = invoke({"gaussian-family", "--set", "eta=0.3", "--set", "delta=0.8"});
  REQUIRE(grid.code == 0);
  CHECK(data_rows(grid.out).size() == 20);
  CHECK(fields(data_rows(grid.out)[0])[4] == "1");

  const Result bad = invoke({"gaussian-family", "--set", "eta=0.5", "--set", "delta=1.5"});
  CHECK(bad.code == kUsage);
  CHECK(bad.err.find("delta <= 2 - 2|eta|") != std::string::npos);
  CHECK(invoke({"gaussian-family", "--set", "nu_list=0.2"}).code == kUsage);
}

TEST_CASE("region-search") {
  const std::vector<std::string> targets = {"--set", "targets=1,1,0;0.1,0.1,0.05", "--jobs", "2"};
  std::vector<std::string> verdicts[3];
  const char* modes[] = {"noiseless", "si_both", "si_dec"};
  for (int m = 0; m < 3; ++m) {
    auto args = targets;
    args.insert(args.begin(), {"region-search", "--set", std::string("mode=") + modes[m]});
    const Result r = invoke(args);
    REQUIRE(r.code == 0);
    for (const auto& row : data_rows(r.out)) verdicts[m].push_back(fields(row)[3]);
  }
  CHECK(verdicts[0] == std::vector<std::string>{"certified", "not_found"});
  CHECK(verdicts[1] == verdicts[0]);
  CHECK(verdicts[2] == verdicts[0]);

  // witness tables are dumped for certified targets
  const Result j = invoke({"region-search", "--format", "json"});
  const auto doc = nlohmann::json::parse(j.out);
  CHECK(doc["rows"][0]["verdict"] == "certified");
  CHECK(doc["rows"][0]["u_channel"].size() == 2);
  CHECK(doc["rows"][0]["y_channel"][0].size() == 2);

  const Result side = invoke({"region-search", "--set", "mode=si_both", "--set",
                              "side_joint=0.5,0;0,0.5", "--set", "targets=0,0,0"});
  REQUIRE(side.code == 0);
  CHECK(fields(data_rows(side.out)[0])[3] == "certified");
  CHECK(invoke({"region-search", "--set", "mode=si_both", "--set", "side_joint=0.4,0;0,0.6"})
            .code == kUsage);
  CHECK(invoke({"region-search", "--set", "source=0.5,0.6"}).code == kUsage);
  CHECK(invoke({"region-search", "--set", "mode=other"}).code == kUsage);
}

TEST_CASE("bc-tools") {
  const Result deg = invoke({"bc-tools"});
  REQUIRE(deg.code == 0);
  auto row = fields(data_rows(deg.out)[0]);
  CHECK(row[0] == "certified_degraded");
  CHECK(std::abs(std::stod(row[5]) - 0.500084041835) < 1e-9);
  CHECK(row[14] == "1");  // kappa = 1, R = C

  const Result rev = invoke({"bc-tools", "--set", "y_channel=0.7,0.3;0.3,0.7", "--set",
                             "z_channel=0.9,0.1;0.1,0.9"});
  row = fields(data_rows(rev.out)[0]);
  CHECK(row[0] == "violated");
  CHECK_FALSE(row[3].empty());

  const Result over = invoke({"bc-tools", "--set", "rate=0.6"});
  CHECK(fields(data_rows(over.out)[0])[14] == "0");

  const Result point = invoke({"bc-tools", "--set", "w_source=0.5,0.5", "--set",
                               "w_u_channel=0.9,0.1;0.1,0.9", "--set", "w_y_channel=0.9,0.1;0.1,0.9"});
  row = fields(data_rows(point.out)[0]);
  CHECK(std::abs(std::stod(row[7]) - 0.531004406411) < 1e-9);
  CHECK(row[10] == "0.18");

  const Result bad = invoke({"bc-tools", "--set", "y_channel=0.8,0.1;0.1,0.9"});
  CHECK(bad.code == kUsage);
  CHECK(invoke({"bc-tools", "--set", "kappa=0"}).code == kUsage);
}

TEST_CASE("osrb") {
  const Result r = invoke({"osrb", "--jobs", "4"});
  REQUIRE(r.code == 0);
  const auto rows = data_rows(r.out);
  CHECK(rows.size() == 80);
  CHECK(r.out.find("n,eff_R,eff_R0,seed,realism_tv,distortion,leakage_bits,cr_independence_tv,"
                   "fallback_count\n") != std::string::npos);
  CHECK(invoke({"osrb", "--jobs", "1"}).out == r.out);
  CHECK(invoke({"osrb", "--seed", "2", "--set", "n_list=2"}).out !=
        invoke({"osrb", "--set", "n_list=2"}).out);

  const Result single = invoke({"osrb", "--set", "R=0", "--set", "n_list=1,3,5"});
  REQUIRE(single.code == 0);
  for (const auto& row : data_rows(single.out)) CHECK(fields(row)[6] == "0");

  const auto path = temp_file("osrb.csv");
  CHECK(invoke({"osrb", "--set", "n_list=2", "--set", "seeds=2", "--out", path.string()}).code == 0);
  std::ifstream f(path);
  std::stringstream text;
  text << f.rdbuf();
  CHECK(data_rows(text.str()).size() == 2);
  std::filesystem::remove(path);

  setenv("SRDP_ENUM_CAP", "1000", 1);
  const Result capped = invoke({"osrb", "--set", "n_list=12"});
  unsetenv("SRDP_ENUM_CAP");
  CHECK(capped.code == kCapExceeded);
  CHECK(capped.err.find("required memory") != std::string::npos);
  CHECK(invoke({"osrb", "--set", "n_list=2.5"}).code == kUsage);
}
