#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "lambdaband/cli.hpp"
#include "lambdaband/data.hpp"
#include "lambdaband/errors.hpp"
#include "lambdaband/gld.hpp"
#include "lambdaband/tukey.hpp"

namespace fs = std::filesystem;
using namespace lambdaband;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "lambdaband");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch() {
  const fs::path dir = fs::temp_directory_path() / "lambdaband_cli_test";
  fs::create_directories(dir);
  return dir;
}

std::string write_values(const std::string& name, const std::vector<double>& x, bool csv = false) {
  const fs::path p = scratch() / name;
  std::ofstream f(p);
  f.precision(17);
  if (csv) f << "id,value\n";
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (csv) f << i << ',';
    f << x[i] << '\n';
  }
  return p.string();
}

std::string write_text(const std::string& name, const std::string& text) {
  const fs::path p = scratch() / name;
  std::ofstream(p) << text;
  return p.string();
}

}  // namespace

TEST_CASE("exit codes") {
  CHECK(run({"--help"}).code == 0);
  CHECK(run({}).code == 2);
  CHECK(run({"band", "--n", "10", "--bogus"}).code == 2);
  CHECK(run({"band", "--n", "10", "--alpha", "1.5"}).code == 2);
  CHECK(run({"band", "--n", "10", "--kind", "ks"}).code == 2);
  CHECK(run({"tl-ci", "--data", "/nonexistent/data.txt"}).code == 1);
  CHECK(run({"tl-ci", "--data", write_text("bad.txt", "1\n2\nabc\n")}).code == 1);
  CHECK(run({"simulate", "--config", write_text("bad.json", "{not json")}).code == 2);
  CHECK(run({"simulate", "--config", "/nonexistent/config.json"}).code == 1);

  const Run fail = run({"estimate", "--data", write_text("flat.txt", "2\n2\n2\n2\n"), "--method", "lmom"});
  CHECK(fail.code == 3);
  const auto j = nlohmann::json::parse(fail.out);
  CHECK(j["error"] == "estimation_failure");
}

TEST_CASE("band output") {
  const Run dkw = run({"band", "--n", "100", "--kind", "dkw"});
  REQUIRE(dkw.code == 0);
  std::istringstream in(dkw.out);
  std::string line;
  std::getline(in, line);
  CHECK(line == "i,lower,upper");
  for (int i = 0; i < 50; ++i) std::getline(in, line);
  // Row 50 of the DKW band at alpha 0.05.
  const auto c1 = line.find(','), c2 = line.rfind(',');
  const double lo = std::stod(line.substr(c1 + 1, c2 - c1 - 1)), hi = std::stod(line.substr(c2 + 1));
  CHECK(std::fabs((hi - lo) / 2 - std::sqrt(std::log(40.0) / 200.0)) <= 1e-12);

  const Run a = run({"band", "--n", "30", "--mc", "1000", "--threads", "1"});
  const Run b = run({"band", "--n", "30", "--mc", "1000", "--threads", "3"});
  CHECK(a.code == 0);
  CHECK(a.out == b.out);

  const std::string path = (scratch() / "band.csv").string();
  CHECK(run({"band", "--n", "30", "--mc", "1000", "--out", path}).code == 0);
  std::ifstream f(path);
  std::stringstream ss;
  ss << f.rdbuf();
  CHECK(ss.str() == a.out);
}

TEST_CASE("tl-ci") {
  const auto s = tl_sample(200, 0.5, 3);
  const std::string data = write_values("tl.txt", s.values);
  const Run r = run({"tl-ci", "--data", data, "--mc", "1000"});
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["schema"] == 1);
  CHECK(j["command"] == "tl-ci");
  CHECK(j["n"] == 200);
  CHECK(j["transform"] == "abs");
  CHECK(j["lambda"]["empty"] == false);
  CHECK(j["lambda"]["lower"].get<double>() <= 0.5);
  CHECK(j["lambda"]["upper"].get<double>() >= 0.5);

  const Run raw = run({"tl-ci", "--data", write_values("tl.csv", s.values, true), "--column", "value", "--mc", "1000",
                       "--transform", "raw"});
  REQUIRE(raw.code == 0);
  CHECK(nlohmann::json::parse(raw.out)["transform"] == "raw");
  CHECK(run({"tl-ci", "--data", data, "--transform", "log"}).code == 2);
}

TEST_CASE("gld-ci") {
  const auto x = gld_sample(300, {1.0, 2.0, 0.0, 0.3661}, 4);
  const std::string data = write_values("gld.txt", x);
  const Run r = run({"gld-ci", "--data", data, "--mc", "1000"});
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["mu"]["lower"].get<double>() <= 1.0);
  CHECK(j["mu"]["upper"].get<double>() >= 1.0);
  CHECK(j["sigma"]["lower"].get<double>() >= 0.0);
  CHECK(!j.contains("shape"));

  const std::string region = (scratch() / "region.csv").string();
  const Run s = run({"gld-ci", "--data", data, "--mc", "1000", "--targets", "shape", "--grid", "20x30", "--region-out",
                     region});
  REQUIRE(s.code == 0);
  const auto js = nlohmann::json::parse(s.out);
  CHECK(js["shape"]["pair_count"] == 58);
  CHECK(!js.contains("mu"));
  std::ifstream f(region);
  std::string line;
  std::size_t lines = 0;
  while (std::getline(f, line)) ++lines;
  CHECK(lines == 601);

  CHECK(run({"gld-ci", "--data", data, "--targets", "kurtosis"}).code == 2);
  CHECK(run({"gld-ci", "--data", data, "--targets", "shape", "--grid", "20by30"}).code == 2);
  CHECK(run({"gld-ci", "--data", data, "--targets", "shape", "--pairs", "ring"}).code == 2);
}

TEST_CASE("estimate") {
  const auto s = tl_sample(300, 1.0, 5);
  const std::string data = write_values("est.txt", s.values);
  const Run q = run({"estimate", "--data", data, "--method", "qmatch", "--bootstrap", "parametric", "--B", "200"});
  REQUIRE(q.code == 0);
  const auto j = nlohmann::json::parse(q.out);
  CHECK(std::fabs(j["lambda"].get<double>() - 1.0) <= 0.5);
  CHECK(j["bootstrap"]["interval"]["empty"] == false);

  const auto g = gld_sample(500, {0.0, 1.0, 0.3, 0.4}, 6);
  const Run c = run({"estimate", "--data", write_values("csw.txt", g), "--method", "csw", "--bootstrap", "nonparametric",
                     "--B", "100"});
  REQUIRE(c.code == 0);
  const auto jc = nlohmann::json::parse(c.out);
  CHECK(jc["converged"] == true);
  CHECK(jc["bootstrap"]["hull"].size() >= 3);
  CHECK(run({"estimate", "--data", data, "--method", "mle"}).code == 2);
  CHECK(run({"estimate", "--data", data, "--method", "lmom", "--bootstrap", "parametric", "--B", "10"}).code == 2);
}

TEST_CASE("simulate output is independent of thread count") {
  const std::string config = write_text("sim.json", R"({
    "experiment": "tukey_band_comparison",
    "truth": [-1, 0.5],
    "n_grid": [20, 50],
    "methods": ["ours-dw", "ours-dkw-raw"],
    "replications": 30,
    "mc_reps": 1000
  })");
  const Run a = run({"simulate", "--config", config, "--threads", "1"});
  const Run b = run({"simulate", "--config", config, "--threads", "8"});
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
  CHECK(std::count(a.out.begin(), a.out.end(), '\n') == 9);

  const std::string out = (scratch() / "sim.csv").string();
  CHECK(run({"simulate", "--config", config, "--out", out}).code == 0);
  std::ifstream f(out);
  std::stringstream ss;
  ss << f.rdbuf();
  CHECK(ss.str() == a.out);
}
