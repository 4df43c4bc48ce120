#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <sstream>

#include "lambdaband/errors.hpp"
#include "lambdaband/simharness.hpp"

using namespace lambdaband;

namespace {

ExperimentConfig small_tukey() {
  ExperimentConfig c;
  c.experiment = Experiment::TukeyBandComparison;
  c.family = Family::TukeyLambda;
  c.tukey_truth = {-0.5, 0.5};
  c.n_grid = {20, 40};
  c.methods = {"ours-dw", "ours-dkw", "ours-dw-raw", "ours-dkw-raw"};
  c.replications = 40;
  c.mc_reps = 1000;
  return c;
}

std::string csv_of(const ResultTable& t) {
  std::ostringstream out;
  write_csv(t, out);
  return out.str();
}

}  // namespace

TEST_CASE("config parsing") {
  const Json doc = Json::parse(R"({
    "experiment": "gld_shape_region",
    "family": "gld",
    "truth": [{"mu": 0, "sigma": 1, "chi": 0, "xi": 0.3661}],
    "n_grid": [100],
    "methods": ["shape"],
    "alpha": 0.1,
    "replications": 7,
    "master_seed": 99,
    "pairs": "grid:10",
    "grid": "50x60",
    "description": "anything"
  })");
  const ExperimentConfig c = config_from_json(doc);
  CHECK(c.experiment == Experiment::GldShapeRegion);
  CHECK(c.gld_truth.size() == 1);
  CHECK(c.gld_truth[0].xi == 0.3661);
  CHECK(c.n_grid == std::vector<std::size_t>{100});
  CHECK(c.alpha == 0.1);
  CHECK(c.replications == 7);
  CHECK(c.master_seed == 99);
  CHECK(c.pairs == "grid:10");
  CHECK(c.grid.chi_cells == 50);
  CHECK(c.grid.xi_cells == 60);

  const ExperimentConfig d = config_from_json(Json::parse(
      R"({"experiment": "tukey_band_comparison", "truth": [0.5], "n_grid": [10], "replications": 2, "mc_reps": 1000})"));
  CHECK(d.methods.empty());
  const ResultTable defaults = run_experiment(d, 1);
  REQUIRE(defaults.size() == 2);
  CHECK(defaults[0].method == "ours-dw");
  CHECK(defaults[1].method == "ours-dkw");

  auto bad = [](const char* text) { return config_from_json(Json::parse(text)); };
  CHECK_THROWS_AS(bad(R"({"truth": [0.5]})"), std::invalid_argument);
  CHECK_THROWS_AS(bad(R"({"experiment": "nope", "truth": [0.5]})"), std::invalid_argument);
  CHECK_THROWS_AS(bad(R"({"experiment": "tukey_band_comparison", "truth": []})"), std::invalid_argument);
  CHECK_THROWS_AS(bad(R"({"experiment": "tukey_band_comparison", "truth": [0.5], "colour": 1})"), std::invalid_argument);
  CHECK_THROWS_AS(bad(R"({"experiment": "tukey_band_comparison", "truth": [0.5], "methods": ["mu"]})"), std::invalid_argument);
  CHECK_THROWS_AS(bad(R"({"experiment": "tukey_band_comparison", "truth": [0.5], "family": "gld"})"), std::invalid_argument);
  CHECK_THROWS_AS(bad(R"({"experiment": "tukey_band_comparison", "truth": [0.5], "alpha": 2})"), std::invalid_argument);
  CHECK_THROWS_AS(bad(R"({"experiment": "tukey_band_comparison", "truth": [0.5], "n_grid": [1]})"), std::invalid_argument);
  CHECK_THROWS_AS(bad(R"({"experiment": "gld_location_scale", "truth": [{"mu": 0, "sigma": -1, "chi": 0, "xi": 0.5}]})"),
                  std::invalid_argument);
  CHECK_THROWS_AS(bad(R"({"experiment": "gld_location_scale", "truth": [{"mu": 0, "sigma": 1, "chi": 0, "xi": 0.5}], "grid": "10by10"})"),
                  std::invalid_argument);
  CHECK_THROWS_AS(load_config("/nonexistent/config.json"), IoError);
}

TEST_CASE("replication seeds") {
  CHECK(replication_seed(1, 30, 0) == replication_seed(1, 30, 0));
  CHECK(replication_seed(1, 30, 0) != replication_seed(1, 30, 1));
  CHECK(replication_seed(1, 30, 0) != replication_seed(1, 100, 0));
  CHECK(replication_seed(1, 30, 0) != replication_seed(2, 30, 0));
}

TEST_CASE("band comparison table") {
  const ExperimentConfig c = small_tukey();
  const ResultTable t = run_experiment(c, 1);
  REQUIRE(t.size() == 2 * 2 * 4);
  CHECK(t[0].family == "tukey_lambda");
  CHECK(t[0].truth == "lambda=-0.5");
  CHECK(t[0].n == 20);
  CHECK(t[0].method == "ours-dw");
  CHECK(t[5].n == 40);
  CHECK(t[8].truth == "lambda=0.5");
  for (const auto& row : t) {
    CHECK(row.replications == 40);
    CHECK(row.coverage >= 0.0);
    CHECK(row.coverage <= 1.0);
    CHECK(row.infinite_fraction >= 0.0);
    CHECK(row.wall_time_seconds == 0.0);
  }
  CHECK(t[0].coverage >= 0.8);

  CHECK(csv_of(t) == csv_of(run_experiment(c, 1)));
  CHECK(csv_of(t) == csv_of(run_experiment(c, 4)));
}

TEST_CASE("CSV round trip") {
  ResultTable t = run_experiment(small_tukey(), 2);
  t[0].mean_width_or_area = std::nan("");
  t[1].mean_width_or_area = 0.1 + 0.2;
  std::istringstream in(csv_of(t));
  const ResultTable back = parse_results_csv(in);
  REQUIRE(back.size() == t.size());
  CHECK(std::isnan(back[0].mean_width_or_area));
  for (std::size_t i = 1; i < t.size(); ++i) CHECK(back[i] == t[i]);
  CHECK(csv_of(back) == csv_of(t));

  std::istringstream broken(std::string(kResultsHeader) + "\ngld,x,10,mu,0.5\n");
  CHECK_THROWS_AS(parse_results_csv(broken), std::invalid_argument);
}

TEST_CASE("method comparison and baselines") {
  ExperimentConfig c = small_tukey();
  c.experiment = Experiment::TukeyMethodComparison;
  c.methods = {"ours-dw", "lmom-npboot", "qmatch-npboot", "qmatch-pboot"};
  c.tukey_truth = {0.14};
  c.n_grid = {50};
  c.replications = 12;
  c.bootstrap_B = 100;
  const ResultTable t = run_experiment(c, 2);
  REQUIRE(t.size() == 4);
  for (const auto& row : t) CHECK(row.replications == 12);
  CHECK(csv_of(t) == csv_of(run_experiment(c, 1)));

  c.methods = {"lmom-npboot"};
  const ResultTable alone = run_experiment(c, 1);
  REQUIRE(alone.size() == 1);
  CHECK(alone[0] == t[1]);
}

TEST_CASE("GLD location and scale") {
  ExperimentConfig c;
  c.experiment = Experiment::GldLocationScale;
  c.family = Family::GLD;
  c.gld_truth = {{0.0, 1.0, 0.0, 0.3661}, {5.0, 1.0, 0.0, 0.3661}};
  c.n_grid = {100};
  c.methods = {"mu", "sigma"};
  c.replications = 60;
  c.mc_reps = 1000;
  const ResultTable t = run_experiment(c, 2);
  REQUIRE(t.size() == 4);
  CHECK(t[0].family == "gld");
  CHECK(t[0].truth == "mu=0;sigma=1;chi=0;xi=0.3661");
  // A location shift moves samples and intervals together.
  CHECK(t[0].coverage == t[2].coverage);
  CHECK(t[1].coverage == t[3].coverage);
  CHECK(t[0].mean_width_or_area == doctest::Approx(t[2].mean_width_or_area).epsilon(1e-9));
  CHECK(t[1].mean_width_or_area == doctest::Approx(t[3].mean_width_or_area).epsilon(1e-9));
  CHECK(t[0].coverage >= 0.85);
}

TEST_CASE("GLD shape regions") {
  ExperimentConfig c;
  c.experiment = Experiment::GldShapeRegion;
  c.family = Family::GLD;
  c.gld_truth = {{0.0, 1.0, 0.0, 0.3661}};
  c.n_grid = {100, 300};
  c.methods = {"shape", "shape-boot"};
  c.replications = 6;
  c.mc_reps = 1000;
  c.bootstrap_B = 100;
  c.grid = {60, 60};
  const ResultTable t = run_experiment(c, 2);
  REQUIRE(t.size() == 4);
  CHECK(t[0].method == "shape");
  CHECK(t[1].method == "shape-boot");
  CHECK(t[0].mean_width_or_area > t[2].mean_width_or_area);
  CHECK(csv_of(t) == csv_of(run_experiment(c, 1)));

  c.record_timing = true;
  c.methods = {"shape"};
  c.n_grid = {100};
  c.replications = 2;
  CHECK(run_experiment(c, 1)[0].wall_time_seconds > 0.0);
}

TEST_CASE("bundled configs load") {
  for (const char* name : {"fig5", "method_comparison", "gld_location_scale", "gld_shape_region"}) {
    CAPTURE(name);
    const ExperimentConfig c = load_config(std::string(LAMBDABAND_CONFIG_DIR) + "/" + name + ".json");
    CHECK_NOTHROW(c.validate());
  }
}
