#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "lambdaband/bands.hpp"
#include "lambdaband/format.hpp"
#include "lambdaband/gld.hpp"

namespace lambdaband {

enum class Family { TukeyLambda, GLD };

enum class Experiment {
  TukeyBandComparison,
  TukeyMethodComparison,
  GldLocationScale,
  GldShapeRegion,
};

// Method identifiers.
//   Tukey: ours-dw, ours-dkw (|X| transform), ours-dw-raw, ours-dkw-raw,
//          lmom-npboot, qmatch-npboot, qmatch-pboot
//   GLD:   mu, sigma, shape, shape-boot (bootstrap convex hull)
struct ExperimentConfig {
  Experiment experiment = Experiment::TukeyBandComparison;
  Family family = Family::TukeyLambda;
  std::vector<double> tukey_truth;
  std::vector<CSWParams> gld_truth;
  std::vector<std::size_t> n_grid{30, 100, 300, 1000};
  std::vector<std::string> methods;
  BandKind band = BandKind::DW;  // GLD experiments
  double alpha = 0.05;
  std::size_t replications = 500;
  std::uint64_t master_seed = 1;
  double nu = 1.0;
  std::size_t mc_reps = 10000;
  std::uint64_t band_seed = 0x5eed0001ULL;
  std::size_t bootstrap_B = 1000;
  std::string pairs = "edge:17";
  ShapeGrid grid;
  // Wall time is only written when requested, so default output is byte-stable.
  bool record_timing = false;

  // Throws std::invalid_argument.
  void validate() const;
};

struct ExperimentResult {
  std::string family;
  std::string truth;
  std::size_t n = 0;
  std::string method;
  double coverage = 0.0;
  // Mean over finite widths / areas; NaN when none are finite.
  double mean_width_or_area = 0.0;
  double infinite_fraction = 0.0;
  std::size_t replications = 0;
  double wall_time_seconds = 0.0;

  friend bool operator==(const ExperimentResult&, const ExperimentResult&) = default;
};

using ResultTable = std::vector<ExperimentResult>;

// Parses the JSON config document. Throws std::invalid_argument (including on
// malformed JSON).
ExperimentConfig config_from_json(const Json& doc);
ExperimentConfig load_config(const std::string& path);

ResultTable run_tukey_band_comparison(const ExperimentConfig& config, unsigned threads = 0);
ResultTable run_tukey_method_comparison(const ExperimentConfig& config, unsigned threads = 0);
ResultTable run_gld_location_scale(const ExperimentConfig& config, unsigned threads = 0);
ResultTable run_gld_shape_region(const ExperimentConfig& config, unsigned threads = 0);
ResultTable run_experiment(const ExperimentConfig& config, unsigned threads = 0);

// Per-replication seed; shared by every truth and method at a given (n, rep)
// so that comparisons use common random numbers.
std::uint64_t replication_seed(std::uint64_t master_seed, std::size_t n, std::size_t rep);

inline constexpr const char* kResultsHeader =
    "family,truth,n,method,coverage,mean_width_or_area,infinite_fraction,replications,"
    "wall_time_seconds";

void write_csv(const ResultTable& table, std::ostream& out);
void emit_csv(const ResultTable& table, const std::string& path);
ResultTable parse_results_csv(std::istream& in);

}  // namespace lambdaband
