#include "lambdaband/cli.hpp"

#include <fstream>
#include <ostream>
#include <stdexcept>

#include "CLI11.hpp"

#include "lambdaband/bands.hpp"
#include "lambdaband/baselines.hpp"
#include "lambdaband/data.hpp"
#include "lambdaband/errors.hpp"
#include "lambdaband/format.hpp"
#include "lambdaband/gld.hpp"
#include "lambdaband/simharness.hpp"
#include "lambdaband/tukey.hpp"

namespace lambdaband {

namespace {

constexpr int kExitOk = 0;
constexpr int kExitIo = 1;
constexpr int kExitUsage = 2;
constexpr int kExitEstimation = 3;

struct BandOptions {
  double alpha = 0.05;
  std::string kind = "dw";
  double nu = 1.0;
  std::size_t mc = 10000;
  std::uint64_t seed = 0x5eed0001ULL;
  unsigned threads = 0;

  BandSpec spec(std::size_t n) const { return {n, alpha, parse_band_kind(kind), nu, mc, seed}; }
};

struct DataOptions {
  std::string path;
  std::string format = "auto";
  std::string column = "0";

  DataSource source() const {
    DataSource s;
    s.path = path;
    s.column = column;
    if (format == "auto") s.format = guess_format(path);
    else if (format == "csv") s.format = DataFormat::CSV;
    else s.format = DataFormat::PlainText;
    return s;
  }
};

void add_band_options(CLI::App* cmd, BandOptions& o) {
  cmd->add_option("--alpha", o.alpha, "Miscoverage level in (0, 1)")->capture_default_str();
  cmd->add_option("--kind", o.kind, "Band kind: dw or dkw")->capture_default_str();
  cmd->add_option("--nu", o.nu, "DW penalty weight (> 3/4)")->capture_default_str();
  cmd->add_option("--mc", o.mc, "Monte Carlo replicates for the DW critical value")->capture_default_str();
  cmd->add_option("--seed", o.seed, "Seed for the DW critical value")->capture_default_str();
  cmd->add_option("--threads", o.threads, "Worker threads, 0 for all cores")->capture_default_str();
}

void add_data_options(CLI::App* cmd, DataOptions& o) {
  cmd->add_option("--data", o.path, "Input file")->required();
  cmd->add_option("--format", o.format, "auto, plain or csv")
      ->check(CLI::IsMember({"auto", "plain", "csv"}))
      ->capture_default_str();
  cmd->add_option("--column", o.column, "CSV column name or zero-based index")->capture_default_str();
}

// Data problems (missing file or malformed rows) are input errors.
std::vector<double> read_data(const DataOptions& o) {
  try {
    return load_data(o.source());
  } catch (const std::invalid_argument& e) {
    throw IoError(e.what());
  }
}

Json header(const std::string& command) {
  Json j = Json::object();
  j["schema"] = 1;
  j["command"] = command;
  return j;
}

void emit(const Json& j, std::ostream& out) {
  write_json(j, out);
  out << '\n';
}

int cmd_band(std::size_t n, const BandOptions& o, const std::string& out_path, std::ostream& out) {
  const ConfidenceBand band = compute_band(o.spec(n), o.threads);
  if (out_path.empty() || out_path == "-") {
    write_band_csv(band, out);
    return kExitOk;
  }
  std::ofstream file(out_path, std::ios::binary);
  if (!file) throw IoError("cannot write '" + out_path + "'");
  write_band_csv(band, file);
  if (!file) throw IoError("error writing '" + out_path + "'");
  return kExitOk;
}

int cmd_tl_ci(const DataOptions& d, const BandOptions& o, const std::string& transform, std::ostream& out) {
  BandSpec spec = o.spec(1);
  spec.validate();
  const TukeySample sample = TukeySample::from_values(read_data(d));
  spec.n = sample.size();
  const ConfidenceBand band = compute_band(spec, o.threads);
  const ExtInterval ci = transform == "raw" ? tl_ci_raw(sample, band) : tl_ci_abs(sample, band);
  Json j = header("tl-ci");
  j["n"] = sample.size();
  j["alpha"] = o.alpha;
  j["band"] = to_string(spec.kind);
  j["transform"] = transform;
  j["lambda"] = interval_json(ci);
  emit(j, out);
  return kExitOk;
}

ShapeGrid parse_grid_flag(const std::string& text) {
  auto x = text.find('x');
  if (x == std::string::npos) throw std::invalid_argument("--grid must look like 200x200");
  std::size_t used = 0;
  ShapeGrid g;
  try {
    g.chi_cells = std::stoul(text.substr(0, x), &used);
    if (used != x) throw std::invalid_argument("");
    g.xi_cells = std::stoul(text.substr(x + 1), &used);
    if (used != text.size() - x - 1) throw std::invalid_argument("");
  } catch (const std::logic_error&) {
    throw std::invalid_argument("--grid must look like 200x200");
  }
  return g;
}

int cmd_gld_ci(const DataOptions& d, const BandOptions& o, const std::vector<std::string>& targets,
               const std::string& pairs_spec, const std::string& grid_text, const std::string& region_out,
               std::ostream& out) {
  BandSpec spec = o.spec(1);
  spec.validate();
  const ShapeGrid grid = parse_grid_flag(grid_text);
  std::vector<double> x = read_data(d);
  std::sort(x.begin(), x.end());
  spec.n = x.size();
  const ConfidenceBand band = compute_band(spec, o.threads);

  Json j = header("gld-ci");
  j["n"] = x.size();
  j["alpha"] = o.alpha;
  j["band"] = to_string(spec.kind);
  for (const auto& t : targets) {
    if (t == "mu") {
      j["mu"] = interval_json(quantile_ci(x, band, 0.5));
    } else if (t == "sigma") {
      j["sigma"] = interval_json(qr_ci(x, band, 0.75, 0.25));
    } else {
      const PairSet pairs = parse_pair_spec(pairs_spec, x.size());
      const ShapeRegion region = shape_region(x, band, pairs, grid, o.threads);
      Json s = Json::object();
      s["pairs"] = pairs_spec;
      s["pair_count"] = pairs.size();
      s["grid"] = grid_text;
      s["cells_inside"] = region.count();
      s["area"] = region.area;
      if (!region_out.empty()) {
        std::ofstream file(region_out, std::ios::binary);
        if (!file) throw IoError("cannot write '" + region_out + "'");
        write_region_csv(region, file);
        if (!file) throw IoError("error writing '" + region_out + "'");
        s["region_csv"] = region_out;
      }
      j["shape"] = s;
    }
  }
  emit(j, out);
  return kExitOk;
}

struct EstimateOptions {
  std::string method;
  std::string bootstrap = "none";
  std::size_t B = 1000;
  double alpha = 0.05;
  std::uint64_t seed = 1;
  unsigned threads = 1;
};

int cmd_estimate(const DataOptions& d, const EstimateOptions& o, std::ostream& out) {
  BootstrapSpec spec;
  spec.B = o.B;
  spec.alpha = o.alpha;
  spec.seed = o.seed;
  spec.threads = o.threads;
  spec.kind = o.bootstrap == "parametric" ? BootstrapKind::Parametric : BootstrapKind::Nonparametric;
  if (o.bootstrap != "none") spec.validate();
  const std::vector<double> x = read_data(d);

  Json j = header("estimate");
  j["method"] = o.method;
  j["n"] = x.size();
  try {
    if (o.method == "csw") {
      const PointEstimateCSW e = csw_point_estimates(x);
      j["mu"] = e.mu_hat;
      j["sigma"] = e.sigma_hat;
      j["chi"] = e.chi_hat;
      j["xi"] = e.xi_hat;
      j["s_hat"] = e.s_hat;
      j["kappa_hat"] = e.kappa_hat;
      j["residual"] = e.residual;
      j["converged"] = e.converged;
      if (o.bootstrap != "none") {
        const BootstrapRegion r = bootstrap_shape_region(x, spec);
        Json b = Json::object();
        b["kind"] = o.bootstrap;
        b["B"] = o.B;
        b["alpha"] = o.alpha;
        Json hull = Json::array();
        for (const auto& p : r.hull) hull.push_back(Json::array({p.x, p.y}));
        b["hull"] = hull;
        b["median"] = Json::array({r.median.x, r.median.y});
        b["area"] = polygon_area(r.hull);
        b["retained"] = r.retained;
        b["failures"] = r.failures;
        j["bootstrap"] = b;
      }
    } else {
      Estimator est;
      if (o.method == "lmom") est = lmoment_estimate_tl;
      else est = [](std::span<const double> s) { return quantile_match_estimate_tl(s); };
      j["lambda"] = est(x);
      if (o.bootstrap != "none") {
        const BootstrapResult r = bootstrap_ci(x, est, spec, tl_quantile);
        Json b = Json::object();
        b["kind"] = o.bootstrap;
        b["B"] = o.B;
        b["alpha"] = o.alpha;
        b["interval"] = interval_json(r.interval);
        b["failures"] = r.failures;
        j["bootstrap"] = b;
      }
    }
  } catch (const EstimationError& e) {
    Json f = header("estimate");
    f["method"] = o.method;
    f["error"] = "estimation_failure";
    f["message"] = e.what();
    emit(f, out);
    return kExitEstimation;
  }
  emit(j, out);
  return kExitOk;
}

int cmd_simulate(const std::string& config_path, const std::string& out_path, unsigned threads,
                 std::ostream& out) {
  const ExperimentConfig config = load_config(config_path);
  const ResultTable table = run_experiment(config, threads);
  if (out_path.empty() || out_path == "-") {
    write_csv(table, out);
    return kExitOk;
  }
  emit_csv(table, out_path);
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Distribution-free confidence sets for quantile-defined families", "lambdaband"};
  app.require_subcommand(1);

  std::size_t band_n = 0;
  BandOptions band_opts;
  std::string band_out;
  auto* band_cmd = app.add_subcommand("band", "Compute a DKW or DW confidence band");
  band_cmd->add_option("--n", band_n, "Sample size")->required();
  add_band_options(band_cmd, band_opts);
  band_cmd->add_option("--out", band_out, "Output CSV path (stdout if omitted)");

  DataOptions tl_data;
  BandOptions tl_band;
  std::string transform = "abs";
  auto* tl_cmd = app.add_subcommand("tl-ci", "Confidence set for the Tukey Lambda shape");
  add_data_options(tl_cmd, tl_data);
  add_band_options(tl_cmd, tl_band);
  tl_cmd->add_option("--transform", transform, "raw or abs")
      ->check(CLI::IsMember({"raw", "abs"}))
      ->capture_default_str();

  DataOptions gld_data;
  BandOptions gld_band;
  std::vector<std::string> targets{"mu", "sigma"};
  std::string pairs = "edge:17";
  std::string grid = "200x200";
  std::string region_out;
  auto* gld_cmd = app.add_subcommand("gld-ci", "Confidence sets for GLD median, IQR and shape");
  add_data_options(gld_cmd, gld_data);
  add_band_options(gld_cmd, gld_band);
  gld_cmd->add_option("--targets", targets, "Comma-separated subset of mu,sigma,shape")
      ->delimiter(',')
      ->check(CLI::IsMember({"mu", "sigma", "shape"}))
      ->capture_default_str();
  gld_cmd->add_option("--pairs", pairs, "rw, grid:K or edge:K")->capture_default_str();
  gld_cmd->add_option("--grid", grid, "Shape grid resolution, e.g. 200x200")->capture_default_str();
  gld_cmd->add_option("--region-out", region_out, "Write the shape region as chi,xi,inside CSV");

  DataOptions est_data;
  EstimateOptions est;
  auto* est_cmd = app.add_subcommand("estimate", "Point estimates and bootstrap inference");
  add_data_options(est_cmd, est_data);
  est_cmd->add_option("--method", est.method, "lmom, qmatch or csw")
      ->required()
      ->check(CLI::IsMember({"lmom", "qmatch", "csw"}));
  est_cmd->add_option("--bootstrap", est.bootstrap, "none, parametric or nonparametric")
      ->check(CLI::IsMember({"none", "parametric", "nonparametric"}))
      ->capture_default_str();
  est_cmd->add_option("--B", est.B, "Bootstrap replicates")->capture_default_str();
  est_cmd->add_option("--alpha", est.alpha, "Miscoverage level")->capture_default_str();
  est_cmd->add_option("--seed", est.seed, "Bootstrap seed")->capture_default_str();
  est_cmd->add_option("--threads", est.threads, "Worker threads, 0 for all cores")->capture_default_str();

  std::string config_path;
  std::string sim_out;
  unsigned sim_threads = 0;
  auto* sim_cmd = app.add_subcommand("simulate", "Run a Monte Carlo experiment from a JSON config");
  sim_cmd->add_option("--config", config_path, "Experiment config (JSON)")->required();
  sim_cmd->add_option("--out", sim_out, "Output CSV path (stdout if omitted)");
  sim_cmd->add_option("--threads", sim_threads, "Worker threads, 0 for all cores")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*band_cmd) return cmd_band(band_n, band_opts, band_out, out);
    if (*tl_cmd) return cmd_tl_ci(tl_data, tl_band, transform, out);
    if (*gld_cmd) return cmd_gld_ci(gld_data, gld_band, targets, pairs, grid, region_out, out);
    if (*est_cmd) return cmd_estimate(est_data, est, out);
    if (*sim_cmd) return cmd_simulate(config_path, sim_out, sim_threads, out);
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::logic_error& e) {
    // std::invalid_argument and DomainError: bad flags or config.
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::runtime_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitEstimation;
  }
  return kExitUsage;
}

}  // namespace lambdaband
