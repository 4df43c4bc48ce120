#include "lambdaband/simharness.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <memory>
#include <sstream>
#include <stdexcept>

#include "lambdaband/baselines.hpp"
#include "lambdaband/errors.hpp"
#include "lambdaband/parallel.hpp"
#include "lambdaband/random.hpp"
#include "lambdaband/tukey.hpp"

namespace lambdaband {

namespace {

const std::vector<std::string> kTukeyOurs{"ours-dw", "ours-dkw", "ours-dw-raw", "ours-dkw-raw"};
const std::vector<std::string> kTukeyBaselines{"lmom-npboot", "qmatch-npboot", "qmatch-pboot"};
const std::vector<std::string> kGldLocationScale{"mu", "sigma"};
const std::vector<std::string> kGldShape{"shape", "shape-boot"};

bool contains(const std::vector<std::string>& v, const std::string& s) {
  return std::find(v.begin(), v.end(), s) != v.end();
}

std::string experiment_name(Experiment e) {
  switch (e) {
    case Experiment::TukeyBandComparison: return "tukey_band_comparison";
    case Experiment::TukeyMethodComparison: return "tukey_method_comparison";
    case Experiment::GldLocationScale: return "gld_location_scale";
    case Experiment::GldShapeRegion: return "gld_shape_region";
  }
  return "";
}

Experiment parse_experiment(const std::string& s) {
  for (auto e : {Experiment::TukeyBandComparison, Experiment::TukeyMethodComparison, Experiment::GldLocationScale,
                 Experiment::GldShapeRegion})
    if (experiment_name(e) == s) return e;
  throw std::invalid_argument("config: unknown experiment '" + s + "'");
}

Family family_of(Experiment e) {
  return e == Experiment::TukeyBandComparison || e == Experiment::TukeyMethodComparison ? Family::TukeyLambda
                                                                                        : Family::GLD;
}

std::string family_name(Family f) { return f == Family::TukeyLambda ? "tukey_lambda" : "gld"; }

std::vector<std::string> allowed_methods(Experiment e) {
  switch (e) {
    case Experiment::TukeyBandComparison: return kTukeyOurs;
    case Experiment::TukeyMethodComparison: {
      auto all = kTukeyOurs;
      all.insert(all.end(), kTukeyBaselines.begin(), kTukeyBaselines.end());
      return all;
    }
    case Experiment::GldLocationScale: return kGldLocationScale;
    case Experiment::GldShapeRegion: return kGldShape;
  }
  return {};
}

std::vector<std::string> default_methods(Experiment e) {
  switch (e) {
    case Experiment::TukeyBandComparison: return {"ours-dw", "ours-dkw"};
    case Experiment::TukeyMethodComparison: return {"ours-dw", "lmom-npboot", "qmatch-npboot", "qmatch-pboot"};
    case Experiment::GldLocationScale: return {"mu", "sigma"};
    case Experiment::GldShapeRegion: return {"shape"};
  }
  return {};
}

std::vector<std::string> effective_methods(const ExperimentConfig& c) {
  return c.methods.empty() ? default_methods(c.experiment) : c.methods;
}

// FNV-1a, so per-method seeds do not depend on the standard library's hash.
std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

struct Outcome {
  bool covered = false;
  double size = kInf;  // width or area; +inf when unbounded or failed
  double seconds = 0.0;
};

// Fills one outcome per method for truth index t and replication seed.
using Evaluator = std::function<void(std::size_t t, std::uint64_t seed, std::span<Outcome> out)>;

ResultTable run_grid(const ExperimentConfig& config, const std::vector<std::string>& truth_labels,
                     const std::vector<std::string>& methods, unsigned threads,
                     const std::function<Evaluator(std::size_t n)>& setup) {
  const std::size_t nt = truth_labels.size();
  const std::size_t nm = methods.size();
  const std::size_t reps = config.replications;
  ResultTable table;
  std::vector<std::vector<ResultTable::value_type>> by_truth(nt);

  for (std::size_t n : config.n_grid) {
    const Evaluator eval = setup(n);
    std::vector<Outcome> outcomes(reps * nt * nm);
    parallel_for(reps, threads, [&](std::size_t rep) {
      const std::uint64_t seed = replication_seed(config.master_seed, n, rep);
      for (std::size_t t = 0; t < nt; ++t)
        eval(t, seed, std::span<Outcome>(outcomes.data() + (rep * nt + t) * nm, nm));
    });

    for (std::size_t t = 0; t < nt; ++t) {
      for (std::size_t m = 0; m < nm; ++m) {
        std::size_t covered = 0, finite = 0;
        double sum = 0.0, seconds = 0.0;
        for (std::size_t rep = 0; rep < reps; ++rep) {
          const Outcome& o = outcomes[(rep * nt + t) * nm + m];
          covered += o.covered ? 1 : 0;
          if (std::isfinite(o.size)) {
            sum += o.size;
            ++finite;
          }
          seconds += o.seconds;
        }
        ExperimentResult r;
        r.family = family_name(config.family);
        r.truth = truth_labels[t];
        r.n = n;
        r.method = methods[m];
        r.coverage = static_cast<double>(covered) / static_cast<double>(reps);
        r.mean_width_or_area = finite ? sum / static_cast<double>(finite) : std::numeric_limits<double>::quiet_NaN();
        r.infinite_fraction = static_cast<double>(reps - finite) / static_cast<double>(reps);
        r.replications = reps;
        r.wall_time_seconds = config.record_timing ? seconds : 0.0;
        by_truth[t].push_back(r);
      }
    }
  }
  for (auto& rows : by_truth) table.insert(table.end(), rows.begin(), rows.end());
  return table;
}

template <class Fn>
Outcome timed(bool record, Fn&& fn) {
  if (!record) return fn();
  const auto start = std::chrono::steady_clock::now();
  Outcome o = fn();
  o.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return o;
}

Outcome interval_outcome(const ExtInterval& ci, double truth) {
  return {ci.contains(truth), ci.width(), 0.0};
}

void require_family(const ExperimentConfig& c, Experiment e) {
  c.validate();
  if (c.experiment != e)
    throw std::invalid_argument("config: experiment is " + experiment_name(c.experiment) + ", expected " +
                                experiment_name(e));
}

BandSpec band_spec(const ExperimentConfig& c, std::size_t n, BandKind kind) {
  return BandSpec{n, c.alpha, kind, c.nu, c.mc_reps, c.band_seed};
}

std::string tukey_label(double lambda) { return "lambda=" + format_shortest(lambda); }

std::string gld_label(const CSWParams& p) {
  return "mu=" + format_shortest(p.mu) + ";sigma=" + format_shortest(p.sigma) + ";chi=" + format_shortest(p.chi) +
         ";xi=" + format_shortest(p.xi);
}

ResultTable run_tukey(const ExperimentConfig& config, unsigned threads) {
  const auto methods = effective_methods(config);
  std::vector<std::string> labels;
  for (double l : config.tukey_truth) labels.push_back(tukey_label(l));
  const bool need_dw = std::any_of(methods.begin(), methods.end(), [](const std::string& m) { return m.rfind("ours-dw", 0) == 0; });
  const bool need_dkw = std::any_of(methods.begin(), methods.end(), [](const std::string& m) { return m.rfind("ours-dkw", 0) == 0; });

  return run_grid(config, labels, methods, threads, [&](std::size_t n) -> Evaluator {
    auto dw = std::make_shared<ConfidenceBand>();
    auto dkw = std::make_shared<ConfidenceBand>();
    if (need_dw) *dw = compute_band(band_spec(config, n, BandKind::DW), threads);
    if (need_dkw) *dkw = compute_band(band_spec(config, n, BandKind::DKW), threads);
    return [&config, &methods, dw, dkw, n](std::size_t t, std::uint64_t seed, std::span<Outcome> out) {
      const double truth = config.tukey_truth[t];
      const TukeySample sample = tl_sample(n, truth, seed);
      for (std::size_t m = 0; m < methods.size(); ++m) {
        const std::string& id = methods[m];
        out[m] = timed(config.record_timing, [&]() -> Outcome {
          if (id == "ours-dw") return interval_outcome(tl_ci_abs(sample, *dw), truth);
          if (id == "ours-dkw") return interval_outcome(tl_ci_abs(sample, *dkw), truth);
          if (id == "ours-dw-raw") return interval_outcome(tl_ci_raw(sample, *dw), truth);
          if (id == "ours-dkw-raw") return interval_outcome(tl_ci_raw(sample, *dkw), truth);
          BootstrapSpec spec;
          spec.B = config.bootstrap_B;
          spec.alpha = config.alpha;
          spec.seed = substream_seed(seed, fnv1a(id));
          spec.threads = 1;
          try {
            if (id == "lmom-npboot")
              return interval_outcome(bootstrap_ci(sample.values, lmoment_estimate_tl, spec).interval, truth);
            const Estimator qmatch = [](std::span<const double> x) { return quantile_match_estimate_tl(x); };
            if (id == "qmatch-pboot") spec.kind = BootstrapKind::Parametric;
            return interval_outcome(bootstrap_ci(sample.values, qmatch, spec, tl_quantile).interval, truth);
          } catch (const EstimationError&) {
            return {false, kInf, 0.0};
          }
        });
      }
    };
  });
}

}  // namespace

void ExperimentConfig::validate() const {
  if (replications < 1) throw std::invalid_argument("config: replications must be at least 1");
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("config: alpha must lie in (0, 1)");
  if (n_grid.empty()) throw std::invalid_argument("config: n_grid is empty");
  for (std::size_t n : n_grid)
    if (n < 2) throw std::invalid_argument("config: every n must be at least 2");
  if (family != family_of(experiment)) throw std::invalid_argument("config: family does not match experiment");
  if (family == Family::TukeyLambda && tukey_truth.empty()) throw std::invalid_argument("config: truth is empty");
  if (family == Family::GLD) {
    if (gld_truth.empty()) throw std::invalid_argument("config: truth is empty");
    for (const auto& p : gld_truth) {
      try {
        p.validate();
      } catch (const DomainError& e) {
        throw std::invalid_argument(std::string("config: ") + e.what());
      }
    }
  }
  const auto allowed = allowed_methods(experiment);
  for (const auto& m : methods)
    if (!contains(allowed, m))
      throw std::invalid_argument("config: method '" + m + "' is not valid for " + experiment_name(experiment));
  if (!(nu > 0.75) || !std::isfinite(nu)) throw std::invalid_argument("config: nu must exceed 3/4");
  if (mc_reps < 1000) throw std::invalid_argument("config: mc_reps must be at least 1000");
  if (bootstrap_B < 100) throw std::invalid_argument("config: bootstrap_B must be at least 100");
  if (grid.chi_cells < 2 || grid.xi_cells < 2) throw std::invalid_argument("config: grid needs >= 2 cells per axis");
}

std::uint64_t replication_seed(std::uint64_t master_seed, std::size_t n, std::size_t rep) {
  return substream_seed(master_seed, n, rep);
}

ResultTable run_tukey_band_comparison(const ExperimentConfig& config, unsigned threads) {
  require_family(config, Experiment::TukeyBandComparison);
  return run_tukey(config, threads);
}

ResultTable run_tukey_method_comparison(const ExperimentConfig& config, unsigned threads) {
  require_family(config, Experiment::TukeyMethodComparison);
  return run_tukey(config, threads);
}

ResultTable run_gld_location_scale(const ExperimentConfig& config, unsigned threads) {
  require_family(config, Experiment::GldLocationScale);
  const auto methods = effective_methods(config);
  std::vector<std::string> labels;
  for (const auto& p : config.gld_truth) labels.push_back(gld_label(p));

  return run_grid(config, labels, methods, threads, [&](std::size_t n) -> Evaluator {
    auto band = std::make_shared<ConfidenceBand>(compute_band(band_spec(config, n, config.band), threads));
    return [&config, &methods, band](std::size_t t, std::uint64_t seed, std::span<Outcome> out) {
      const CSWParams& truth = config.gld_truth[t];
      const auto x = gld_sample(band->n, truth, seed);
      for (std::size_t m = 0; m < methods.size(); ++m) {
        out[m] = timed(config.record_timing, [&]() -> Outcome {
          if (methods[m] == "mu") return interval_outcome(quantile_ci(x, *band, 0.5), truth.mu);
          return interval_outcome(qr_ci(x, *band, 0.75, 0.25), truth.sigma);
        });
      }
    };
  });
}

ResultTable run_gld_shape_region(const ExperimentConfig& config, unsigned threads) {
  require_family(config, Experiment::GldShapeRegion);
  const auto methods = effective_methods(config);
  std::vector<std::string> labels;
  for (const auto& p : config.gld_truth) labels.push_back(gld_label(p));

  return run_grid(config, labels, methods, threads, [&](std::size_t n) -> Evaluator {
    auto band = std::make_shared<ConfidenceBand>(compute_band(band_spec(config, n, config.band), threads));
    auto pairs = std::make_shared<PairSet>(parse_pair_spec(config.pairs, n));
    return [&config, &methods, band, pairs](std::size_t t, std::uint64_t seed, std::span<Outcome> out) {
      const CSWParams& truth = config.gld_truth[t];
      const auto x = gld_sample(band->n, truth, seed);
      for (std::size_t m = 0; m < methods.size(); ++m) {
        const std::string& id = methods[m];
        out[m] = timed(config.record_timing, [&]() -> Outcome {
          if (id == "shape") {
            const ShapeRegion region = shape_region(x, *band, *pairs, config.grid, 1);
            return {region.contains_point(truth.chi, truth.xi), region.area, 0.0};
          }
          BootstrapSpec spec;
          spec.B = config.bootstrap_B;
          spec.alpha = config.alpha;
          spec.seed = substream_seed(seed, fnv1a(id));
          try {
            const BootstrapRegion region = bootstrap_shape_region(x, spec);
            return {convex_polygon_contains(region.hull, {truth.chi, truth.xi}), polygon_area(region.hull), 0.0};
          } catch (const EstimationError&) {
            return {false, kInf, 0.0};
          }
        });
      }
    };
  });
}

ResultTable run_experiment(const ExperimentConfig& config, unsigned threads) {
  switch (config.experiment) {
    case Experiment::TukeyBandComparison: return run_tukey_band_comparison(config, threads);
    case Experiment::TukeyMethodComparison: return run_tukey_method_comparison(config, threads);
    case Experiment::GldLocationScale: return run_gld_location_scale(config, threads);
    case Experiment::GldShapeRegion: return run_gld_shape_region(config, threads);
  }
  throw std::invalid_argument("config: unknown experiment");
}

namespace {

ShapeGrid parse_grid(const Json& j) {
  ShapeGrid g;
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    auto x = s.find('x');
    if (x == std::string::npos) throw std::invalid_argument("config: grid must look like 200x200");
    g.chi_cells = std::stoul(s.substr(0, x));
    g.xi_cells = std::stoul(s.substr(x + 1));
    return g;
  }
  if (!j.is_object()) throw std::invalid_argument("config: grid must be a string or an object");
  for (const auto& [key, value] : j.items()) {
    if (key == "chi_cells") g.chi_cells = value.get<std::size_t>();
    else if (key == "xi_cells") g.xi_cells = value.get<std::size_t>();
    else if (key == "chi_lo") g.chi_lo = value.get<double>();
    else if (key == "chi_hi") g.chi_hi = value.get<double>();
    else if (key == "xi_lo") g.xi_lo = value.get<double>();
    else if (key == "xi_hi") g.xi_hi = value.get<double>();
    else throw std::invalid_argument("config: unknown grid field '" + key + "'");
  }
  return g;
}

CSWParams parse_csw(const Json& j) {
  if (!j.is_object()) throw std::invalid_argument("config: GLD truth entries must be objects");
  CSWParams p;
  for (const auto& [key, value] : j.items()) {
    if (key == "mu") p.mu = value.get<double>();
    else if (key == "sigma") p.sigma = value.get<double>();
    else if (key == "chi") p.chi = value.get<double>();
    else if (key == "xi") p.xi = value.get<double>();
    else throw std::invalid_argument("config: unknown truth field '" + key + "'");
  }
  return p;
}

}  // namespace

ExperimentConfig config_from_json(const Json& doc) {
  if (!doc.is_object()) throw std::invalid_argument("config: top level must be an object");
  ExperimentConfig c;
  try {
    if (!doc.contains("experiment")) throw std::invalid_argument("config: missing 'experiment'");
    c.experiment = parse_experiment(doc.at("experiment").get<std::string>());
    c.family = family_of(c.experiment);
    for (const auto& [key, value] : doc.items()) {
      if (key == "experiment") continue;
      if (key == "family") {
        const auto f = value.get<std::string>();
        if (f != family_name(c.family)) throw std::invalid_argument("config: family does not match experiment");
      } else if (key == "truth") {
        if (!value.is_array()) throw std::invalid_argument("config: truth must be an array");
        for (const auto& item : value) {
          if (c.family == Family::TukeyLambda) c.tukey_truth.push_back(item.get<double>());
          else c.gld_truth.push_back(parse_csw(item));
        }
      } else if (key == "n_grid") {
        c.n_grid = value.get<std::vector<std::size_t>>();
      } else if (key == "methods") {
        c.methods = value.get<std::vector<std::string>>();
      } else if (key == "band") {
        c.band = parse_band_kind(value.get<std::string>());
      } else if (key == "alpha") {
        c.alpha = value.get<double>();
      } else if (key == "replications") {
        c.replications = value.get<std::size_t>();
      } else if (key == "master_seed") {
        c.master_seed = value.get<std::uint64_t>();
      } else if (key == "nu") {
        c.nu = value.get<double>();
      } else if (key == "mc_reps") {
        c.mc_reps = value.get<std::size_t>();
      } else if (key == "band_seed") {
        c.band_seed = value.get<std::uint64_t>();
      } else if (key == "bootstrap_B") {
        c.bootstrap_B = value.get<std::size_t>();
      } else if (key == "pairs") {
        c.pairs = value.get<std::string>();
      } else if (key == "grid") {
        c.grid = parse_grid(value);
      } else if (key == "record_timing") {
        c.record_timing = value.get<bool>();
      } else if (key == "description") {
        // free text, ignored
      } else {
        throw std::invalid_argument("config: unknown field '" + key + "'");
      }
    }
  } catch (const Json::exception& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path + "'");
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw std::invalid_argument(std::string("config: invalid JSON: ") + e.what());
  }
  return config_from_json(doc);
}

void write_csv(const ResultTable& table, std::ostream& out) {
  out << kResultsHeader << '\n';
  for (const auto& r : table) {
    out << r.family << ',' << r.truth << ',' << r.n << ',' << r.method << ',' << format_double(r.coverage) << ','
        << format_double(r.mean_width_or_area) << ',' << format_double(r.infinite_fraction) << ','
        << r.replications << ',' << format_double(r.wall_time_seconds) << '\n';
  }
}

void emit_csv(const ResultTable& table, const std::string& path) {
  if (path.empty() || path == "-") {
    write_csv(table, std::cout);
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  write_csv(table, out);
  if (!out) throw IoError("error writing '" + path + "'");
}

namespace {

double parse_double_field(std::string_view s) {
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw std::invalid_argument("results CSV: bad number '" + std::string(s) + "'");
  return v;
}

std::size_t parse_size_field(std::string_view s) {
  std::size_t v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw std::invalid_argument("results CSV: bad integer '" + std::string(s) + "'");
  return v;
}

}  // namespace

ResultTable parse_results_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kResultsHeader) throw std::invalid_argument("results CSV: bad header");
  ResultTable table;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string_view> f;
    std::string_view rest(line);
    for (;;) {
      auto comma = rest.find(',');
      f.push_back(rest.substr(0, comma));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (f.size() != 9) throw std::invalid_argument("results CSV: expected 9 fields");
    ExperimentResult r;
    r.family = std::string(f[0]);
    r.truth = std::string(f[1]);
    r.n = parse_size_field(f[2]);
    r.method = std::string(f[3]);
    r.coverage = parse_double_field(f[4]);
    r.mean_width_or_area = parse_double_field(f[5]);
    r.infinite_fraction = parse_double_field(f[6]);
    r.replications = parse_size_field(f[7]);
    r.wall_time_seconds = parse_double_field(f[8]);
    table.push_back(r);
  }
  return table;
}

}  // namespace lambdaband
