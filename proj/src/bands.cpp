#include "lambdaband/bands.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <mutex>
#include <ostream>
#include <stdexcept>
#include <tuple>

#include "lambdaband/errors.hpp"
#include "lambdaband/format.hpp"
#include "lambdaband/parallel.hpp"
#include "lambdaband/random.hpp"

namespace lambdaband {

namespace {

constexpr int kMaxBisection = 200;

double clamp_prob(double t) { return std::clamp(t, kClampDelta, 1.0 - kClampDelta); }

// C + nu D without domain checks, t already clamped.
double penalty_sum(double t, double nu) {
  double c = std::log1p(-std::log(4.0 * t * (1.0 - t)));
  return c + nu * std::log1p(c * c);
}

double penalty_cnu_unchecked(double u, double v, double nu) {
  double a = std::min(u, v);
  double b = std::max(u, v);
  // C + nu D decreases on (0, 1/2] and increases on [1/2, 1).
  if (a <= 0.5 && 0.5 <= b) return 0.0;
  return penalty_sum(b < 0.5 ? b : a, nu);
}

double kl_term(double a, double b) {
  // a log(a / b), with a log(a / b) = 0 when a = 0.
  if (a == 0.0) return 0.0;
  if (b == 0.0) return kInf;
  return a * std::log(a / b);
}

// Smallest value whose empirical CDF reaches 1 - alpha.
double upper_quantile(std::vector<double> values, double alpha) {
  auto rank = static_cast<std::size_t>(std::ceil((1.0 - alpha) * static_cast<double>(values.size())));
  rank = std::clamp<std::size_t>(rank, 1, values.size());
  auto nth = values.begin() + static_cast<std::ptrdiff_t>(rank - 1);
  std::nth_element(values.begin(), nth, values.end());
  return *nth;
}

using CacheKey = std::tuple<std::size_t, double, double, std::size_t, std::uint64_t>;

std::mutex& cache_mutex() {
  static std::mutex m;
  return m;
}

std::map<CacheKey, double>& kappa_cache() {
  static std::map<CacheKey, double> cache;
  return cache;
}

}  // namespace

std::string to_string(BandKind kind) { return kind == BandKind::DKW ? "dkw" : "dw"; }

BandKind parse_band_kind(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "dkw") return BandKind::DKW;
  if (lower == "dw") return BandKind::DW;
  throw std::invalid_argument("unknown band kind '" + std::string(text) + "' (expected dkw or dw)");
}

void BandSpec::validate() const {
  if (n == 0) throw std::invalid_argument("band: n must be positive");
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("band: alpha must lie in (0, 1)");
  if (kind == BandKind::DW) {
    if (!(nu > 0.75) || !std::isfinite(nu)) throw std::invalid_argument("band: nu must exceed 3/4");
    if (mc_reps < 1000) throw std::invalid_argument("band: mc_reps must be at least 1000");
  }
}

double bernoulli_kl(double a, double b) {
  if (!std::isfinite(a) || !std::isfinite(b) || a < 0.0 || a > 1.0 || b < 0.0 || b > 1.0)
    throw DomainError("bernoulli_kl: arguments must lie in [0, 1]");
  if (a == b) return 0.0;
  double value = kl_term(a, b) + kl_term(1.0 - a, 1.0 - b);
  return std::max(value, 0.0);
}

double penalty_c(double t) {
  if (!(t > 0.0 && t < 1.0)) throw DomainError("penalty_c: t must lie in (0, 1)");
  return std::log1p(-std::log(4.0 * t * (1.0 - t)));
}

double penalty_d(double t) {
  double c = penalty_c(t);
  return std::log1p(c * c);
}

double penalty_cnu(double u, double v, double nu) {
  if (!(u > 0.0 && u < 1.0 && v > 0.0 && v < 1.0))
    throw DomainError("penalty_cnu: arguments must lie in (0, 1)");
  return penalty_cnu_unchecked(u, v, nu);
}

double dw_objective(double level, double u, std::size_t n, double nu) {
  return static_cast<double>(n) * bernoulli_kl(level, u) -
         penalty_cnu_unchecked(clamp_prob(level), clamp_prob(u), nu);
}

double dw_statistic(std::span<const double> sorted_probs, double nu) {
  const std::size_t n = sorted_probs.size();
  if (n == 0) throw std::invalid_argument("dw_statistic: empty input");
  for (std::size_t i = 0; i < n; ++i) {
    double p = sorted_probs[i];
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError("dw_statistic: probabilities must lie in [0, 1]");
    if (i > 0 && p < sorted_probs[i - 1])
      throw std::invalid_argument("dw_statistic: input must be sorted");
  }
  const double nd = static_cast<double>(n);
  double best = -kInf;
  // On each gap between order statistics the objective peaks at a gap end, so
  // only the two step values adjacent to each sample point matter.
  for (std::size_t i = 1; i <= n; ++i) {
    double p = sorted_probs[i - 1];
    best = std::max(best, dw_objective(static_cast<double>(i - 1) / nd, p, n, nu));
    best = std::max(best, dw_objective(static_cast<double>(i) / nd, p, n, nu));
  }
  return best;
}

double dw_critical_value(std::size_t n, double alpha, double nu, std::size_t mc_reps,
                         std::uint64_t seed, unsigned threads) {
  BandSpec{n, alpha, BandKind::DW, nu, mc_reps, seed}.validate();
  const CacheKey key{n, alpha, nu, mc_reps, seed};
  {
    std::lock_guard lock(cache_mutex());
    auto it = kappa_cache().find(key);
    if (it != kappa_cache().end()) return it->second;
  }

  std::vector<double> stats(mc_reps);
  parallel_for(mc_reps, threads, [&](std::size_t r) {
    Engine eng(substream_seed(seed, n, r));
    std::vector<double> u(n);
    for (auto& x : u) x = uniform_open(eng);
    std::sort(u.begin(), u.end());
    stats[r] = dw_statistic(u, nu);
  });
  double kappa = upper_quantile(std::move(stats), alpha);

  std::lock_guard lock(cache_mutex());
  kappa_cache().emplace(key, kappa);
  return kappa;
}

double dkw_half_width(std::size_t n, double alpha) {
  return std::sqrt(std::log(2.0 / alpha) / (2.0 * static_cast<double>(n)));
}

ConfidenceBand compute_band(const BandSpec& spec, unsigned threads) {
  spec.validate();
  ConfidenceBand band;
  band.n = spec.n;
  band.alpha = spec.alpha;
  band.kind = spec.kind;
  band.lower.resize(spec.n);
  band.upper.resize(spec.n);
  const double nd = static_cast<double>(spec.n);

  if (spec.kind == BandKind::DKW) {
    const double eps = dkw_half_width(spec.n, spec.alpha);
    for (std::size_t i = 1; i <= spec.n; ++i) {
      double level = static_cast<double>(i) / nd;
      band.lower[i - 1] = std::max(0.0, level - eps);
      band.upper[i - 1] = std::min(1.0, level + eps);
    }
    return band;
  }

  const double kappa = dw_critical_value(spec.n, spec.alpha, spec.nu, spec.mc_reps, spec.seed, threads);
  band.critical_value = kappa;
  const double lo_edge = kClampDelta;
  const double hi_edge = 1.0 - kClampDelta;

  for (std::size_t i = 1; i <= spec.n; ++i) {
    const double level = static_cast<double>(i) / nd;
    auto feasible = [&](double u) { return dw_objective(level, u, spec.n, spec.nu) <= kappa; };

    if (!feasible(level)) {
      // Cannot happen for a critical value of a statistic that includes this term.
      band.lower[i - 1] = band.upper[i - 1] = level;
      continue;
    }

    // The objective grows monotonically as u moves away from level on either
    // side. Bisect to floating-point resolution so the defining equation holds
    // essentially exactly at the returned endpoint.
    if (feasible(lo_edge)) {
      band.lower[i - 1] = 0.0;
    } else {
      double bad = lo_edge, good = level;
      int iter = 0;
      for (; iter < kMaxBisection; ++iter) {
        double mid = bad + 0.5 * (good - bad);
        if (mid <= bad || mid >= good) break;
        (feasible(mid) ? good : bad) = mid;
      }
      if (iter == kMaxBisection) throw ConvergenceError("compute_band: lower bisection did not converge");
      band.lower[i - 1] = good;
    }

    if (level >= hi_edge || feasible(hi_edge)) {
      band.upper[i - 1] = 1.0;
    } else {
      double good = level, bad = hi_edge;
      int iter = 0;
      for (; iter < kMaxBisection; ++iter) {
        double mid = good + 0.5 * (bad - good);
        if (mid <= good || mid >= bad) break;
        (feasible(mid) ? good : bad) = mid;
      }
      if (iter == kMaxBisection) throw ConvergenceError("compute_band: upper bisection did not converge");
      band.upper[i - 1] = good;
    }
  }
  return band;
}

bool band_covers(const ConfidenceBand& band, std::span<const double> sorted_probs) {
  if (sorted_probs.size() != band.n) throw std::invalid_argument("band_covers: length mismatch");
  for (std::size_t i = 0; i < band.n; ++i) {
    if (sorted_probs[i] < band.lower[i] || sorted_probs[i] > band.upper[i]) return false;
  }
  return true;
}

void write_band_csv(const ConfidenceBand& band, std::ostream& out) {
  out << "i,lower,upper\n";
  for (std::size_t i = 0; i < band.n; ++i) {
    out << (i + 1) << ',' << format_double(band.lower[i]) << ',' << format_double(band.upper[i]) << '\n';
  }
}

}  // namespace lambdaband
