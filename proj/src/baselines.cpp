#include "lambdaband/baselines.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "lambdaband/errors.hpp"
#include "lambdaband/gld.hpp"
#include "lambdaband/parallel.hpp"
#include "lambdaband/random.hpp"
#include "lambdaband/tukey.hpp"

namespace lambdaband {

namespace {

std::vector<double> sorted_copy(std::span<const double> sample) {
  std::vector<double> v(sample.begin(), sample.end());
  std::sort(v.begin(), v.end());
  return v;
}

// lambda with Q(p, lambda) = target for p > 1/2 and target > 0. Q(p, .) falls
// from +inf to 0 as lambda increases.
double solve_upper_quantile(double p, double target) {
  auto too_big = [&](double lam) { return tl_quantile(p, lam) > target; };
  double lo = -1.0, hi = 1.0;
  for (int k = 0; !too_big(lo); ++k) {
    hi = lo;
    lo *= 2.0;
    if (k > 64) throw EstimationError("quantile matching: no bracket");
  }
  for (int k = 0; too_big(hi); ++k) {
    lo = hi;
    hi *= 2.0;
    if (k > 64) throw EstimationError("quantile matching: no bracket");
  }
  for (int iter = 0; iter < 200; ++iter) {
    double mid = lo + 0.5 * (hi - lo);
    if (mid <= lo || mid >= hi) break;
    (too_big(mid) ? lo : hi) = mid;
  }
  return lo + 0.5 * (hi - lo);
}

struct ShapeRatios {
  double s;
  double kappa;
};

ShapeRatios ratios_at(double chi, double xi) {
  auto [l3, l4] = shape_to_lambdas(chi, xi);
  std::array<double, 7> s{};
  for (int k = 1; k <= 7; ++k) s[k - 1] = s_basis(k / 8.0, l3, l4);
  // s[k - 1] = S(k / 8)
  const double iqr = s[5] - s[1];
  return {(s[5] + s[1] - 2.0 * s[3]) / iqr, (s[6] - s[4] + s[2] - s[0]) / (s[5] - s[1])};
}

constexpr std::size_t kInitCells = 101;

struct InitTable {
  std::vector<double> chi;
  std::vector<double> xi;
  std::vector<ShapeRatios> values;
};

const InitTable& init_table() {
  static const InitTable table = [] {
    InitTable t;
    for (std::size_t k = 0; k < kInitCells; ++k) {
      t.chi.push_back(-1.0 + (static_cast<double>(k) + 0.5) * 2.0 / kInitCells);
      t.xi.push_back((static_cast<double>(k) + 0.5) / kInitCells);
    }
    for (double c : t.chi)
      for (double x : t.xi) t.values.push_back(ratios_at(c, x));
    return t;
  }();
  return table;
}

double residual_norm(const ShapeRatios& r, double s_hat, double kappa_hat) {
  double v = std::hypot(r.s - s_hat, r.kappa - kappa_hat);
  return std::isfinite(v) ? v : kInf;
}

constexpr double kChiEdge = 1.0 - 1e-9;
constexpr double kXiEdge = 1e-9;

double clamp_chi(double c) { return std::clamp(c, -kChiEdge, kChiEdge); }
double clamp_xi(double x) { return std::clamp(x, kXiEdge, 1.0 - kXiEdge); }

struct Fit {
  double chi;
  double xi;
  double residual;
};

Fit solve_shape(double s_hat, double kappa_hat) {
  const InitTable& table = init_table();
  Fit best{0.0, 0.5, kInf};
  for (std::size_t g = 0; g < kInitCells; ++g) {
    for (std::size_t h = 0; h < kInitCells; ++h) {
      double r = residual_norm(table.values[g * kInitCells + h], s_hat, kappa_hat);
      if (r < best.residual) best = {table.chi[g], table.xi[h], r};
    }
  }
  auto eval = [&](double c, double x) { return residual_norm(ratios_at(c, x), s_hat, kappa_hat); };

  // Damped Newton on the 2x2 system with a forward-difference Jacobian.
  for (int iter = 0; iter < 100 && best.residual > 1e-14; ++iter) {
    const ShapeRatios f = ratios_at(best.chi, best.xi);
    const double fs = f.s - s_hat;
    const double fk = f.kappa - kappa_hat;
    const double step = 1e-7;
    const double dc = best.chi + step < kChiEdge ? step : -step;
    const double dx = best.xi + step < 1.0 - kXiEdge ? step : -step;
    const ShapeRatios fc = ratios_at(best.chi + dc, best.xi);
    const ShapeRatios fx = ratios_at(best.chi, best.xi + dx);
    const double j11 = (fc.s - f.s) / dc, j12 = (fx.s - f.s) / dx;
    const double j21 = (fc.kappa - f.kappa) / dc, j22 = (fx.kappa - f.kappa) / dx;
    const double det = j11 * j22 - j12 * j21;
    if (!std::isfinite(det) || det == 0.0) break;
    double delta_c = -(j22 * fs - j12 * fk) / det;
    double delta_x = -(-j21 * fs + j11 * fk) / det;
    bool improved = false;
    for (double t = 1.0; t > 1e-6; t *= 0.5) {
      double c = clamp_chi(best.chi + t * delta_c);
      double x = clamp_xi(best.xi + t * delta_x);
      double r = eval(c, x);
      if (r < best.residual) {
        best = {c, x, r};
        improved = true;
        break;
      }
    }
    if (!improved) break;
  }

  // Compass search as a fallback when Newton stalls away from a root.
  if (best.residual > 1e-10) {
    for (double h = 2.0 / kInitCells; h >= 1e-10; ) {
      bool moved = false;
      const std::array<std::pair<double, double>, 4> dirs{{{h, 0.0}, {-h, 0.0}, {0.0, h}, {0.0, -h}}};
      for (auto [a, b] : dirs) {
        double c = clamp_chi(best.chi + a);
        double x = clamp_xi(best.xi + b);
        double r = eval(c, x);
        if (r < best.residual) {
          best = {c, x, r};
          moved = true;
        }
      }
      if (!moved) h *= 0.5;
    }
  }
  return best;
}

}  // namespace

double sample_quantile(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw std::invalid_argument("sample_quantile: empty sample");
  if (!(q >= 0.0 && q <= 1.0)) throw DomainError("sample_quantile: q must lie in [0, 1]");
  const double h = static_cast<double>(sorted.size() - 1) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= sorted.size()) return sorted.back();
  const double frac = h - static_cast<double>(lo);
  if (frac == 0.0) return sorted[lo];
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

double lmoment_estimate_tl(std::span<const double> sample) {
  const std::size_t n = sample.size();
  if (n < 2) throw EstimationError("lmoment_estimate_tl: need at least two observations");
  const auto x = sorted_copy(sample);
  const double nd = static_cast<double>(n);
  double b0 = 0.0, b1 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    b0 += x[i];
    b1 += static_cast<double>(i) / (nd - 1.0) * x[i];
  }
  b0 /= nd;
  b1 /= nd;
  const double l2 = 2.0 * b1 - b0;
  if (!(l2 > 0.0) || !std::isfinite(l2)) throw EstimationError("lmoment_estimate_tl: degenerate sample (L-scale <= 0)");
  return 0.5 * (-3.0 + std::sqrt(1.0 + 8.0 / l2));
}

std::vector<double> default_qmatch_probs() {
  std::vector<double> p;
  for (int k = 1; k <= 9; ++k)
    if (k != 5) p.push_back(k / 10.0);
  return p;
}

double quantile_match_estimate_tl(std::span<const double> sample, std::span<const double> probs) {
  if (sample.empty()) throw EstimationError("quantile_match_estimate_tl: empty sample");
  for (double p : probs)
    if (!(p > 0.0 && p < 1.0) || p == 0.5)
      throw std::invalid_argument("quantile_match_estimate_tl: probs must lie in (0, 1) without 1/2");
  const auto x = sorted_copy(sample);
  double sum = 0.0;
  std::size_t used = 0;
  for (double p : probs) {
    const double target = sample_quantile(x, p);
    if (!std::isfinite(target)) continue;
    double lam;
    if (p > 0.5) {
      if (!(target > 0.0)) continue;
      lam = solve_upper_quantile(p, target);
    } else {
      if (!(target < 0.0)) continue;
      lam = solve_upper_quantile(1.0 - p, -target);
    }
    sum += lam;
    ++used;
  }
  if (used == 0) throw EstimationError("quantile_match_estimate_tl: no probability level is solvable");
  return sum / static_cast<double>(used);
}

double quantile_match_estimate_tl(std::span<const double> sample) {
  const auto probs = default_qmatch_probs();
  return quantile_match_estimate_tl(sample, probs);
}

void BootstrapSpec::validate() const {
  if (B < 100) throw std::invalid_argument("bootstrap: B must be at least 100");
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("bootstrap: alpha must lie in (0, 1)");
}

namespace {

// Replicate b of the sample, drawn from its own substream.
std::vector<double> resample(std::span<const double> sample, std::size_t b, const BootstrapSpec& spec,
                             const std::function<double(double)>& quantile) {
  Engine eng(substream_seed(spec.seed, b));
  std::vector<double> out(sample.size());
  if (spec.kind == BootstrapKind::Nonparametric) {
    std::uniform_int_distribution<std::size_t> pick(0, sample.size() - 1);
    for (auto& v : out) v = sample[pick(eng)];
  } else {
    for (auto& v : out) v = quantile(uniform_open(eng));
  }
  return out;
}

void check_failures(std::size_t failures, std::size_t B) {
  if (5 * failures > B) throw EstimationError("bootstrap: more than 20% of replicates failed");
}

}  // namespace

BootstrapResult bootstrap_ci(std::span<const double> sample, const Estimator& estimator,
                             const BootstrapSpec& spec, const ParametricQuantile& model) {
  spec.validate();
  if (sample.empty()) throw std::invalid_argument("bootstrap_ci: empty sample");
  if (spec.kind == BootstrapKind::Parametric && !model)
    throw std::invalid_argument("bootstrap_ci: parametric bootstrap needs a model quantile function");

  BootstrapResult result;
  result.estimate = estimator(sample);
  const double theta = result.estimate;
  const std::function<double(double)> quantile = [&](double u) { return model(u, theta); };

  std::vector<double> reps(spec.B, std::numeric_limits<double>::quiet_NaN());
  parallel_for(spec.B, spec.threads, [&](std::size_t b) {
    const auto x = resample(sample, b, spec, quantile);
    try {
      reps[b] = estimator(x);
    } catch (const EstimationError&) {
    }
  });

  std::vector<double> ok;
  ok.reserve(spec.B);
  for (double v : reps)
    if (std::isfinite(v)) ok.push_back(v);
  result.failures = spec.B - ok.size();
  check_failures(result.failures, spec.B);
  std::sort(ok.begin(), ok.end());
  result.interval = ExtInterval::between(sample_quantile(ok, spec.alpha / 2.0), sample_quantile(ok, 1.0 - spec.alpha / 2.0));
  return result;
}

double csw_skewness_ratio(double chi, double xi) { return ratios_at(chi, xi).s; }
double csw_kurtosis_ratio(double chi, double xi) { return ratios_at(chi, xi).kappa; }

PointEstimateCSW csw_point_estimates(std::span<const double> sample) {
  if (sample.size() < 8) throw EstimationError("csw_point_estimates: need at least 8 observations");
  const auto x = sorted_copy(sample);
  std::array<double, 7> pi{};
  for (int k = 1; k <= 7; ++k) pi[k - 1] = sample_quantile(x, k / 8.0);
  const double iqr = pi[5] - pi[1];
  if (!(iqr > 0.0) || !std::isfinite(iqr)) throw EstimationError("csw_point_estimates: zero interquartile range");

  PointEstimateCSW est;
  est.mu_hat = pi[3];
  est.sigma_hat = iqr;
  est.s_hat = (pi[5] + pi[1] - 2.0 * pi[3]) / iqr;
  est.kappa_hat = (pi[6] - pi[4] + pi[2] - pi[0]) / iqr;
  const Fit fit = solve_shape(est.s_hat, est.kappa_hat);
  est.chi_hat = fit.chi;
  est.xi_hat = fit.xi;
  est.residual = fit.residual;
  est.converged = fit.residual <= 1e-6;
  return est;
}

namespace {

double cross(const Point2& o, const Point2& a, const Point2& b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

}  // namespace

std::vector<Point2> convex_hull_2d(std::span<const Point2> points) {
  std::vector<Point2> p(points.begin(), points.end());
  std::sort(p.begin(), p.end(), [](const Point2& a, const Point2& b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
  p.erase(std::unique(p.begin(), p.end()), p.end());
  if (p.size() < 3) throw std::invalid_argument("convex_hull_2d: need at least three distinct points");

  std::vector<Point2> hull(2 * p.size());
  std::size_t k = 0;
  for (const auto& pt : p) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], pt) <= 0.0) --k;
    hull[k++] = pt;
  }
  for (std::size_t i = p.size() - 1, lower = k + 1; i-- > 0;) {
    while (k >= lower && cross(hull[k - 2], hull[k - 1], p[i]) <= 0.0) --k;
    hull[k++] = p[i];
  }
  hull.resize(k - 1);
  if (hull.size() < 3) throw std::invalid_argument("convex_hull_2d: points are collinear");
  return hull;
}

double polygon_area(std::span<const Point2> polygon) {
  double twice = 0.0;
  for (std::size_t i = 0; i < polygon.size(); ++i) {
    const auto& a = polygon[i];
    const auto& b = polygon[(i + 1) % polygon.size()];
    twice += a.x * b.y - a.y * b.x;
  }
  return std::fabs(twice) / 2.0;
}

bool convex_polygon_contains(std::span<const Point2> polygon, Point2 p, double tol) {
  if (polygon.size() < 3) return false;
  for (std::size_t i = 0; i < polygon.size(); ++i) {
    if (cross(polygon[i], polygon[(i + 1) % polygon.size()], p) < -tol) return false;
  }
  return true;
}

BootstrapRegion bootstrap_shape_region(std::span<const double> sample, const BootstrapSpec& spec) {
  spec.validate();
  const PointEstimateCSW base = csw_point_estimates(sample);
  CSWParams fitted{base.mu_hat, base.sigma_hat, base.chi_hat, base.xi_hat};
  const std::function<double(double)> quantile = [&](double u) { return gld_quantile(u, fitted); };

  std::vector<Point2> est(spec.B);
  std::vector<std::uint8_t> ok(spec.B, 0);
  parallel_for(spec.B, spec.threads, [&](std::size_t b) {
    const auto x = resample(sample, b, spec, quantile);
    try {
      const auto e = csw_point_estimates(x);
      est[b] = {e.chi_hat, e.xi_hat};
      ok[b] = 1;
    } catch (const EstimationError&) {
    }
  });

  std::vector<Point2> pts;
  for (std::size_t b = 0; b < spec.B; ++b)
    if (ok[b]) pts.push_back(est[b]);
  BootstrapRegion region;
  region.failures = spec.B - pts.size();
  check_failures(region.failures, spec.B);

  std::vector<double> xs, ys;
  for (const auto& p : pts) {
    xs.push_back(p.x);
    ys.push_back(p.y);
  }
  std::sort(xs.begin(), xs.end());
  std::sort(ys.begin(), ys.end());
  region.median = {sample_quantile(xs, 0.5), sample_quantile(ys, 0.5)};

  const auto keep = static_cast<std::size_t>(std::ceil((1.0 - spec.alpha) * static_cast<double>(pts.size())));
  std::vector<std::size_t> order(pts.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto dist = [&](std::size_t i) { return std::hypot(pts[i].x - region.median.x, pts[i].y - region.median.y); };
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return dist(a) < dist(b); });
  std::vector<Point2> retained;
  for (std::size_t i = 0; i < keep; ++i) retained.push_back(pts[order[i]]);
  region.retained = retained.size();
  try {
    region.hull = convex_hull_2d(retained);
  } catch (const std::invalid_argument& e) {
    throw EstimationError(std::string("bootstrap_shape_region: degenerate region: ") + e.what());
  }
  return region;
}

}  // namespace lambdaband
