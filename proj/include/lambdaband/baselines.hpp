#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "lambdaband/interval.hpp"

namespace lambdaband {

// Linear interpolation between order statistics at h = (n - 1) q + 1.
double sample_quantile(std::span<const double> sorted, double q);

// Tukey lambda by matching the sample L-scale to 2 / ((lambda + 1)(lambda + 2)).
// Throws EstimationError for a degenerate sample (L-scale <= 0).
double lmoment_estimate_tl(std::span<const double> sample);

// {0.1, ..., 0.9} without the median.
std::vector<double> default_qmatch_probs();

// Mean of the per-probability solutions of Q(p, lambda) = sample quantile.
// Probabilities whose sample quantile has the wrong sign are skipped; throws
// EstimationError if all are skipped.
double quantile_match_estimate_tl(std::span<const double> sample,
                                  std::span<const double> probs);
double quantile_match_estimate_tl(std::span<const double> sample);

enum class BootstrapKind { Parametric, Nonparametric };

struct BootstrapSpec {
  std::size_t B = 1000;
  BootstrapKind kind = BootstrapKind::Nonparametric;
  double alpha = 0.05;
  std::uint64_t seed = 1;
  unsigned threads = 1;

  void validate() const;
};

using Estimator = std::function<double(std::span<const double>)>;
// Quantile function of the fitted model, used by the parametric bootstrap.
using ParametricQuantile = std::function<double(double u, double theta)>;

struct BootstrapResult {
  ExtInterval interval;
  double estimate = 0.0;
  std::size_t failures = 0;
};

// Percentile interval of the replicate estimates. Replicates whose estimator
// throws EstimationError are dropped; more than 20% dropped throws.
BootstrapResult bootstrap_ci(std::span<const double> sample, const Estimator& estimator,
                             const BootstrapSpec& spec, const ParametricQuantile& model = {});

struct PointEstimateCSW {
  double mu_hat = 0.0;
  double sigma_hat = 0.0;
  double chi_hat = 0.0;
  double xi_hat = 0.5;
  double s_hat = 0.0;
  double kappa_hat = 0.0;
  double residual = 0.0;
  // False when the residual exceeds 1e-6; the fields hold the best fit found.
  bool converged = false;
};

// Population quartile skewness and octile kurtosis ratios of the GLD shape.
double csw_skewness_ratio(double chi, double xi);
double csw_kurtosis_ratio(double chi, double xi);

// Requires n >= 8. Throws EstimationError for degenerate quantiles.
PointEstimateCSW csw_point_estimates(std::span<const double> sample);

struct Point2 {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point2&, const Point2&) = default;
};

// Monotone chain, counterclockwise, no collinear vertices. Throws
// std::invalid_argument when fewer than three non-collinear points exist.
std::vector<Point2> convex_hull_2d(std::span<const Point2> points);

double polygon_area(std::span<const Point2> polygon);
// Inside or on the boundary of a counterclockwise convex polygon.
bool convex_polygon_contains(std::span<const Point2> polygon, Point2 p, double tol = 1e-12);

struct BootstrapRegion {
  std::vector<Point2> hull;
  Point2 median;
  std::size_t retained = 0;
  std::size_t failures = 0;
};

// Convex hull of the ceil((1 - alpha) B) replicate (chi, xi) estimates closest
// to their coordinate-wise median. Throws EstimationError for a degenerate hull.
BootstrapRegion bootstrap_shape_region(std::span<const double> sample, const BootstrapSpec& spec);

}  // namespace lambdaband
