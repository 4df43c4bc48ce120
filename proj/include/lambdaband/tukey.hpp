#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "lambdaband/bands.hpp"
#include "lambdaband/interval.hpp"

namespace lambdaband {

// Tukey Lambda quantile Q(p, lambda). Q(0, .) and Q(1, .) are the support
// endpoints (+-1/lambda for lambda > 0, +-inf otherwise).
double tl_quantile(double p, double lambda);

// Quantile of |X|: Q((1 + p) / 2, lambda).
double tl_abs_quantile(double p, double lambda);

// d/dlambda of tl_abs_quantile. Nonpositive. At p = 1 the value is -1/lambda^2
// for lambda > 0 and -inf otherwise.
double tl_abs_quantile_dlambda(double p, double lambda);

struct TukeySample {
  std::vector<double> values;
  std::vector<double> sorted_values;
  std::vector<double> sorted_abs;

  static TukeySample from_values(std::vector<double> values);
  std::size_t size() const { return values.size(); }
};

// n draws of Q(U, lambda), deterministic in seed.
TukeySample tl_sample(std::size_t n, double lambda, std::uint64_t seed);

// {lambda : Q(ell, lambda) <= x <= Q(u, lambda)}. Either a closed interval,
// a ray unbounded below, the whole line, or empty.
ExtInterval tl_per_index_interval(double x, double ell, double u);

// {lambda : Q~(ell, lambda) <= y <= Q~(u, lambda)} for y = |X|_(i) >= 0.
ExtInterval tl_per_index_interval_abs(double y, double ell, double u);

// Confidence set for lambda from the raw order statistics.
ExtInterval tl_ci_raw(const TukeySample& sample, const ConfidenceBand& band);

// Confidence set for lambda from the order statistics of |X|.
ExtInterval tl_ci_abs(const TukeySample& sample, const ConfidenceBand& band);

namespace diagnostics {

// Explicit superset of the per-index |X| constraint set, written in terms of
// the true uniform order statistic u_i and the true lambda0.
// Requires 0 <= ell <= u_i <= u <= 1.
ExtInterval tl_envelope(double u_i, double lambda0, double ell, double u);

}  // namespace diagnostics

}  // namespace lambdaband
