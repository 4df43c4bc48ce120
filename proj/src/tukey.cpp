#include "lambdaband/tukey.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "lambdaband/errors.hpp"
#include "lambdaband/random.hpp"

namespace lambdaband {

namespace {

constexpr double kLambdaZero = 1e-12;
constexpr double kRootTol = 1e-10;
constexpr int kMaxDoublings = 64;
constexpr int kMaxBisection = 200;

// (p^lambda - q^lambda) / lambda from log p and log q. Either log may be -inf.
double tl_core(double log_p, double log_q, double lambda) {
  if (std::fabs(lambda) < kLambdaZero) return log_p - log_q;
  double value = (std::expm1(lambda * log_p) - std::expm1(lambda * log_q)) / lambda;
  if (std::isnan(value)) {
    // Both powers overflowed (lambda very negative); the smaller base dominates.
    if (log_p == log_q) return 0.0;
    return log_p < log_q ? -kInf : kInf;
  }
  return value;
}

// (x e^x - e^x + 1) / x^2, the kernel of the lambda-derivative.
double deriv_kernel(double x) {
  if (std::fabs(x) < 1.0) {
    // sum_{k>=2} (k - 1) x^(k-2) / k!
    double term = 0.5;  // k = 2
    double sum = term;
    double power = 1.0;
    double fact = 2.0;
    for (int k = 3; k < 40; ++k) {
      power *= x;
      fact *= k;
      term = (k - 1) * power / fact;
      sum += term;
      if (std::fabs(term) < 1e-18 * std::fabs(sum)) break;
    }
    return sum;
  }
  if (x == -kInf) return 0.0;
  return (std::exp(x) * (x - 1.0) + 1.0) / (x * x);
}

void check_prob(double p, const char* who) {
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError(std::string(who) + ": p must lie in [0, 1]");
}

// Logs of the two tail probabilities of a raw quantile level.
struct Level {
  double log_p;
  double log_q;
  double operator()(double lambda) const { return tl_core(log_p, log_q, lambda); }
};

Level raw_level(double p) { return {std::log(p), std::log1p(-p)}; }
Level abs_level(double p) { return {std::log1p(p) - std::log(2.0), std::log1p(-p) - std::log(2.0)}; }

// The set {lambda : holds(lambda)} for a predicate that holds on a down-set
// (-inf, r]. The bracket expands from [-1, 1] by doubling, then bisection
// narrows it. The returned endpoint is the outer side of the final bracket.
template <class Pred>
ExtInterval solve_down_set(Pred holds) {
  double good, bad;
  if (holds(-1.0)) {
    good = -1.0;
    bad = 1.0;
    int k = 0;
    while (holds(bad)) {
      good = bad;
      bad *= 2.0;
      if (++k > kMaxDoublings) return ExtInterval::whole();
    }
  } else {
    bad = -1.0;
    good = -2.0;
    int k = 0;
    while (!holds(good)) {
      bad = good;
      good *= 2.0;
      if (++k > kMaxDoublings) return ExtInterval::none();
    }
  }
  int iter = 0;
  for (; iter < kMaxBisection; ++iter) {
    if (bad - good <= kRootTol) break;
    double mid = good + 0.5 * (bad - good);
    if (mid <= good || mid >= bad) break;
    (holds(mid) ? good : bad) = mid;
  }
  if (iter == kMaxBisection) throw ConvergenceError("tukey: bisection did not converge");
  return ExtInterval::below(bad);
}

template <class Pred>
ExtInterval solve_up_set(Pred holds) {
  ExtInterval mirrored = solve_down_set([&](double t) { return holds(-t); });
  if (mirrored.empty) return mirrored;
  return ExtInterval::between(-mirrored.hi, -mirrored.lo);
}

// {lambda : Q(ell, lambda) <= x}
ExtInterval raw_lower_constraint(double x, double ell) {
  if (ell == 0.5) return x >= 0.0 ? ExtInterval::whole() : ExtInterval::none();
  Level q = raw_level(ell);
  if (ell < 0.5) {
    // Q(ell, .) is increasing and nonpositive.
    if (x >= 0.0) return ExtInterval::whole();
    return solve_down_set([&](double lam) { return q(lam) <= x; });
  }
  // Q(ell, .) is decreasing and positive.
  if (x <= 0.0) return ExtInterval::none();
  return solve_up_set([&](double lam) { return q(lam) <= x; });
}

// {lambda : x <= Q(u, lambda)}
ExtInterval raw_upper_constraint(double x, double u) {
  if (u == 0.5) return x <= 0.0 ? ExtInterval::whole() : ExtInterval::none();
  Level q = raw_level(u);
  if (u < 0.5) {
    if (x >= 0.0) return ExtInterval::none();
    return solve_up_set([&](double lam) { return x <= q(lam); });
  }
  if (x <= 0.0) return ExtInterval::whole();
  return solve_down_set([&](double lam) { return x <= q(lam); });
}

void check_band_arguments(double ell, double u, const char* who) {
  if (!(ell >= 0.0 && ell <= u && u <= 1.0))
    throw DomainError(std::string(who) + ": need 0 <= ell <= u <= 1");
}

}  // namespace

double tl_quantile(double p, double lambda) {
  check_prob(p, "tl_quantile");
  if (p == 0.0) return lambda > 0.0 ? -1.0 / lambda : -kInf;
  if (p == 1.0) return lambda > 0.0 ? 1.0 / lambda : kInf;
  return raw_level(p)(lambda);
}

double tl_abs_quantile(double p, double lambda) {
  check_prob(p, "tl_abs_quantile");
  if (p == 0.0) return 0.0;
  if (p == 1.0) return lambda > 0.0 ? 1.0 / lambda : kInf;
  return abs_level(p)(lambda);
}

double tl_abs_quantile_dlambda(double p, double lambda) {
  if (!(p > 0.0 && p <= 1.0)) throw DomainError("tl_abs_quantile_dlambda: p must lie in (0, 1]");
  if (p == 1.0) return lambda > 0.0 ? -1.0 / (lambda * lambda) : -kInf;
  Level lv = abs_level(p);
  double a = lv.log_p;
  double b = lv.log_q;
  double value = a * a * deriv_kernel(lambda * a) - b * b * deriv_kernel(lambda * b);
  return std::min(value, 0.0);
}

TukeySample TukeySample::from_values(std::vector<double> values) {
  TukeySample s;
  s.values = std::move(values);
  s.sorted_values = s.values;
  std::sort(s.sorted_values.begin(), s.sorted_values.end());
  s.sorted_abs.resize(s.values.size());
  std::transform(s.values.begin(), s.values.end(), s.sorted_abs.begin(),
                 [](double v) { return std::fabs(v); });
  std::sort(s.sorted_abs.begin(), s.sorted_abs.end());
  return s;
}

TukeySample tl_sample(std::size_t n, double lambda, std::uint64_t seed) {
  Engine eng(seed);
  std::vector<double> values(n);
  for (auto& v : values) v = tl_quantile(uniform_open(eng), lambda);
  return TukeySample::from_values(std::move(values));
}

ExtInterval tl_per_index_interval(double x, double ell, double u) {
  check_band_arguments(ell, u, "tl_per_index_interval");
  ExtInterval lower = raw_lower_constraint(x, ell);
  if (lower.empty) return lower;
  return lower.intersect(raw_upper_constraint(x, u));
}

ExtInterval tl_per_index_interval_abs(double y, double ell, double u) {
  check_band_arguments(ell, u, "tl_per_index_interval_abs");
  if (y < 0.0) throw DomainError("tl_per_index_interval_abs: y must be nonnegative");

  // Q~(p, .) is decreasing in lambda and positive for p > 0, with Q~(0, .) = 0.
  ExtInterval lower = ExtInterval::whole();
  if (ell > 0.0) {
    if (y == 0.0) return ExtInterval::none();
    if (ell == 1.0) {
      lower = solve_up_set([&](double lam) { return tl_abs_quantile(1.0, lam) <= y; });
    } else {
      Level q = abs_level(ell);
      lower = solve_up_set([&](double lam) { return q(lam) <= y; });
    }
  }

  ExtInterval upper = ExtInterval::whole();
  if (y > 0.0) {
    if (u == 0.0) return ExtInterval::none();
    if (u == 1.0) {
      upper = solve_down_set([&](double lam) { return y <= tl_abs_quantile(1.0, lam); });
    } else {
      Level q = abs_level(u);
      upper = solve_down_set([&](double lam) { return y <= q(lam); });
    }
  }
  return lower.intersect(upper);
}

ExtInterval tl_ci_raw(const TukeySample& sample, const ConfidenceBand& band) {
  if (band.n != sample.size()) throw std::invalid_argument("tl_ci_raw: band size does not match sample");
  ExtInterval ci = ExtInterval::whole();
  for (std::size_t i = 0; i < band.n && !ci.empty; ++i) {
    ci = ci.intersect(tl_per_index_interval(sample.sorted_values[i], band.lower[i], band.upper[i]));
  }
  return ci;
}

ExtInterval tl_ci_abs(const TukeySample& sample, const ConfidenceBand& band) {
  if (band.n != sample.size()) throw std::invalid_argument("tl_ci_abs: band size does not match sample");
  ExtInterval ci = ExtInterval::whole();
  for (std::size_t i = 0; i < band.n && !ci.empty; ++i) {
    ci = ci.intersect(tl_per_index_interval_abs(sample.sorted_abs[i], band.lower[i], band.upper[i]));
  }
  return ci;
}

namespace diagnostics {

ExtInterval tl_envelope(double u_i, double lambda0, double ell, double u) {
  if (!(ell >= 0.0 && ell <= u_i && u_i <= u && u <= 1.0))
    throw DomainError("tl_envelope: need 0 <= ell <= u_i <= u <= 1");
  const double at_ui = tl_abs_quantile(u_i, lambda0);

  double lo = -kInf;
  if (ell > 0.0) {
    double slope = tl_abs_quantile_dlambda(ell, lambda0);
    if (slope != 0.0) lo = lambda0 + (at_ui - tl_abs_quantile(ell, lambda0)) / slope;
  }

  double hi = kInf;
  if (u < 1.0 && at_ui > 0.0) {
    double log_p = std::log1p(u) - std::log(2.0);
    hi = lambda0 - (tl_abs_quantile(u, lambda0) - at_ui) / (log_p * at_ui);
  }
  return ExtInterval::between(lo, hi);
}

}  // namespace diagnostics

}  // namespace lambdaband
