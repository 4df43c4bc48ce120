#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace lambdaband {

enum class BandKind { DKW, DW };

std::string to_string(BandKind kind);
// Accepts "dkw" / "dw" (case-insensitive). Throws std::invalid_argument.
BandKind parse_band_kind(std::string_view text);

// Probabilities handed to the DW penalty are clamped to [kClampDelta, 1 - kClampDelta].
inline constexpr double kClampDelta = 1e-12;

struct BandSpec {
  std::size_t n = 0;
  double alpha = 0.05;
  BandKind kind = BandKind::DW;
  // DW only.
  double nu = 1.0;
  std::size_t mc_reps = 10000;
  std::uint64_t seed = 0x5eed0001ULL;

  // Throws std::invalid_argument when an invariant is violated.
  void validate() const;
};

// Simultaneous bounds lower[i] <= F(X_(i+1)) <= upper[i] (zero-based storage).
struct ConfidenceBand {
  std::size_t n = 0;
  double alpha = 0.0;
  BandKind kind = BandKind::DKW;
  std::vector<double> lower;
  std::vector<double> upper;
  // Monte Carlo critical value, DW bands only.
  std::optional<double> critical_value;
};

// K(a, b) for Bernoulli(a) against Bernoulli(b), with 0 log 0 = 0.
double bernoulli_kl(double a, double b);

// C(t) = log(log(e / (4 t (1 - t)))) and D(t) = log(1 + C(t)^2), t in (0, 1).
double penalty_c(double t);
double penalty_d(double t);

// Minimum of C + nu D over the closed interval spanned by u and v.
double penalty_cnu(double u, double v, double nu);

// n K(level, u) - C_nu(level, u) with both probabilities clamped before the
// penalty is evaluated. This is the function whose sublevel set at the
// critical value defines the DW band at index level = i / n.
double dw_objective(double level, double u, std::size_t n, double nu);

// Modified Berk-Jones statistic of F(X_(1)) <= ... <= F(X_(n)).
double dw_statistic(std::span<const double> sorted_probs, double nu);

// Empirical (1 - alpha)-quantile of dw_statistic over mc_reps sorted uniform
// samples of size n. Cached per argument tuple; threads = 0 uses all cores.
double dw_critical_value(std::size_t n, double alpha, double nu, std::size_t mc_reps,
                         std::uint64_t seed, unsigned threads = 0);

double dkw_half_width(std::size_t n, double alpha);

ConfidenceBand compute_band(const BandSpec& spec, unsigned threads = 0);

// True iff lower[i] <= p[i] <= upper[i] for every i.
bool band_covers(const ConfidenceBand& band, std::span<const double> sorted_probs);

// CSV with header "i,lower,upper", i is one-based, 17 significant digits.
void write_band_csv(const ConfidenceBand& band, std::ostream& out);

}  // namespace lambdaband
