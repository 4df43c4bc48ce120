#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lambdaband/bands.hpp"
#include "lambdaband/interval.hpp"

namespace lambdaband {

// Freimer-Kollia-Mudholkar-Lin parameters. lambda2 is an inverse scale.
struct FKMLParams {
  double lambda1 = 0.0;
  double lambda2 = 1.0;
  double lambda3 = 0.0;
  double lambda4 = 0.0;
};

// Median / IQR / asymmetry / steepness parameters.
struct CSWParams {
  double mu = 0.0;
  double sigma = 1.0;
  double chi = 0.0;
  double xi = 0.5;

  // Throws DomainError.
  void validate() const;
};

double s_basis(double u, double lambda3, double lambda4);

// (chi, xi) -> (lambda3, lambda4).
std::pair<double, double> shape_to_lambdas(double chi, double xi);
// (lambda3, lambda4) -> (chi, xi).
std::pair<double, double> lambdas_to_shape(double lambda3, double lambda4);

FKMLParams csw_to_fkml(const CSWParams& csw);
CSWParams fkml_to_csw(const FKMLParams& fkml);

double fkml_quantile(double u, const FKMLParams& fkml);
double gld_quantile(double u, const CSWParams& csw);

// n inverse-transform draws, returned sorted.
std::vector<double> gld_sample(std::size_t n, const CSWParams& csw, std::uint64_t seed);

// One-based index helpers on a band:
//   first_upper_at_least(band, u) = inf{i : upper_i >= u}
//   last_lower_at_most(band, u)   = sup{i : lower_i <= u}
// Both return 0 when the set is empty.
std::size_t first_upper_at_least(const ConfidenceBand& band, double u);
std::size_t last_lower_at_most(const ConfidenceBand& band, double u);

// [X_(a), X_(b)] for the u-quantile; a missing a gives -inf, a missing b gives +inf.
ExtInterval quantile_ci(std::span<const double> sorted, const ConfidenceBand& band, double u);

// [max(X_(a1) - X_(b2), 0), X_(b1) - X_(a2)] for Q(u1) - Q(u2), u1 > u2.
ExtInterval qr_ci(std::span<const double> sorted, const ConfidenceBand& band, double u1, double u2);

// (S(u2) - S(u1)) / (S(3/4) - S(1/4)). Negative for u1 > u2.
double shape_stat(double u1, double u2, double chi, double xi);

// Interval for shape_stat(u1, u2, .) in the same (negative) orientation:
// [-uQR(u1,u2) / lQR(3/4,1/4), -lQR(u1,u2) / uQR(3/4,1/4)].
ExtInterval shape_stat_ci(std::span<const double> sorted, const ConfidenceBand& band, double u1,
                          double u2);

enum class PairKind { RW, Grid, Edge, Custom };

struct PairSet {
  // (u1, u2) with 1 >= u1 > u2 >= 0, no duplicates.
  std::vector<std::pair<double, double>> pairs;
  PairKind kind = PairKind::Custom;
  std::size_t k = 0;

  // Sorts, deduplicates and validates. Throws std::invalid_argument.
  static PairSet custom(std::vector<std::pair<double, double>> pairs);
  std::size_t size() const { return pairs.size(); }
  bool empty() const { return pairs.empty(); }
};

// Multiscale lattice of index pairs. Needs n large enough that
// floor(log2(n / ln n)) >= 2, i.e. n >= 9.
PairSet pairs_rw(std::size_t n);
// All pairs from {floor((n-1) i / k) / n : i = 1..k}.
PairSet pairs_grid(std::size_t n, std::size_t k);
// Grid pairs with u2 <= 2/k or u1 >= 1 - 2/k.
PairSet pairs_edge(std::size_t n, std::size_t k);

// "rw", "grid:K" or "edge:K".
PairSet parse_pair_spec(std::string_view spec, std::size_t n);

struct ShapeGrid {
  std::size_t chi_cells = 200;
  std::size_t xi_cells = 200;
  double chi_lo = -0.999;
  double chi_hi = 0.999;
  double xi_lo = 0.001;
  double xi_hi = 0.999;
};

struct ShapeRegion {
  std::vector<double> chi_grid;  // cell centers
  std::vector<double> xi_grid;   // cell centers
  double chi_step = 0.0;
  double xi_step = 0.0;
  // Row-major, mask[g * xi_grid.size() + h] for (chi_grid[g], xi_grid[h]).
  std::vector<std::uint8_t> mask;
  double area = 0.0;

  bool inside(std::size_t g, std::size_t h) const { return mask[g * xi_grid.size() + h] != 0; }
  std::size_t count() const;
  // Index of the cell whose center is nearest to (chi, xi).
  std::pair<std::size_t, std::size_t> nearest_cell(double chi, double xi) const;
  bool contains_point(double chi, double xi) const;
};

ShapeRegion shape_region(std::span<const double> sorted, const ConfidenceBand& band,
                         const PairSet& pairs, const ShapeGrid& grid = {}, unsigned threads = 1);

double region_area(const ShapeRegion& region);

// CSV with header "chi,xi,inside", one row per cell center.
void write_region_csv(const ShapeRegion& region, std::ostream& out);

}  // namespace lambdaband
