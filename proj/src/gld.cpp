#include "lambdaband/gld.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <ostream>
#include <set>
#include <stdexcept>

#include "lambdaband/errors.hpp"
#include "lambdaband/format.hpp"
#include "lambdaband/parallel.hpp"
#include "lambdaband/random.hpp"

namespace lambdaband {

namespace {

constexpr double kLambdaZero = 1e-12;

// (v^lambda - 1) / lambda from log v, with the log branch at lambda = 0.
double box_cox_log(double log_v, double lambda) {
  if (std::fabs(lambda) < kLambdaZero) return log_v;
  return std::expm1(lambda * log_v) / lambda;
}

// S at an interior u, from log u and log(1 - u).
double s_interior(double log_u, double log_1mu, double lambda3, double lambda4) {
  return box_cox_log(log_u, lambda3) - box_cox_log(log_1mu, lambda4);
}

double s_at(double u, double lambda3, double lambda4) {
  if (u == 0.0) return lambda3 > 0.0 ? -1.0 / lambda3 : -kInf;
  if (u == 1.0) return lambda4 > 0.0 ? 1.0 / lambda4 : kInf;
  return s_interior(std::log(u), std::log1p(-u), lambda3, lambda4);
}

double order_stat_or(std::span<const double> sorted, std::size_t one_based, double fallback) {
  return one_based == 0 ? fallback : sorted[one_based - 1];
}

void check_band(std::span<const double> sorted, const ConfidenceBand& band, const char* who) {
  if (sorted.size() != band.n) throw std::invalid_argument(std::string(who) + ": band size does not match sample");
}

// x / y for nonnegative x, y with x / 0 = +inf (0 / 0 included).
double ratio_or_inf(double x, double y) {
  if (y == 0.0) return kInf;
  return x / y;
}

// x / y for nonnegative x, y with 0 / 0 = 0 and x / 0 = +inf otherwise.
double ratio_or_zero(double x, double y) {
  if (y == 0.0) return x == 0.0 ? 0.0 : kInf;
  return x / y;
}

}  // namespace

void CSWParams::validate() const {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw DomainError("gld: sigma must be positive");
  if (!(chi > -1.0 && chi < 1.0)) throw DomainError("gld: chi must lie in (-1, 1)");
  if (!(xi > 0.0 && xi < 1.0)) throw DomainError("gld: xi must lie in (0, 1)");
  if (!std::isfinite(mu)) throw DomainError("gld: mu must be finite");
}

double s_basis(double u, double lambda3, double lambda4) {
  if (!(u >= 0.0 && u <= 1.0)) throw DomainError("s_basis: u must lie in [0, 1]");
  return s_at(u, lambda3, lambda4);
}

std::pair<double, double> shape_to_lambdas(double chi, double xi) {
  if (!(chi > -1.0 && chi < 1.0)) throw DomainError("shape_to_lambdas: chi must lie in (-1, 1)");
  if (!(xi > 0.0 && xi < 1.0)) throw DomainError("shape_to_lambdas: xi must lie in (0, 1)");
  const double diff = chi / std::sqrt(1.0 - chi * chi);
  const double sum = (1.0 - 2.0 * xi) / (2.0 * std::sqrt(xi * (1.0 - xi)));
  return {0.5 * (sum + diff), 0.5 * (sum - diff)};
}

std::pair<double, double> lambdas_to_shape(double lambda3, double lambda4) {
  const double diff = lambda3 - lambda4;
  const double sum = lambda3 + lambda4;
  return {diff / std::sqrt(1.0 + diff * diff), 0.5 - sum / (2.0 * std::sqrt(1.0 + sum * sum))};
}

FKMLParams csw_to_fkml(const CSWParams& csw) {
  csw.validate();
  auto [l3, l4] = shape_to_lambdas(csw.chi, csw.xi);
  FKMLParams f;
  f.lambda3 = l3;
  f.lambda4 = l4;
  f.lambda2 = (s_at(0.75, l3, l4) - s_at(0.25, l3, l4)) / csw.sigma;
  f.lambda1 = csw.mu - s_at(0.5, l3, l4) / f.lambda2;
  return f;
}

CSWParams fkml_to_csw(const FKMLParams& fkml) {
  if (!(fkml.lambda2 > 0.0)) throw DomainError("fkml_to_csw: lambda2 must be positive");
  auto [chi, xi] = lambdas_to_shape(fkml.lambda3, fkml.lambda4);
  CSWParams c;
  c.chi = chi;
  c.xi = xi;
  c.sigma = (s_at(0.75, fkml.lambda3, fkml.lambda4) - s_at(0.25, fkml.lambda3, fkml.lambda4)) / fkml.lambda2;
  c.mu = fkml.lambda1 + s_at(0.5, fkml.lambda3, fkml.lambda4) / fkml.lambda2;
  return c;
}

double fkml_quantile(double u, const FKMLParams& fkml) {
  return fkml.lambda1 + s_basis(u, fkml.lambda3, fkml.lambda4) / fkml.lambda2;
}

double gld_quantile(double u, const CSWParams& csw) {
  if (!(u >= 0.0 && u <= 1.0)) throw DomainError("gld_quantile: u must lie in [0, 1]");
  csw.validate();
  auto [l3, l4] = shape_to_lambdas(csw.chi, csw.xi);
  const double mid = s_at(0.5, l3, l4);
  const double iqr = s_at(0.75, l3, l4) - s_at(0.25, l3, l4);
  if (u == 0.5) return csw.mu;
  return csw.mu + csw.sigma * (s_at(u, l3, l4) - mid) / iqr;
}

std::vector<double> gld_sample(std::size_t n, const CSWParams& csw, std::uint64_t seed) {
  csw.validate();
  auto [l3, l4] = shape_to_lambdas(csw.chi, csw.xi);
  const double mid = s_at(0.5, l3, l4);
  const double scale = csw.sigma / (s_at(0.75, l3, l4) - s_at(0.25, l3, l4));
  Engine eng(seed);
  std::vector<double> out(n);
  for (auto& x : out) x = csw.mu + scale * (s_at(uniform_open(eng), l3, l4) - mid);
  std::sort(out.begin(), out.end());
  return out;
}

std::size_t first_upper_at_least(const ConfidenceBand& band, double u) {
  auto it = std::partition_point(band.upper.begin(), band.upper.end(), [u](double v) { return v < u; });
  if (it == band.upper.end()) return 0;
  return static_cast<std::size_t>(it - band.upper.begin()) + 1;
}

std::size_t last_lower_at_most(const ConfidenceBand& band, double u) {
  auto it = std::partition_point(band.lower.begin(), band.lower.end(), [u](double v) { return v <= u; });
  return static_cast<std::size_t>(it - band.lower.begin());
}

ExtInterval quantile_ci(std::span<const double> sorted, const ConfidenceBand& band, double u) {
  check_band(sorted, band, "quantile_ci");
  if (!(u > 0.0 && u < 1.0)) throw DomainError("quantile_ci: u must lie in (0, 1)");
  const double lo = order_stat_or(sorted, first_upper_at_least(band, u), -kInf);
  const double hi = order_stat_or(sorted, last_lower_at_most(band, u), kInf);
  return ExtInterval::between(lo, hi);
}

ExtInterval qr_ci(std::span<const double> sorted, const ConfidenceBand& band, double u1, double u2) {
  check_band(sorted, band, "qr_ci");
  if (!(u1 > u2)) throw DomainError("qr_ci: need u1 > u2");
  const double x_a1 = order_stat_or(sorted, first_upper_at_least(band, u1), -kInf);
  const double x_b1 = order_stat_or(sorted, last_lower_at_most(band, u1), kInf);
  const double x_a2 = order_stat_or(sorted, first_upper_at_least(band, u2), -kInf);
  const double x_b2 = order_stat_or(sorted, last_lower_at_most(band, u2), kInf);
  const double lo = std::max(x_a1 - x_b2, 0.0);
  return ExtInterval::between(lo, x_b1 - x_a2);
}

double shape_stat(double u1, double u2, double chi, double xi) {
  if (!(u1 > u2)) throw DomainError("shape_stat: need u1 > u2");
  if (!(u2 >= 0.0 && u1 <= 1.0)) throw DomainError("shape_stat: u1, u2 must lie in [0, 1]");
  auto [l3, l4] = shape_to_lambdas(chi, xi);
  return (s_at(u2, l3, l4) - s_at(u1, l3, l4)) / (s_at(0.75, l3, l4) - s_at(0.25, l3, l4));
}

ExtInterval shape_stat_ci(std::span<const double> sorted, const ConfidenceBand& band, double u1,
                          double u2) {
  const ExtInterval range = qr_ci(sorted, band, u1, u2);
  const ExtInterval iqr = qr_ci(sorted, band, 0.75, 0.25);
  const double ratio_lo = ratio_or_zero(range.lo, iqr.hi);
  const double ratio_hi = ratio_or_inf(range.hi, iqr.lo);
  return ExtInterval::between(-ratio_hi, -ratio_lo);
}

PairSet PairSet::custom(std::vector<std::pair<double, double>> pairs) {
  for (const auto& [u1, u2] : pairs) {
    if (!(u1 <= 1.0 && u1 > u2 && u2 >= 0.0))
      throw std::invalid_argument("pair set: every pair needs 1 >= u1 > u2 >= 0");
  }
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
  PairSet set;
  set.pairs = std::move(pairs);
  set.kind = PairKind::Custom;
  return set;
}

namespace {

PairSet from_index_pairs(const std::set<std::pair<std::size_t, std::size_t>>& index_pairs, std::size_t n,
                         PairKind kind, std::size_t k) {
  PairSet set;
  set.kind = kind;
  set.k = k;
  set.pairs.reserve(index_pairs.size());
  const double nd = static_cast<double>(n);
  for (const auto& [hi, lo] : index_pairs)
    set.pairs.emplace_back(static_cast<double>(hi) / nd, static_cast<double>(lo) / nd);
  return set;
}

std::vector<std::size_t> grid_numerators(std::size_t n, std::size_t k) {
  if (k < 2 || k + 1 > n) throw std::invalid_argument("pairs_grid: need 2 <= k <= n - 1");
  std::vector<std::size_t> nums;
  for (std::size_t i = 1; i <= k; ++i) nums.push_back((n - 1) * i / k);
  nums.erase(std::unique(nums.begin(), nums.end()), nums.end());
  if (nums.size() < 2) throw std::invalid_argument("pairs_grid: fewer than two distinct grid values");
  return nums;
}

}  // namespace

PairSet pairs_rw(std::size_t n) {
  if (n < 3) throw std::invalid_argument("pairs_rw: n too small");
  const double nd = static_cast<double>(n);
  const int l_max = static_cast<int>(std::floor(std::log2(nd / std::log(nd))));
  if (l_max < 2) throw std::invalid_argument("pairs_rw: n too small for any scale (need n >= 9)");

  std::set<std::pair<std::size_t, std::size_t>> index_pairs;
  for (int l = 2; l <= l_max; ++l) {
    const double m = nd * std::ldexp(1.0, -l);
    const auto d = static_cast<std::size_t>(std::ceil(m / (6.0 * std::sqrt(static_cast<double>(l)))));
    for (std::size_t j = 1; j <= n; j += d) {
      for (std::size_t k = j + d; k <= n; k += d) {
        const double gap = static_cast<double>(k - j);
        if (gap >= 2.0 * m) break;
        if (gap > m) index_pairs.emplace(k, j);
      }
    }
  }
  return from_index_pairs(index_pairs, n, PairKind::RW, 0);
}

PairSet pairs_grid(std::size_t n, std::size_t k) {
  const auto nums = grid_numerators(n, k);
  std::set<std::pair<std::size_t, std::size_t>> index_pairs;
  for (std::size_t a = 0; a < nums.size(); ++a)
    for (std::size_t b = 0; b < a; ++b) index_pairs.emplace(nums[a], nums[b]);
  return from_index_pairs(index_pairs, n, PairKind::Grid, k);
}

PairSet pairs_edge(std::size_t n, std::size_t k) {
  const auto nums = grid_numerators(n, k);
  std::set<std::pair<std::size_t, std::size_t>> index_pairs;
  for (std::size_t a = 0; a < nums.size(); ++a) {
    for (std::size_t b = 0; b < a; ++b) {
      // Keep a pair when either probability lies within 2/k of an edge:
      // u2 <= 2/k or u1 >= 1 - 2/k, in exact integer arithmetic.
      const bool low_edge = nums[b] * k <= 2 * n;
      const bool high_edge = nums[a] * k >= (k - 2) * n;
      if (low_edge || high_edge) index_pairs.emplace(nums[a], nums[b]);
    }
  }
  return from_index_pairs(index_pairs, n, PairKind::Edge, k);
}

PairSet parse_pair_spec(std::string_view spec, std::size_t n) {
  if (spec == "rw") return pairs_rw(n);
  auto colon = spec.find(':');
  if (colon == std::string_view::npos) throw std::invalid_argument("pairs: expected rw, grid:K or edge:K");
  auto name = spec.substr(0, colon);
  auto digits = spec.substr(colon + 1);
  std::size_t k = 0;
  auto res = std::from_chars(digits.data(), digits.data() + digits.size(), k);
  if (res.ec != std::errc() || res.ptr != digits.data() + digits.size())
    throw std::invalid_argument("pairs: bad K in '" + std::string(spec) + "'");
  if (name == "grid") return pairs_grid(n, k);
  if (name == "edge") return pairs_edge(n, k);
  throw std::invalid_argument("pairs: expected rw, grid:K or edge:K");
}

std::size_t ShapeRegion::count() const {
  return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), std::uint8_t{1}));
}

std::pair<std::size_t, std::size_t> ShapeRegion::nearest_cell(double chi, double xi) const {
  auto locate = [](const std::vector<double>& centers, double step, double x) {
    const double origin = centers.front() - 0.5 * step;
    double pos = std::floor((x - origin) / step);
    pos = std::clamp(pos, 0.0, static_cast<double>(centers.size() - 1));
    return static_cast<std::size_t>(pos);
  };
  return {locate(chi_grid, chi_step, chi), locate(xi_grid, xi_step, xi)};
}

bool ShapeRegion::contains_point(double chi, double xi) const {
  auto [g, h] = nearest_cell(chi, xi);
  return inside(g, h);
}

ShapeRegion shape_region(std::span<const double> sorted, const ConfidenceBand& band, const PairSet& pairs,
                         const ShapeGrid& grid, unsigned threads) {
  check_band(sorted, band, "shape_region");
  if (pairs.empty()) throw std::invalid_argument("shape_region: empty pair set");
  if (grid.chi_cells < 2 || grid.xi_cells < 2) throw std::invalid_argument("shape_region: need >= 2 cells per axis");
  if (!(grid.chi_lo > -1.0 && grid.chi_lo < grid.chi_hi && grid.chi_hi < 1.0 && grid.xi_lo > 0.0 &&
        grid.xi_lo < grid.xi_hi && grid.xi_hi < 1.0))
    throw std::invalid_argument("shape_region: grid bounds must lie inside (-1, 1) x (0, 1)");

  // Distinct probability levels; S is evaluated once per level per cell.
  std::vector<double> levels{0.25, 0.75};
  for (const auto& [u1, u2] : pairs.pairs) {
    levels.push_back(u1);
    levels.push_back(u2);
  }
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  auto level_index = [&](double u) {
    return static_cast<std::size_t>(std::lower_bound(levels.begin(), levels.end(), u) - levels.begin());
  };
  const std::size_t i14 = level_index(0.25);
  const std::size_t i34 = level_index(0.75);

  struct Constraint {
    std::size_t hi_level;
    std::size_t lo_level;
    ExtInterval ci;
  };
  std::vector<Constraint> constraints;
  constraints.reserve(pairs.size());
  for (const auto& [u1, u2] : pairs.pairs)
    constraints.push_back({level_index(u1), level_index(u2), shape_stat_ci(sorted, band, u1, u2)});

  ShapeRegion region;
  region.chi_step = (grid.chi_hi - grid.chi_lo) / static_cast<double>(grid.chi_cells);
  region.xi_step = (grid.xi_hi - grid.xi_lo) / static_cast<double>(grid.xi_cells);
  for (std::size_t g = 0; g < grid.chi_cells; ++g)
    region.chi_grid.push_back(grid.chi_lo + (static_cast<double>(g) + 0.5) * region.chi_step);
  for (std::size_t h = 0; h < grid.xi_cells; ++h)
    region.xi_grid.push_back(grid.xi_lo + (static_cast<double>(h) + 0.5) * region.xi_step);
  region.mask.assign(grid.chi_cells * grid.xi_cells, 0);

  parallel_for(grid.chi_cells, threads, [&](std::size_t g) {
    std::vector<double> s(levels.size());
    for (std::size_t h = 0; h < grid.xi_cells; ++h) {
      auto [l3, l4] = shape_to_lambdas(region.chi_grid[g], region.xi_grid[h]);
      for (std::size_t k = 0; k < levels.size(); ++k) s[k] = s_at(levels[k], l3, l4);
      const double iqr = s[i34] - s[i14];
      bool ok = true;
      for (const auto& c : constraints) {
        if (!c.ci.contains((s[c.lo_level] - s[c.hi_level]) / iqr)) {
          ok = false;
          break;
        }
      }
      region.mask[g * grid.xi_cells + h] = ok ? 1 : 0;
    }
  });
  region.area = region_area(region);
  return region;
}

double region_area(const ShapeRegion& region) {
  return static_cast<double>(region.count()) * region.chi_step * region.xi_step;
}

void write_region_csv(const ShapeRegion& region, std::ostream& out) {
  out << "chi,xi,inside\n";
  for (std::size_t g = 0; g < region.chi_grid.size(); ++g) {
    for (std::size_t h = 0; h < region.xi_grid.size(); ++h) {
      out << format_double(region.chi_grid[g]) << ',' << format_double(region.xi_grid[h]) << ','
          << (region.inside(g, h) ? 1 : 0) << '\n';
    }
  }
}

}  // namespace lambdaband
