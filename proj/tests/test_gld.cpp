#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "lambdaband/errors.hpp"
#include "lambdaband/gld.hpp"
#include "lambdaband/tukey.hpp"
#include "oracles.hpp"

using namespace lambdaband;

namespace {

ConfidenceBand vacuous(std::size_t n) {
  ConfidenceBand b;
  b.n = n;
  b.lower.assign(n, 0.0);
  b.upper.assign(n, 1.0);
  return b;
}

// Direct S from the four-branch definition, with pow().
double s_direct(double u, double l3, double l4) {
  const double left = l3 == 0.0 ? std::log(u) : (std::pow(u, l3) - 1.0) / l3;
  const double right = l4 == 0.0 ? std::log(1.0 - u) : (std::pow(1.0 - u, l4) - 1.0) / l4;
  return left - right;
}

}  // namespace

TEST_CASE("S function") {
  for (double u : {0.1, 0.5, 0.77}) CHECK(s_basis(u, 0.0, 0.0) == doctest::Approx(std::log(u) - std::log(1 - u)).epsilon(1e-15));
  for (double lam : {-2.0, 0.0, 0.3, 4.0}) CHECK(std::fabs(s_basis(0.5, lam, lam)) <= 1e-15);
  CHECK(s_basis(0.0, 2.0, 1.0) == -0.5);
  CHECK(s_basis(1.0, 2.0, 0.5) == 2.0);
  CHECK(s_basis(0.0, -1.0, 1.0) == -kInf);
  CHECK(s_basis(1.0, 1.0, 0.0) == kInf);
  CHECK_THROWS_AS(s_basis(1.1, 0.0, 0.0), DomainError);

  std::mt19937_64 eng(3);
  std::uniform_real_distribution<double> lam(-2.0, 3.0);
  for (int k = 0; k < 20; ++k) {
    const double l3 = lam(eng), l4 = lam(eng);
    double prev = s_basis(0.001, l3, l4);
    for (double u = 0.002; u < 1.0; u += 0.001) {
      const double s = s_basis(u, l3, l4);
      CHECK(s > prev);
      prev = s;
    }
    for (double u : {0.05, 0.3, 0.8}) CHECK(s_basis(u, l3, l4) == doctest::Approx(s_direct(u, l3, l4)).epsilon(1e-10));
  }
}

TEST_CASE("shape parameter maps") {
  auto [a, b] = shape_to_lambdas(0.0, 0.3661);
  CHECK(a == b);
  CHECK(a == doctest::Approx(0.1390).epsilon(5e-4));
  auto [u3, u4] = shape_to_lambdas(0.0, 0.5 - 1.0 / std::sqrt(5.0));
  CHECK(u3 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(u4 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(lambdas_to_shape(0.7, 0.7).first == 0.0);
  CHECK(lambdas_to_shape(0.7, -0.7).second == 0.5);
  CHECK_THROWS_AS(shape_to_lambdas(1.0, 0.5), DomainError);
  CHECK_THROWS_AS(shape_to_lambdas(0.0, 0.0), DomainError);

  for (double chi = -0.95; chi < 1.0; chi += 0.1) {
    for (double xi = 0.02; xi < 1.0; xi += 0.06) {
      const CSWParams c{1.5, 0.7, chi, xi};
      const CSWParams back = fkml_to_csw(csw_to_fkml(c));
      CHECK(back.mu == doctest::Approx(c.mu).epsilon(1e-10));
      CHECK(back.sigma == doctest::Approx(c.sigma).epsilon(1e-10));
      CHECK(std::fabs(back.chi - chi) <= 1e-10);
      CHECK(std::fabs(back.xi - xi) <= 1e-10);
    }
  }
}

TEST_CASE("GLD quantile identities") {
  std::mt19937_64 eng(5);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int k = 0; k < 100; ++k) {
    const CSWParams c{-5.0 + 10.0 * unif(eng), 0.1 + 3.0 * unif(eng), -0.98 + 1.96 * unif(eng), 0.01 + 0.98 * unif(eng)};
    CHECK(std::fabs(gld_quantile(0.5, c) - c.mu) <= 1e-12);
    CHECK(std::fabs(gld_quantile(0.75, c) - gld_quantile(0.25, c) - c.sigma) <= 1e-12);
    CHECK(gld_quantile(0.3, c) == doctest::Approx(fkml_quantile(0.3, csw_to_fkml(c))).epsilon(1e-10));
  }
  const CSWParams normalish{0.0, 1.3489795003921634, 0.0, 0.3661};
  CHECK(gld_quantile(0.975, normalish) == doctest::Approx(1.959964).epsilon(0.05 / 1.96));
  CHECK_THROWS_AS(gld_quantile(-0.1, normalish), DomainError);
  CHECK_THROWS_AS(gld_quantile(0.5, CSWParams{0.0, -1.0, 0.0, 0.5}), DomainError);
}

TEST_CASE("FKML reduces to Tukey Lambda") {
  for (double lam = -2.0; lam <= 3.0; lam += 0.25) {
    const FKMLParams f{0.0, 1.0, lam, lam};
    for (double u = 0.01; u < 1.0; u += 0.049) CHECK(std::fabs(fkml_quantile(u, f) - tl_quantile(u, lam)) <= 1e-10);
  }
}

TEST_CASE("GLD sampling") {
  const CSWParams c{2.0, 1.5, 0.0, 0.3661};
  const auto x = gld_sample(100000, c, 12);
  CHECK(std::is_sorted(x.begin(), x.end()));
  const double median = (x[49999] + x[50000]) / 2;
  CHECK(std::fabs(median - c.mu) <= 0.03 * c.sigma);
  const double iqr = x[74999] - x[24999];
  CHECK(std::fabs(iqr - c.sigma) <= 0.05 * c.sigma);
  double m = 0, m2 = 0, m3 = 0;
  for (double v : x) m += v;
  m /= x.size();
  for (double v : x) {
    m2 += (v - m) * (v - m);
    m3 += (v - m) * (v - m) * (v - m);
  }
  m2 /= x.size();
  m3 /= x.size();
  CHECK(std::fabs(m3 / std::pow(m2, 1.5)) <= 0.05);
  CHECK(gld_sample(10, c, 1) == gld_sample(10, c, 1));
}

TEST_CASE("quantile and QR intervals") {
  const ConfidenceBand dkw = compute_band({100, 0.05, BandKind::DKW});
  std::vector<double> x(100);
  for (std::size_t i = 0; i < 100; ++i) x[i] = static_cast<double>(i + 1);
  CHECK(first_upper_at_least(dkw, 0.5) == 37);
  CHECK(last_lower_at_most(dkw, 0.5) == 63);
  CHECK(quantile_ci(x, dkw, 0.5) == ExtInterval::between(37.0, 63.0));
  CHECK(quantile_ci(x, vacuous(100), 0.5) == ExtInterval::between(1.0, 100.0));
  const ExtInterval low = quantile_ci(x, dkw, 0.05);
  CHECK(low.lo == 1.0);
  CHECK(low.hi == 18.0);
  CHECK(quantile_ci(x, dkw, 0.999) == ExtInterval::between(87.0, 100.0));

  const ExtInterval sig = qr_ci(x, dkw, 0.75, 0.25);
  CHECK(sig.lo >= 0.0);
  CHECK(sig.contains(50.0));
  // u1, u2 between the same band levels: lower endpoint collapses to 0.
  CHECK(qr_ci(x, dkw, 0.505, 0.5).lo == 0.0);
  CHECK_THROWS_AS(qr_ci(x, dkw, 0.25, 0.75), DomainError);
  CHECK_THROWS_AS(quantile_ci(std::vector<double>(3), dkw, 0.5), std::invalid_argument);
}

TEST_CASE("interval functions equal linear index scans") {
  std::mt19937_64 eng(8);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int rep = 0; rep < 200; ++rep) {
    const std::size_t n = 2 + eng() % 49;
    const ConfidenceBand band = compute_band({n, 0.02 + 0.2 * unif(eng), rep % 2 ? BandKind::DKW : BandKind::DW, 1.0, 1000, 4}, 1);
    const auto x = gld_sample(n, {0.0, 1.0, -0.9 + 1.8 * unif(eng), 0.05 + 0.9 * unif(eng)}, eng());
    const double u = 0.01 + 0.98 * unif(eng);
    CHECK(quantile_ci(x, band, u) == oracle::quantile_ci(x, band, u));
    const double u1 = 0.01 + 0.98 * unif(eng), u2 = u1 * unif(eng);
    CHECK(qr_ci(x, band, u1, u2) == oracle::qr_ci(x, band, u1, u2));
  }
}

TEST_CASE("shape statistic") {
  CHECK(shape_stat(0.75, 0.25, 0.3, 0.2) == doctest::Approx(-1.0).epsilon(1e-14));
  CHECK(std::fabs(shape_stat(0.6, 0.6 - 1e-12, 0.1, 0.4)) <= 1e-9);
  CHECK(shape_stat(0.9, 0.1, 0.0, 0.3) < 0.0);
  CHECK_THROWS_AS(shape_stat(0.1, 0.9, 0.0, 0.3), DomainError);

  // Location and scale cancel.
  const CSWParams a{0.0, 1.0, 0.4, 0.3}, b{5.0, 2.0, 0.4, 0.3};
  const double qa = (gld_quantile(0.2, a) - gld_quantile(0.8, a)) / (gld_quantile(0.75, a) - gld_quantile(0.25, a));
  const double qb = (gld_quantile(0.2, b) - gld_quantile(0.8, b)) / (gld_quantile(0.75, b) - gld_quantile(0.25, b));
  CHECK(qa == doctest::Approx(shape_stat(0.8, 0.2, 0.4, 0.3)).epsilon(1e-12));
  CHECK(qb == doctest::Approx(shape_stat(0.8, 0.2, 0.4, 0.3)).epsilon(1e-12));

  std::vector<double> x(60);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::sqrt(static_cast<double>(i));
  const ConfidenceBand band = compute_band({60, 0.05, BandKind::DKW});
  CHECK(shape_stat_ci(x, band, 0.75, 0.25).contains(-1.0));
  const ExtInterval wide = shape_stat_ci(x, vacuous(60), 0.9, 0.1);
  CHECK(wide.lo == -kInf);
  CHECK(wide.hi == 0.0);
}

TEST_CASE("pair collections") {
  const PairSet rw16 = pairs_rw(16);
  std::set<std::pair<double, double>> expected;
  for (int j = 1; j <= 16; ++j)
    for (int k = j + 1; k <= 16; ++k)
      if (k - j > 4 && k - j < 8) expected.emplace(k / 16.0, j / 16.0);
  CHECK(std::set<std::pair<double, double>>(rw16.pairs.begin(), rw16.pairs.end()) == expected);
  CHECK(rw16.size() == expected.size());
  CHECK_THROWS_AS(pairs_rw(8), std::invalid_argument);
  CHECK_NOTHROW(pairs_rw(9));
  for (std::size_t n : {64u, 128u, 256u}) {
    const PairSet a = pairs_rw(n), b = pairs_rw(2 * n);
    CHECK(static_cast<double>(b.size()) / a.size() <= 3.0);
    for (auto [u1, u2] : b.pairs) CHECK((0.0 < u2 && u2 < u1 && u1 <= 1.0));
  }

  const PairSet grid = pairs_grid(100, 10);
  CHECK(grid.size() == 45);
  const PairSet edge = pairs_edge(100, 10);
  for (const auto& p : edge.pairs) {
    CHECK(std::find(grid.pairs.begin(), grid.pairs.end(), p) != grid.pairs.end());
    CHECK((p.second <= 0.2 || p.first >= 0.8));
  }
  CHECK(pairs_grid(5, 4).size() == 6);
  CHECK(pairs_edge(500, 17).size() == 58);
  CHECK(pairs_edge(100, 10).size() == 30);
  CHECK_THROWS_AS(pairs_grid(10, 10), std::invalid_argument);
  CHECK_THROWS_AS(pairs_grid(10, 1), std::invalid_argument);

  CHECK(parse_pair_spec("edge:17", 500).pairs == pairs_edge(500, 17).pairs);
  CHECK(parse_pair_spec("grid:10", 100).pairs == grid.pairs);
  CHECK(parse_pair_spec("rw", 16).pairs == rw16.pairs);
  CHECK_THROWS_AS(parse_pair_spec("edge:x", 100), std::invalid_argument);
  CHECK_THROWS_AS(parse_pair_spec("ring:4", 100), std::invalid_argument);

  const PairSet custom = PairSet::custom({{0.9, 0.1}, {0.9, 0.1}, {0.6, 0.2}});
  CHECK(custom.size() == 2);
  CHECK_THROWS_AS(PairSet::custom({{0.1, 0.9}}), std::invalid_argument);
}

TEST_CASE("shape region") {
  const CSWParams truth{0.0, 1.0, 0.2, 0.35};
  const auto x = gld_sample(200, truth, 31);
  const ConfidenceBand band = compute_band({200, 0.05, BandKind::DW, 1.0, 2000, 6}, 1);
  const ShapeGrid grid{40, 40};

  const PairSet self = PairSet::custom({{0.75, 0.25}});
  const ShapeRegion all = shape_region(x, band, self, grid);
  CHECK(all.count() == (shape_stat_ci(x, band, 0.75, 0.25).contains(-1.0) ? 1600u : 0u));

  const PairSet small = pairs_edge(200, 10);
  const PairSet large = pairs_grid(200, 10);
  const ShapeRegion rs = shape_region(x, band, small, grid);
  const ShapeRegion rl = shape_region(x, band, large, grid, 2);
  for (std::size_t i = 0; i < rs.mask.size(); ++i) CHECK(rl.mask[i] <= rs.mask[i]);
  CHECK(rl.area == doctest::Approx(rl.count() * rl.chi_step * rl.xi_step).epsilon(1e-14));
  CHECK(region_area(rl) == rl.area);

  // Brute-force mask from the public shape statistic.
  std::vector<ExtInterval> cis;
  for (auto [u1, u2] : large.pairs) cis.push_back(oracle::qr_ci(x, band, u1, u2));
  const ExtInterval iqr = oracle::qr_ci(x, band, 0.75, 0.25);
  for (std::size_t g = 0; g < 40; ++g) {
    for (std::size_t h = 0; h < 40; ++h) {
      bool inside = true;
      for (std::size_t k = 0; k < large.size(); ++k) {
        const double s = shape_stat(large.pairs[k].first, large.pairs[k].second, rl.chi_grid[g], rl.xi_grid[h]);
        const double lo = -(iqr.lo == 0.0 ? kInf : cis[k].hi / iqr.lo);
        const double hi = -(iqr.hi == 0.0 ? (cis[k].lo == 0.0 ? 0.0 : kInf) : cis[k].lo / iqr.hi);
        inside = inside && lo <= s && s <= hi;
      }
      CHECK(rl.inside(g, h) == inside);
    }
  }

  CHECK(rs.nearest_cell(-2.0, 2.0) == std::pair<std::size_t, std::size_t>{0, 39});
  CHECK(rs.nearest_cell(rs.chi_grid[7], rs.xi_grid[9]) == std::pair<std::size_t, std::size_t>{7, 9});
  CHECK_THROWS_AS(shape_region(x, band, PairSet{}, grid), std::invalid_argument);
  CHECK_THROWS_AS(shape_region(x, band, small, ShapeGrid{1, 40}), std::invalid_argument);

  ShapeRegion full;
  full.chi_grid = {-0.5, 0.5};
  full.xi_grid = {0.25, 0.75};
  full.chi_step = 1.0;
  full.xi_step = 0.5;
  full.mask.assign(4, 1);
  CHECK(region_area(full) == 2.0);
  full.mask.assign(4, 0);
  CHECK(region_area(full) == 0.0);

  std::ostringstream csv;
  write_region_csv(rs, csv);
  const std::string text = csv.str();
  CHECK(text.rfind("chi,xi,inside\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 1601);
}

TEST_CASE("edge and grid regions nearly coincide at n = 500") {
  const auto x = gld_sample(500, {0.0, 1.0, 0.0, 0.3661}, 77);
  const ConfidenceBand band = compute_band({500, 0.05, BandKind::DW});
  const ShapeRegion edge = shape_region(x, band, pairs_edge(500, 17), {100, 100});
  const ShapeRegion grid = shape_region(x, band, pairs_grid(500, 17), {100, 100});
  std::size_t same = 0;
  for (std::size_t i = 0; i < edge.mask.size(); ++i) same += edge.mask[i] == grid.mask[i];
  CHECK(static_cast<double>(same) / edge.mask.size() >= 0.95);
}
