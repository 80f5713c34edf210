#include <catch2/catch_amalgamated.hpp>

#include "fixtures.hpp"

#include <cmath>
#include <random>

using namespace psoc;
using Catch::Approx;

namespace {

/// Counts over an exact series, all flagged complete.
CountSeries synthetic_series(const std::vector<double>& t, const std::function<double(double)>& n) {
  CountSeries s;
  s.mode = "b_o";
  s.tGrid = t;
  for (double x : t) {
    s.counts.push_back(static_cast<std::uint64_t>(n(x)));
    s.complete.push_back(true);
    s.certDepth.push_back(0);
  }
  return s;
}

double mean_over(const std::vector<double>& v, const std::vector<double>& t, double lo, double hi) {
  double acc = 0;
  int n = 0;
  for (std::size_t i = 0; i < t.size(); ++i)
    if (t[i] >= lo && t[i] <= hi) {
      acc += v[i];
      ++n;
    }
  return acc / n;
}

double cv_over(const std::vector<double>& v, const std::vector<double>& t, double lo, double hi) {
  std::vector<double> w;
  for (std::size_t i = 0; i < t.size(); ++i)
    if (t[i] >= lo && t[i] <= hi) w.push_back(v[i]);
  return detail::coefficient_of_variation(w);
}

Representation<double> conjugated(const Representation<double>& rho, const Mat<double>& u) {
  std::vector<Mat<double>> gens;
  for (const auto& g : rho.generators()) gens.push_back(u * g * form_inverse(rho.space(), u));
  return Representation<double>(rho.space(), gens);
}

/// Deformed group with a basepoint near e_4: a few orbit points are not space-like from o.
struct Exceptional {
  Representation<double> rho = deform(fx::reference22(), 0.5, 5);
  BasepointFrame<double> frame =
      make_frame<double>(QSpace(2, 2), Vec<double>(std::cos(1.55) * fx::unit(4, 2) + std::sin(1.55) * fx::unit(4, 3)));
};

}  // namespace

TEST_CASE("small-ball counts match an exhaustive scan", "[counting]") {
  auto rho = fx::reference22(4.0, 4.0);
  auto fr = fx::reference_frame();
  const std::vector<double> t{0.0, 3.9, 4.1, 7.5, 8.1, 9.0, 11.0, 12.5};
  // Independent count over ball(3) with acosh|<o, g o>| in SO(2,1) (numpy).
  const std::vector<std::uint64_t> expect{1, 1, 5, 13, 17, 17, 33, 53};
  auto so = count_series_b_o(fr, rho, 3, t);
  auto st = count_series_b_tau(fr, rho, 3, t);
  CHECK(so.counts == expect);
  CHECK(st.counts == expect);
  CHECK(st.counts[0] == 1);
  CHECK(so.exceptional == 0);
  CHECK(so.complete[1]);
  CHECK(so.certDepth[1] == 2);
  CHECK_FALSE(so.complete.back());

  // The (4, 4 sqrt 2) group at the same depth.
  auto ref = count_series_b_o(fr, fx::reference22(), 3, t);
  CHECK(ref.counts == std::vector<std::uint64_t>{1, 1, 3, 5, 7, 15, 15, 27});
}

TEST_CASE("series invariants", "[counting]") {
  auto grid = make_grid(0.0, 30.0, 0.1);
  std::vector<std::pair<Representation<double>, BasepointFrame<double>>> cases{
      {fx::reference22(), fx::reference_frame()},
      {deform(fx::reference22(), 0.05, 5), fx::tilted_frame()},
      {fx::schottky21(), fx::frame21()}};
  for (const auto& [rho, fr] : cases) {
    auto so = count_series_b_o(fr, rho, 7, grid);
    auto st = count_series_b_tau(fr, rho, 7, grid);
    REQUIRE(so.counts.size() == grid.size());
    CHECK(so.counts.front() >= 1);
    for (std::size_t i = 1; i < grid.size(); ++i) {
      CHECK(so.counts[i] >= so.counts[i - 1]);
      CHECK(st.counts[i] >= st.counts[i - 1]);
      // Certified t form an initial segment.
      if (so.complete[i]) CHECK(so.complete[i - 1]);
    }
    // b_tau >= b_o, so fewer group elements lie below any t.
    for (std::size_t i = 0; i < grid.size(); ++i)
      if (so.complete[i] && st.complete[i]) CHECK(st.counts[i] <= so.counts[i]);
    CHECK(st.exceptional == 0);
    CHECK(so.counts.back() <= ball_size(rho.rank(), 7));
  }
}

TEST_CASE("certified counts are stable under deeper enumeration", "[counting]") {
  auto grid = make_grid(0.0, 40.0, 0.05);
  for (const auto& fr : {fx::reference_frame(), fx::tilted_frame()}) {
    auto rho = deform(fx::reference22(), 0.05, 5);
    for (auto mode : {CountMode::b_o, CountMode::b_tau}) {
      auto prev = count_from_values(evaluate_spheres(fr, rho, 2, mode), grid, mode);
      for (int L = 3; L <= 8; ++L) {
        auto cur = count_from_values(evaluate_spheres(fr, rho, L, mode), grid, mode);
        std::size_t certified = 0;
        for (std::size_t i = 0; i < grid.size(); ++i) {
          if (!prev.complete[i]) continue;
          ++certified;
          CHECK(cur.complete[i]);
          CHECK(cur.counts[i] == prev.counts[i]);
        }
        CHECK(certified > 0);
        prev = cur;
      }
    }
  }
}

TEST_CASE("evaluation does not depend on the thread count", "[counting]") {
  auto rho = deform(fx::reference22(), 0.05, 5);
  auto fr = fx::tilted_frame();
  auto a = evaluate_spheres(fr, rho, 6, CountMode::b_o, 1);
  auto b = evaluate_spheres(fr, rho, 6, CountMode::b_o, 3);
  REQUIRE(a.size() == b.size());
  for (std::size_t L = 0; L < a.size(); ++L) {
    CHECK(a[L].values == b[L].values);
    CHECK(a[L].minValue == b[L].minValue);
  }
}

TEST_CASE("exceptional bucket", "[counting]") {
  Exceptional ex;
  REQUIRE(limit_margin(ex.frame, ex.rho) > 0.0);
  auto spheres = evaluate_spheres(ex.frame, ex.rho, 8, CountMode::b_o);
  std::uint64_t total = 0;
  for (const auto& s : spheres) {
    if (s.L >= 4) CHECK(s.exceptional == 0);
    total += s.exceptional;
  }
  CHECK(total > 0);
  auto s1 = count_from_values(spheres, make_grid(0.0, 10.0, 0.5), CountMode::b_o);
  auto s2 = count_from_values(spheres, make_grid(0.0, 30.0, 0.25), CountMode::b_o);
  CHECK(s1.exceptional == total);
  CHECK(s2.exceptional == total);
  // Exceptional elements sit at value 0 with the identity.
  CHECK(s1.counts.front() >= 1 + total);
  // b_tau has no exceptional bucket.
  auto st = count_from_values(evaluate_spheres(ex.frame, ex.rho, 8, CountMode::b_tau), make_grid(0.0, 10.0, 0.5),
                              CountMode::b_tau);
  CHECK(st.exceptional == 0);
}

TEST_CASE("count errors", "[counting]") {
  auto rho = fx::reference22();
  auto bad = make_frame<double>(rho.space(), fx::unit(4, 3));
  CHECK_THROWS_AS(count_series_b_o(bad, rho, 3, {0.0, 1.0}), DomainError);
  CHECK_THROWS_AS(count_series_b_tau(bad, rho, 3, {0.0, 1.0}), DomainError);
  CHECK_THROWS_AS(count_series_b_o(fx::reference_frame(), rho, 3, {1.0, 0.5}), std::invalid_argument);
  CHECK_THROWS_AS(evaluate_spheres(fx::reference_frame(), rho, -1, CountMode::b_o), std::invalid_argument);
  CHECK_THROWS_AS(make_grid(0.0, 1.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(make_grid(2.0, 1.0, 0.1), std::invalid_argument);
  CHECK(make_grid(0.0, 1.0, 0.25).size() == 5);
  CHECK(parse_count_mode("b_tau") == CountMode::b_tau);
  CHECK_THROWS_AS(parse_count_mode("tau"), std::invalid_argument);
  // A t-grid past the certified range: the fit refuses the uncertified tail.
  auto s = count_series_b_o(fx::reference_frame(), rho, 2, make_grid(0.0, 40.0, 0.5));
  CHECK_FALSE(s.complete.back());
  CHECK_THROWS_AS(fit_asymptotic(s), DomainError);
}

TEST_CASE("asymptotic fit on synthetic data", "[counting]") {
  auto t = make_grid(0.0, 30.0, 0.1);
  auto s = synthetic_series(t, [](double x) { return std::ceil(std::exp(0.7 * x) / 3.0); });
  auto f = fit_asymptotic(s);
  CHECK(f.h == Approx(0.7).epsilon(0.05));
  CHECK(f.M == Approx(3.0).epsilon(0.05));
  CHECK(f.tHi == Approx(30.0));
  CHECK(f.tLo == Approx(18.0).margin(0.11));
  CHECK(f.residual < 1e-3);
  auto g = fit_asymptotic(s, 0.7);
  CHECK(g.M == Approx(3.0).epsilon(0.05));
  CHECK(g.h == 0.7);

  // Exact exponential data is recovered to rounding.
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> uh(0.2, 1.5), um(0.5, 10.0);
  for (int trial = 0; trial < 20; ++trial) {
    double h = uh(rng), M = um(rng);
    auto tt = make_grid(0.0, 40.0 / h, 0.5 / h);
    auto exact = synthetic_series(tt, [&](double x) { return std::ceil(std::exp(h * x) / M); });
    auto e = fit_asymptotic(exact);
    CHECK(e.h == Approx(h).epsilon(0.05));
    CHECK(e.M == Approx(M).epsilon(0.05));
  }

  auto flat = synthetic_series(t, [](double) { return 7.0; });
  CHECK_THROWS_AS(fit_asymptotic(flat), DomainError);
  CHECK_THROWS_AS(fit_asymptotic(s, -1.0), DomainError);
  CHECK_THROWS_AS(fit_asymptotic(s, std::nullopt, 0.0), std::invalid_argument);
  auto shortS = synthetic_series(make_grid(0.0, 1.0, 0.25), [](double x) { return std::exp(x); });
  CHECK_THROWS_AS(fit_asymptotic(shortS), DomainError);
}

TEST_CASE("period entropy", "[counting]") {
  auto rho = fx::reference22(4.0, 4.0);
  auto pe = entropy_from_periods(rho, 12);
  CHECK(pe.h > 0.0);
  CHECK_FALSE(pe.degenerate);
  CHECK(pe.tStar > pe.tLo);

  // Conjugation invariance.
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 3; ++trial) {
    Mat<double> u = random_group_element(rho.space(), rng, 0.3);
    auto pc = entropy_from_periods(conjugated(rho, u), 12);
    CHECK(pc.h == Approx(pe.h).epsilon(0.02));
  }

  // A cyclic group: the count grows linearly.
  Representation<double> cyc(rho.space(), {rho.generator(0)});
  auto lin = entropy_from_periods(cyc, 40, 0.4, 1, false);
  CHECK(lin.degenerate);
  CHECK(lin.h < 0.05);
  CHECK_THROWS_AS(entropy_from_periods(cyc, 40), DomainError);
  CHECK_THROWS_AS(entropy_from_periods(rho, 3), std::invalid_argument);
}

TEST_CASE("exponents agree on the reference run", "[counting]") {
  auto rho = fx::reference22();
  auto fr = fx::reference_frame();
  const double hp = entropy_from_periods(rho, 12).h;
  auto grid = make_grid(0.0, 35.95, 0.05);
  auto fo = fit_asymptotic(count_series_b_o(fr, rho, 9, grid));
  auto ft = fit_asymptotic(count_series_b_tau(fr, rho, 9, grid));
  CHECK(fo.h == Approx(hp).epsilon(0.15));
  CHECK(ft.h == Approx(hp).epsilon(0.15));
  CHECK(fo.h == Approx(ft.h).epsilon(0.15));
  CHECK(fo.residual < 0.25);

  // The tail statistic flattens as the window moves right.
  double prev = std::numeric_limits<double>::infinity();
  for (int L : {7, 9, 11}) {
    auto g = make_grid(0.0, 4.0 * L - 0.05, 0.05);
    auto f = fit_asymptotic(count_series_b_o(fr, rho, L, g), hp);
    CHECK(f.residual < prev);
    prev = f.residual;
  }
}

TEST_CASE("weak triangle inequality", "[counting]") {
  for (const auto& [rho, fr] : std::vector<std::pair<Representation<double>, BasepointFrame<double>>>{
           {fx::reference22(), fx::reference_frame()}, {deform(fx::reference22(), 0.05, 5), fx::tilted_frame()}}) {
    auto id = weak_triangle_check(fr, rho, Word{}, 6);
    CHECK(id.empiricalMax == 0.0);
    CHECK(id.normConstant == Approx(0.0).margin(1e-12));
    CHECK(id.holds);
    for (const char* f : {"a", "b", "ab", "Ab"}) {
      Word w = Word::parse(f, 2);
      auto r6 = weak_triangle_check(fr, rho, w, 6);
      auto r8 = weak_triangle_check(fr, rho, w, 8);
      CHECK(r6.holds);
      CHECK(r8.holds);
      CHECK(r8.empiricalMax <= r8.bound + 1e-9);
      CHECK(r8.empiricalMax >= r6.empiricalMax);
      CHECK(r8.c >= -1e-9);
      CHECK(r8.evaluated + r8.skipped == ball_size(2, 8));
      // The bound stops moving once the enumeration is large.
      CHECK(r8.bound == Approx(r6.bound).epsilon(1e-3));
    }
  }
}

TEST_CASE("equidistribution statistic", "[counting]") {
  auto rho = fx::reference22();
  auto fr = fx::reference_frame();
  auto grid = make_grid(0.0, 35.95, 0.05);
  auto series = count_series_b_o(fr, rho, 9, grid);
  auto fit = fit_asymptotic(series);
  auto fns = builtin_test_functions();
  auto tab = equidistribution_stat(fr, rho, fns, CountMode::b_o, fit.h, fit.M, 9, grid);
  REQUIRE(tab.columns.size() == 3);
  CHECK(tab.names == std::vector<std::string>{"one", "xi_e1_sq", "eta_e2_sq"});
  for (std::size_t i = 0; i < grid.size(); ++i) {
    // f = 1 is the normalized count.
    CHECK(tab.columns[0][i] ==
          Approx(fit.M * std::exp(-fit.h * grid[i]) * static_cast<double>(series.counts[i])).epsilon(1e-12));
    CHECK(tab.complete[i] == series.complete[i]);
    CHECK(tab.columns[1][i] <= tab.columns[0][i] + 1e-12);
    CHECK(tab.columns[2][i] <= tab.columns[0][i] + 1e-12);
  }
  CHECK(mean_over(tab.columns[0], grid, fit.tLo, fit.tHi) == Approx(1.0).epsilon(0.05));
  for (std::size_t k = 0; k < 3; ++k) CHECK(cv_over(tab.columns[k], grid, fit.tLo, fit.tHi) < 0.2);
  const double m1 = mean_over(tab.columns[1], grid, fit.tLo, fit.tHi);
  const double m2 = mean_over(tab.columns[2], grid, fit.tLo, fit.tHi);
  CHECK(std::abs(m1 - m2) > 0.05 * std::max(m1, m2));
}

TEST_CASE("lattice test", "[counting]") {
  std::vector<double> aGrid;
  for (int i = 1; i <= 100000; ++i) aGrid.push_back(1e-4 * i);
  auto v = lattice_scan({1.0, 2.0, 3.0}, aGrid);
  CHECK(v.lattice);
  CHECK(v.bestA == Approx(1.0).epsilon(1e-9));
  CHECK(v.bestDefect < 1e-6);
  CHECK_FALSE(lattice_scan({1.0, std::sqrt(2.0)}, aGrid).lattice);
  CHECK_FALSE(lattice_scan({1.0, 2.0, 3.0}, aGrid, 1.5).lattice);
  CHECK_THROWS_AS(lattice_scan({}, aGrid), DomainError);

  auto rho = fx::reference22();
  auto vals = distinct_spectrum(rho, 8);
  CHECK(vals.size() >= 20);
  CHECK(vals.front() == Approx(4.0).epsilon(1e-12));
  CHECK(std::is_sorted(vals.begin(), vals.end()));
  auto verdict = spectrum_lattice_test(rho, 8, aGrid);
  CHECK_FALSE(verdict.lattice);
  CHECK(verdict.bestDefect > 1e-3);
  // One generator: too few distinct values.
  Representation<double> cyc(rho.space(), {rho.generator(0)});
  CHECK_THROWS_AS(spectrum_lattice_test(cyc, 8, aGrid), DomainError);
}
