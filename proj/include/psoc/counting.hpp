// Orbit counting for b_o and b_tau, entropy from the period spectrum,
// asymptotic fits, the weak triangle check, equidistribution sums and the
// lattice test on the spectrum.
#pragma once

#include "psoc/dynsys.hpp"

#include <cmath>
#include <functional>
#include <map>
#include <numeric>

namespace psoc {

enum class CountMode { b_o, b_tau };

inline const char* to_string(CountMode m) { return m == CountMode::b_o ? "b_o" : "b_tau"; }

inline CountMode parse_count_mode(const std::string& s) {
  if (s == "b_o") return CountMode::b_o;
  if (s == "b_tau") return CountMode::b_tau;
  throw std::invalid_argument("unknown count mode '" + s + "' (expected b_o or b_tau)");
}

/// Orbit values of one sphere. Non-space-like elements are stored at 0 and
/// counted in `exceptional`.
struct SphereValues {
  int L = 0;
  std::vector<double> values;
  std::uint64_t exceptional = 0;
  double minValue = 0.0;
};

/// Value of rho(gamma) for the counting function; sets *exceptional when
/// b_o is undefined (g.o not space-like from o).
inline double orbit_value(const BasepointFrame<double>& fr, const Mat<double>& g, CountMode mode, bool* exceptional) {
  *exceptional = false;
  if (mode == CountMode::b_tau) return b_tau<double>(fr, g);
  auto geo = orbit_geometry<double>(fr, g);
  if (geo.same) return 0.0;
  if (geo.cls != GeodesicClass::spacelike) {
    *exceptional = true;
    return 0.0;
  }
  double s = lambda1<double>(reflected_product<double>(fr, g)) / 2.0;
  return s > 0.0 ? s : 0.0;
}

/// Values over spheres 0..Lmax, sphere-parallel over first-letter partitions.
inline std::vector<SphereValues> evaluate_spheres(const BasepointFrame<double>& fr, const Representation<double>& rho,
                                                  int Lmax, CountMode mode, int threads = 1) {
  if (Lmax < 0) throw std::invalid_argument("evaluate_spheres: Lmax must be >= 0");
  std::vector<SphereValues> out;
  scan_spheres(rho, Lmax, threads, [&](const SphereBlock<double>& block) {
    SphereValues sv;
    sv.L = block.L;
    sv.values.resize(block.size());
    std::vector<std::uint64_t> exc(block.partitions(), 0);
    parallel_for(block.partitions(), threads, [&](std::size_t p) {
      for (std::size_t i = block.partStart[p]; i < block.partStart[p + 1]; ++i) {
        bool e = false;
        sv.values[i] = orbit_value(fr, Mat<double>(block.matrix(i)), mode, &e);
        if (e) ++exc[p];
      }
    });
    sv.exceptional = std::accumulate(exc.begin(), exc.end(), std::uint64_t{0});
    sv.minValue = *std::min_element(sv.values.begin(), sv.values.end());
    out.push_back(std::move(sv));
  });
  return out;
}

struct CountSeries {
  std::string mode;
  int Lmax = 0;
  std::vector<double> tGrid;
  std::vector<std::uint64_t> counts;
  std::vector<bool> complete;
  std::vector<int> certDepth;  // smallest certifying sphere, -1 if none
  std::uint64_t exceptional = 0;
  std::vector<std::uint64_t> exceptionalPerSphere;
  std::vector<double> sphereMin;
};

/// A count at t is certified by sphere L when the minimum value on sphere L
/// exceeds t and the minima of spheres L-2, L-1, L are nondecreasing.
inline int certifying_depth(const std::vector<double>& sphereMin, double t) {
  for (std::size_t L = 2; L < sphereMin.size(); ++L) {
    if (sphereMin[L] > t && sphereMin[L - 2] <= sphereMin[L - 1] && sphereMin[L - 1] <= sphereMin[L])
      return static_cast<int>(L);
  }
  return -1;
}

inline CountSeries count_from_values(const std::vector<SphereValues>& spheres, const std::vector<double>& tGrid,
                                     CountMode mode) {
  for (std::size_t i = 1; i < tGrid.size(); ++i)
    if (!(tGrid[i] > tGrid[i - 1])) throw std::invalid_argument("count series: t grid must be increasing");
  CountSeries s;
  s.mode = to_string(mode);
  s.Lmax = spheres.empty() ? 0 : spheres.back().L;
  s.tGrid = tGrid;
  std::vector<double> all;
  for (const auto& sv : spheres) {
    all.insert(all.end(), sv.values.begin(), sv.values.end());
    s.exceptional += sv.exceptional;
    s.exceptionalPerSphere.push_back(sv.exceptional);
    s.sphereMin.push_back(sv.minValue);
  }
  std::sort(all.begin(), all.end());
  for (double t : tGrid) {
    s.counts.push_back(static_cast<std::uint64_t>(std::upper_bound(all.begin(), all.end(), t) - all.begin()));
    int L = certifying_depth(s.sphereMin, t);
    s.certDepth.push_back(L);
    s.complete.push_back(L >= 0);
  }
  return s;
}

/// min over sampled limit points xi = rho(w)_+ (w cyclically reduced, |w| = L)
/// of |<o^, xi^>| with unit xi^.
inline double limit_margin(const BasepointFrame<double>& fr, const Representation<double>& rho, int L = 6) {
  std::vector<ProjPoint<double>> pts;
  for_each_in_sphere(rho.rank(), L, [&](const Word& w) {
    if (!is_cyclically_reduced(w.letters())) return;
    auto pd = proximal_data<double>(rho.evaluate(w));
    if (pd) pts.push_back(pd->plus);
  });
  return omega_margin<double>(fr, pts);
}

inline void require_margin(const BasepointFrame<double>& fr, const Representation<double>& rho, double tol) {
  double m = limit_margin(fr, rho);
  if (!(m > tol))
    throw DomainError("basepoint margin " + std::to_string(m) + " is not positive: o is outside Omega_rho");
}

inline CountSeries count_series_b_o(const BasepointFrame<double>& fr, const Representation<double>& rho, int Lmax,
                                    const std::vector<double>& tGrid, int threads = 1, double marginTol = 1e-9) {
  require_margin(fr, rho, marginTol);
  return count_from_values(evaluate_spheres(fr, rho, Lmax, CountMode::b_o, threads), tGrid, CountMode::b_o);
}

inline CountSeries count_series_b_tau(const BasepointFrame<double>& fr, const Representation<double>& rho, int Lmax,
                                      const std::vector<double>& tGrid, int threads = 1, double marginTol = 1e-9) {
  require_margin(fr, rho, marginTol);
  return count_from_values(evaluate_spheres(fr, rho, Lmax, CountMode::b_tau, threads), tGrid, CountMode::b_tau);
}

inline std::vector<double> make_grid(double tMin, double tMax, double step) {
  if (!(step > 0) || !(tMax >= tMin)) throw std::invalid_argument("t grid: need step > 0 and t.max >= t.min");
  std::vector<double> g;
  const auto n = static_cast<long>(std::floor((tMax - tMin) / step + 1e-9));
  for (long i = 0; i <= n; ++i) g.push_back(tMin + static_cast<double>(i) * step);
  return g;
}

// ---------------------------------------------------------------------------
// Fits.

struct AsymptoticFit {
  double h = 0.0;
  double M = 0.0;
  double tLo = 0.0;
  double tHi = 0.0;
  double residual = 0.0;  // coefficient of variation of N M e^{-ht} over the window
  std::size_t points = 0;
};

namespace detail {

inline std::pair<double, double> least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  double slope = sxx > 0 ? sxy / sxx : 0.0;
  return {slope, my - slope * mx};
}

inline double coefficient_of_variation(const std::vector<double>& v) {
  const double n = static_cast<double>(v.size());
  double m = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double ss = 0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / n) / m;
}

}  // namespace detail

/// Fits N(t) ~ e^{ht}/M over the top `windowFrac` of the certified t-range.
inline AsymptoticFit fit_asymptotic(const CountSeries& s, std::optional<double> h = std::nullopt,
                                    double windowFrac = 0.4, std::size_t minPoints = 10) {
  if (!(windowFrac > 0 && windowFrac <= 1)) throw std::invalid_argument("fit_asymptotic: window fraction must be in (0,1]");
  std::optional<std::size_t> last;
  for (std::size_t i = 0; i < s.tGrid.size(); ++i)
    if (s.complete[i]) last = i;
  if (!last) throw DomainError("fit_asymptotic: no certified counts");
  const double tHi = s.tGrid[*last];
  const double tLo = tHi - windowFrac * (tHi - s.tGrid.front());
  std::vector<double> ts, ns;
  for (std::size_t i = 0; i <= *last; ++i)
    if (s.complete[i] && s.tGrid[i] >= tLo - 1e-12 && s.counts[i] > 0) {
      ts.push_back(s.tGrid[i]);
      ns.push_back(static_cast<double>(s.counts[i]));
    }
  if (ts.size() < minPoints)
    throw DomainError("fit_asymptotic: only " + std::to_string(ts.size()) + " certified points in the fit window");
  AsymptoticFit f;
  f.tLo = ts.front();
  f.tHi = ts.back();
  f.points = ts.size();
  if (h) {
    if (!(*h > 0)) throw DomainError("fit_asymptotic: exponent must be positive");
    f.h = *h;
    double acc = 0;
    for (std::size_t i = 0; i < ts.size(); ++i) acc += std::exp(f.h * ts[i]) / ns[i];
    f.M = acc / static_cast<double>(ts.size());
  } else {
    std::vector<double> logs;
    for (double n : ns) logs.push_back(std::log(n));
    auto [slope, icpt] = detail::least_squares(ts, logs);
    if (!(slope > 1e-9)) throw DomainError("fit_asymptotic: degenerate series (no exponential growth)");
    f.h = slope;
    f.M = std::exp(-icpt);
  }
  std::vector<double> tail;
  for (std::size_t i = 0; i < ts.size(); ++i) tail.push_back(ns[i] * f.M * std::exp(-f.h * ts[i]));
  f.residual = detail::coefficient_of_variation(tail);
  return f;
}

// ---------------------------------------------------------------------------
// Period spectrum.

struct ClassSpectrum {
  std::vector<CyclicWord> classes;
  std::vector<double> lambda1;
  std::vector<double> minPerLength;  // index = cyclic length, entry 0 unused
};

/// lambda_1(rho(gamma)) for every conjugacy class of cyclic length <= Lmax.
inline ClassSpectrum class_spectrum(const Representation<double>& rho, int Lmax, bool primitiveOnly = true,
                                    int threads = 1) {
  ClassSpectrum out;
  for_each_conjugacy_class(rho.rank(), Lmax, [&](const CyclicWord& c) {
    if (!primitiveOnly || c.primitive()) out.classes.push_back(c);
  });
  out.lambda1.resize(out.classes.size());
  const std::size_t chunk = 256;
  const std::size_t nChunks = (out.classes.size() + chunk - 1) / chunk;
  parallel_for(nChunks, threads, [&](std::size_t c) {
    for (std::size_t i = c * chunk; i < std::min(out.classes.size(), (c + 1) * chunk); ++i)
      out.lambda1[i] = lambda1<double>(rho.evaluate(out.classes[i].word()));
  });
  out.minPerLength.assign(static_cast<std::size_t>(Lmax + 1), std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < out.classes.size(); ++i) {
    auto& m = out.minPerLength[out.classes[i].size()];
    m = std::min(m, out.lambda1[i]);
  }
  return out;
}

struct PeriodEntropy {
  double h = 0.0;
  double tStar = 0.0;  // largest lambda_1 bound at which class enumeration is complete
  double tLo = 0.0;
  std::size_t classes = 0;
  bool degenerate = false;  // growth fits a power law at least as well as an exponential
};

/// Growth rate of #{[gamma] primitive : lambda_1 <= t}. Fits log(t P(t)) against
/// t, since t h e^{-ht} P(t) -> 1.
inline PeriodEntropy entropy_from_periods(const Representation<double>& rho, int Lmax, double windowFrac = 0.4,
                                          int threads = 1, bool primitiveOnly = true) {
  if (Lmax < 4) throw std::invalid_argument("entropy_from_periods: Lmax must be >= 4");
  ClassSpectrum sp = class_spectrum(rho, Lmax, primitiveOnly, threads);
  PeriodEntropy pe;
  pe.classes = sp.classes.size();
  // Completeness bound: the last per-length minimum, once minima stop decreasing.
  const auto& mins = sp.minPerLength;
  const auto top = static_cast<std::size_t>(Lmax);
  if (!(mins[top - 2] <= mins[top - 1] && mins[top - 1] <= mins[top]))
    throw DomainError("entropy_from_periods: per-length minima still decreasing, enumeration not certified");
  const double tStar = mins[top];
  pe.tStar = tStar;
  std::vector<double> vals;
  for (double v : sp.lambda1)
    if (v <= tStar) vals.push_back(v);
  std::sort(vals.begin(), vals.end());
  pe.tLo = (1.0 - windowFrac) * tStar;
  std::vector<double> ts, ys, logT;
  const int nGrid = 64;
  for (int i = 0; i < nGrid; ++i) {
    double t = pe.tLo + (tStar - pe.tLo) * static_cast<double>(i) / (nGrid - 1);
    auto n = static_cast<double>(std::upper_bound(vals.begin(), vals.end(), t) - vals.begin());
    if (n <= 0 || t <= 0) continue;
    ts.push_back(t);
    ys.push_back(std::log(t * n));
    logT.push_back(std::log(t));
  }
  std::size_t inWindow = static_cast<std::size_t>(vals.end() - std::lower_bound(vals.begin(), vals.end(), pe.tLo));
  if (ts.size() < 10 || inWindow < 10)
    throw DomainError("entropy_from_periods: too few classes in the complete window");
  auto [slope, icpt] = detail::least_squares(ts, ys);
  pe.h = slope;
  // Compare with a power law log P = a log t + b.
  std::vector<double> logP;
  for (std::size_t i = 0; i < ts.size(); ++i) logP.push_back(ys[i] - logT[i]);
  auto [pa, pb] = detail::least_squares(logT, logP);
  double resExp = 0, resPow = 0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    resExp += std::pow(ys[i] - (slope * ts[i] + icpt), 2);
    resPow += std::pow(logP[i] - (pa * logT[i] + pb), 2);
  }
  pe.degenerate = !(slope > 0) || resPow <= resExp;
  return pe;
}

// ---------------------------------------------------------------------------
// Weak triangle inequality.

struct WeakTriangleReport {
  double empiricalMax = 0.0;  // max of b_o(f gamma) - b_o(gamma)
  double normConstant = 0.0;  // 1/2 log‖rho(f)‖_tau + 1/2 log‖rho(f^{-1})‖_tau
  double c = 0.0;             // max of b_tau - b_o over the enumerated gamma
  double bound = 0.0;         // normConstant + c
  std::size_t evaluated = 0;
  std::size_t skipped = 0;    // gamma or f gamma with b_o undefined
  bool holds = false;
};

inline WeakTriangleReport weak_triangle_check(const BasepointFrame<double>& fr, const Representation<double>& rho,
                                              const Word& f, int Lmax, int threads = 1) {
  WeakTriangleReport r;
  Mat<double> rf = rho.evaluate(f);
  r.normConstant = 0.5 * std::log(fr.tau().op_norm(rf)) +
                   0.5 * std::log(fr.tau().op_norm(Mat<double>(form_inverse(fr.space(), rf))));
  struct Acc {
    double diff = -std::numeric_limits<double>::infinity();
    double c = -std::numeric_limits<double>::infinity();
    std::size_t ok = 0, skip = 0;
  };
  auto combine = [](const Acc& a, const Acc& b) {
    return Acc{std::max(a.diff, b.diff), std::max(a.c, b.c), a.ok + b.ok, a.skip + b.skip};
  };
  Acc total;
  scan_spheres(rho, Lmax, threads, [&](const SphereBlock<double>& block) {
    Acc a = reduce_sphere<Acc>(
        block, threads, Acc{},
        [&](std::size_t i) {
          Acc x;
          Mat<double> g = block.matrix(i);
          bool e1 = false, e2 = false;
          double bg = orbit_value(fr, g, CountMode::b_o, &e1);
          double bfg = orbit_value(fr, Mat<double>(rf * g), CountMode::b_o, &e2);
          x.c = b_tau<double>(fr, g) - (e1 ? 0.0 : bg);
          if (e1 || e2) {
            x.skip = 1;
            return x;
          }
          x.diff = bfg - bg;
          x.ok = 1;
          return x;
        },
        combine);
    total = combine(total, a);
  });
  r.empiricalMax = total.diff;
  r.c = total.c;
  r.bound = r.normConstant + r.c;
  r.evaluated = total.ok;
  r.skipped = total.skip;
  r.holds = r.empiricalMax <= r.bound + 1e-9 * std::max(1.0, std::abs(r.bound));
  return r;
}

// ---------------------------------------------------------------------------
// Equidistribution of (rho(gamma^{-1}) o^perp, rho(gamma) o).

/// Test function of (unit covector of rho(gamma^{-1}).o^perp, unit vector of rho(gamma).o).
struct TestFunction {
  std::string name;
  std::function<double(const Vec<double>& eta, const Vec<double>& xi)> f;
};

/// f = 1, (e_1^* xi)^2 and (eta e_2)^2.
inline std::vector<TestFunction> builtin_test_functions() {
  return {
      {"one", [](const Vec<double>&, const Vec<double>&) { return 1.0; }},
      {"xi_e1_sq", [](const Vec<double>&, const Vec<double>& xi) { return xi(0) * xi(0); }},
      {"eta_e2_sq", [](const Vec<double>& eta, const Vec<double>&) { return eta(1) * eta(1); }},
  };
}

struct EquidistributionTable {
  std::vector<std::string> names;
  std::vector<double> t;
  std::vector<bool> complete;
  std::vector<std::vector<double>> columns;  // one per test function
};

inline EquidistributionTable equidistribution_stat(const BasepointFrame<double>& fr, const Representation<double>& rho,
                                                   const std::vector<TestFunction>& fns, CountMode mode, double h,
                                                   double M, int Lmax, const std::vector<double>& tGrid,
                                                   int threads = 1) {
  const std::size_t nf = fns.size();
  std::vector<std::pair<double, std::vector<double>>> rows;
  std::vector<double> sphereMin;
  const QSpace& sp = fr.space();
  Vec<double> oh = fr.o_hat();
  scan_spheres(rho, Lmax, threads, [&](const SphereBlock<double>& block) {
    std::vector<std::pair<double, std::vector<double>>> local(block.size());
    parallel_for(block.partitions(), threads, [&](std::size_t p) {
      for (std::size_t i = block.partStart[p]; i < block.partStart[p + 1]; ++i) {
        Mat<double> g = block.matrix(i);
        bool e = false;
        double v = orbit_value(fr, g, mode, &e);
        // rho(gamma^{-1}).o^perp has covector F g^{-1} o up to the form; use the form inverse.
        Vec<double> eta = sp.lower<double>(Vec<double>(form_inverse(sp, g) * oh));
        Vec<double> xi = g * oh;
        eta /= eta.norm();
        xi /= xi.norm();
        std::vector<double> fv(nf);
        for (std::size_t k = 0; k < nf; ++k) fv[k] = fns[k].f(eta, xi);
        local[i] = {v, std::move(fv)};
      }
    });
    double m = std::numeric_limits<double>::infinity();
    for (const auto& r : local) m = std::min(m, r.first);
    sphereMin.push_back(m);
    rows.insert(rows.end(), std::make_move_iterator(local.begin()), std::make_move_iterator(local.end()));
  });
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  EquidistributionTable tab;
  for (const auto& f : fns) tab.names.push_back(f.name);
  tab.columns.assign(nf, {});
  std::vector<double> acc(nf, 0.0);
  std::size_t j = 0;
  for (double t : tGrid) {
    while (j < rows.size() && rows[j].first <= t) {
      for (std::size_t k = 0; k < nf; ++k) acc[k] += rows[j].second[k];
      ++j;
    }
    tab.t.push_back(t);
    tab.complete.push_back(certifying_depth(sphereMin, t) >= 0);
    for (std::size_t k = 0; k < nf; ++k) tab.columns[k].push_back(M * std::exp(-h * t) * acc[k]);
  }
  return tab;
}

// ---------------------------------------------------------------------------
// Lattice test on the length spectrum.

struct LatticeVerdict {
  bool lattice = false;
  double bestA = 0.0;     // largest a passing the test, or the a with smallest defect
  double bestDefect = 0.0;
  std::size_t values = 0;
};

/// For each a >= aMin in the grid, the defect max_i dist(values_i, aZ). The
/// set is declared lattice iff some defect is <= tol.
inline LatticeVerdict lattice_scan(const std::vector<double>& values, const std::vector<double>& aGrid,
                                   double aMin = 0.05, double tol = 1e-6) {
  if (values.empty()) throw DomainError("lattice_scan: no values");
  LatticeVerdict v;
  v.values = values.size();
  v.bestDefect = std::numeric_limits<double>::infinity();
  for (double a : aGrid) {
    if (a < aMin) continue;
    double defect = 0;
    for (double x : values) {
      defect = std::max(defect, std::abs(x - a * std::round(x / a)));
      if (defect > tol && v.lattice) break;
    }
    if (defect <= tol) {
      if (!v.lattice || a > v.bestA) {
        v.bestA = a;
        v.bestDefect = defect;
      }
      v.lattice = true;
    } else if (!v.lattice && defect < v.bestDefect) {
      v.bestDefect = defect;
      v.bestA = a;
    }
  }
  return v;
}

/// Distinct lambda_1 values (relative tolerance 1e-9) of primitive classes up to Lmax.
inline std::vector<double> distinct_spectrum(const Representation<double>& rho, int Lmax, int threads = 1) {
  ClassSpectrum sp = class_spectrum(rho, Lmax, true, threads);
  std::vector<double> v = sp.lambda1;
  std::sort(v.begin(), v.end());
  std::vector<double> out;
  for (double x : v)
    if (out.empty() || std::abs(x - out.back()) > 1e-9 * std::max(1.0, std::abs(x))) out.push_back(x);
  return out;
}

inline LatticeVerdict spectrum_lattice_test(const Representation<double>& rho, int Lmax,
                                            const std::vector<double>& aGrid, double aMin = 0.05,
                                            double tol = 1e-6, int threads = 1) {
  auto vals = distinct_spectrum(rho, Lmax, threads);
  if (vals.size() < 20)
    throw DomainError("spectrum_lattice_test: only " + std::to_string(vals.size()) + " distinct values");
  return lattice_scan(vals, aGrid, aMin, tol);
}

}  // namespace psoc
