#include "commands.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <cmath>
#include <cstring>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>

namespace psoc::cli {

namespace fs = std::filesystem;
using nlohmann::json;

void apply_overrides(ExperimentConfig& c, const Overrides& o) {
  if (o.Lmax) {
    if (*o.Lmax < 0) throw ConfigError("--Lmax", 0, "must be >= 0");
    c.Lmax = *o.Lmax;
  }
  if (o.out) c.out = *o.out;
  if (o.seed) c.seed = *o.seed;
  if (o.threads) {
    if (*o.threads < 1) throw ConfigError("--threads", 0, "must be >= 1");
    c.threads = *o.threads;
  }
}

namespace {

Word random_word(std::mt19937_64& rng, int k, int maxLen, int minLen = 0) {
  std::uniform_int_distribution<int> len(minLen, maxLen);
  std::uniform_int_distribution<int> let(0, 2 * k - 1);
  std::vector<Letter> ls;
  const int n = len(rng);
  while (static_cast<int>(ls.size()) < n) {
    auto l = static_cast<Letter>(let(rng));
    if (!ls.empty() && ls.back() == inverse_letter(l)) continue;
    ls.push_back(l);
  }
  return Word::from_reduced(ls);
}

BoundaryPoint<double> random_point(const Representation<double>& rho, std::mt19937_64& rng) {
  Word core;
  do {
    core = random_word(rng, rho.rank(), 3, 1);
  } while (!is_cyclically_reduced(core.letters()));
  return boundary_point<double>(rho, random_word(rng, rho.rank(), 3), core);
}

double rel(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

struct Tracker {
  SuiteResult r;
  Tracker(std::string name, double tol) {
    r.name = std::move(name);
    r.tolerance = tol;
  }
  void add(double residual) {
    ++r.cases;
    if (!(residual <= r.worst)) r.worst = std::isnan(residual) ? INFINITY : residual;
  }
  SuiteResult done() {
    r.pass = r.worst <= r.tolerance;
    if (r.cases == 0) r.note = r.note.empty() ? "no applicable cases" : r.note + "; no applicable cases";
    return r;
  }
};

SuiteResult suite_margin(const ExperimentConfig& c, const Representation<double>& rho,
                         const BasepointFrame<double>& fr) {
  SuiteResult r;
  r.name = "omega_membership";
  r.tolerance = c.tol.margin;
  r.worst = limit_margin(fr, rho);
  r.cases = 1;
  r.pass = r.worst > c.tol.margin;
  r.note = fmt::format("margin min |<o, xi>| over sampled limit points = {:.6g}", r.worst);
  return r;
}

SuiteResult suite_b_o_formula(const ExperimentConfig& c, const Representation<double>& rho,
                              const BasepointFrame<double>& fr) {
  Tracker t("b_o_formula", c.tol.identity);
  std::size_t other = 0;
  scan_spheres(rho, std::min(c.Lmax, 8), c.threads, [&](const SphereBlock<double>& block) {
    for (std::size_t i = 0; i < block.size(); ++i) {
      Mat<double> g = block.matrix(i);
      auto geo = orbit_geometry<double>(fr, g);
      if (geo.same || geo.cls != GeodesicClass::spacelike) {
        ++other;
        continue;
      }
      // g o^ keeps self-pairing -1, so the closed form applies without renormalizing.
      const double l = std::acosh(std::abs(form_eval<double>(fr.space(), fr.o_hat(), Vec<double>(g * fr.o_hat()))));
      t.add(rel(b_o<double>(fr, g), l));
    }
  });
  t.r.note = fmt::format("{} elements skipped (identity or not space-like)", other);
  return t.done();
}

SuiteResult suite_decompositions(const ExperimentConfig& c, const BasepointFrame<double>& fr, std::mt19937_64& rng) {
  Tracker t("decompositions", c.tol.identity);
  for (int i = 0; i < c.samples; ++i) {
    Mat<double> g = random_group_element(fr.space(), rng, 0.6);
    auto kb = decompose_KBH<double>(fr, g);
    t.add(kb.residual);
    t.add(rel(kb.s, b_tau<double>(fr, g)));
    // A constructed H exp(X) H element, so the space-like branch is always exercised.
    const double s = 0.1 + 3.0 * std::uniform_real_distribution<double>()(rng);
    Mat<double> h = random_stabilizer(fr, rng, 0.7) * fr.model_boost(s) * random_stabilizer(fr, rng, 0.7);
    auto hb = decompose_HBH<double>(fr, h);
    t.add(hb.residual);
    t.add(rel(hb.s, b_o<double>(fr, h)));
  }
  return t.done();
}

SuiteResult suite_cocycles(const ExperimentConfig& c, const Representation<double>& rho,
                           const BasepointFrame<double>& fr, std::mt19937_64& rng) {
  Tracker t("cocycle_laws", c.tol.identity);
  for (int i = 0; i < c.samples; ++i) {
    Word g0 = random_word(rng, rho.rank(), 3), g1 = random_word(rng, rho.rank(), 3);
    auto x = random_point(rho, rng);
    auto g1x = translate(rho, g1, x);
    Word g01 = multiply(g0, g1);
    t.add(rel(cocycle_c_o(fr, rho, g01, x), cocycle_c_o(fr, rho, g0, g1x) + cocycle_c_o(fr, rho, g1, x)));
    t.add(rel(cocycle_c_tau(fr, rho, g01, x), cocycle_c_tau(fr, rho, g0, g1x) + cocycle_c_tau(fr, rho, g1, x)));
    auto g0x = translate(rho, g0, x);
    t.add(rel(cocycle_c_tau(fr, rho, g0, x) - cocycle_c_o(fr, rho, g0, x),
              cohomology_U(fr, g0x) - cohomology_U(fr, x)));
  }
  return t.done();
}

SuiteResult suite_periods(const ExperimentConfig& c, const Representation<double>& rho,
                          const BasepointFrame<double>& fr) {
  Tracker t("periods", c.tol.period);
  for_each_conjugacy_class(rho.rank(), 6, [&](const CyclicWord& cw) {
    if (!cw.primitive()) return;
    Word w = cw.word();
    const double l1 = lambda1<double>(rho.evaluate(w));
    auto [plus, minus] = fixed_boundary_points(rho, w);
    t.add(std::abs(cocycle_c_o(fr, rho, w, plus) - l1) / l1);
    t.add(std::abs(cocycle_c_tau(fr, rho, w, plus) - l1) / l1);
    t.add(std::abs(cocycle_c_o(fr, rho, inverse(w), minus) - l1) / l1);
  });
  return t.done();
}

SuiteResult suite_gromov(const ExperimentConfig& c, const Representation<double>& rho,
                         const BasepointFrame<double>& fr, std::mt19937_64& rng) {
  Tracker t("gromov", c.tol.identity);
  std::size_t degenerate = 0;
  for (int i = 0; i < c.samples; ++i) {
    auto x = random_point(rho, rng), y = random_point(rho, rng);
    Word g = random_word(rng, rho.rank(), 3);
    double go = 0;
    try {
      go = gromov_o(fr, rho, x, y);
    } catch (const TransversalityError&) {
      ++degenerate;
      continue;
    }
    auto gx = translate(rho, g, x), gy = translate(rho, g, y);
    t.add(rel(gromov_o(fr, rho, y, x), go));
    t.add(rel(gromov_o(fr, rho, gx, gy) - go, -(cocycle_c_o(fr, rho, g, x) + cocycle_c_o(fr, rho, g, y))));
    const double gt = gromov_tau(fr, rho, x, y);
    t.add(rel(gromov_tau(fr, rho, gx, gy) - gt, -(cocycle_c_o(fr, rho, g, x) + cocycle_c_tau(fr, rho, g, y))));
    t.add(rel(gt - go, -cohomology_U(fr, y)));
  }
  t.r.note = fmt::format("{} equal pairs skipped", degenerate);
  return t.done();
}

SuiteResult suite_fixed_points(const ExperimentConfig& c, const Representation<double>& rho,
                               const BasepointFrame<double>& fr) {
  Tracker t("fixed_points", c.tol.fixedPoint);
  for_each_conjugacy_class(rho.rank(), 6, [&](const CyclicWord& cw) {
    Word w = cw.word();
    auto [plus, minus] = fixed_boundary_points(rho, w);
    auto fp = fixed_point_data<double>(rho.space(), rho.evaluate(w));
    const double bb = reflected_cross_ratio(fr, fp);
    t.add(rel(gromov_o(fr, rho, minus, plus), -bb / 2));
    t.add(rel(gromov_tau(fr, rho, minus, plus), -bb / 2 + reflected_gscript(fr, fp) / 2));
  });
  return t.done();
}

}  // namespace

std::vector<SuiteResult> run_suites(const ExperimentConfig& c, const Representation<double>& rho,
                                    const BasepointFrame<double>& fr) {
  std::vector<SuiteResult> out;
  std::mt19937_64 rng(c.seed);
  out.push_back(suite_margin(c, rho, fr));
  out.push_back(suite_b_o_formula(c, rho, fr));
  out.push_back(suite_decompositions(c, fr, rng));
  const bool inOmega = out.front().pass;
  struct Boundary {
    std::string name;
    double tol;
    std::function<SuiteResult()> run;
  };
  const std::vector<Boundary> boundary{
      {"cocycle_laws", c.tol.identity, [&] { return suite_cocycles(c, rho, fr, rng); }},
      {"periods", c.tol.period, [&] { return suite_periods(c, rho, fr); }},
      {"gromov", c.tol.identity, [&] { return suite_gromov(c, rho, fr, rng); }},
      {"fixed_points", c.tol.fixedPoint, [&] { return suite_fixed_points(c, rho, fr); }}};
  for (const auto& b : boundary) {
    SuiteResult r;
    r.name = b.name;
    r.tolerance = b.tol;
    if (!inOmega) {
      r.note = "not run: basepoint outside Omega_rho";
    } else {
      try {
        r = b.run();
      } catch (const DomainError& e) {
        r.note = e.what();
      }
    }
    out.push_back(r);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Cache.

namespace {

constexpr char kMagic[8] = {'P', 'S', 'O', 'C', 'S', 'P', 'H', '\0'};

template <class V>
void put(std::ostream& os, const V& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class V>
bool get(std::istream& is, V& v) {
  return static_cast<bool>(is.read(reinterpret_cast<char*>(&v), sizeof v));
}

void ensure_dir(const fs::path& p) {
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw std::runtime_error("cannot create directory '" + p.string() + "': " + ec.message());
}

void write_text(const fs::path& file, const std::string& text) {
  ensure_dir(file.parent_path());
  std::ofstream os(file, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write '" + file.string() + "'");
  os << text;
}

}  // namespace

fs::path cache_path(const fs::path& outDir, std::uint64_t key, CountMode mode, int L) {
  return outDir / "cache" / fmt::format("{:016x}_{}_L{:02d}.bin", key, to_string(mode), L);
}

void write_sphere_cache(const fs::path& file, std::uint64_t key, CountMode mode, const SphereValues& sv) {
  ensure_dir(file.parent_path());
  fs::path tmp = file;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write cache file '" + tmp.string() + "'");
    os.write(kMagic, sizeof kMagic);
    put(os, kCacheVersion);
    put(os, key);
    put(os, static_cast<std::uint8_t>(mode));
    put(os, static_cast<std::int32_t>(sv.L));
    put(os, static_cast<std::uint64_t>(sv.exceptional));
    put(os, sv.minValue);
    put(os, static_cast<std::uint64_t>(sv.values.size()));
    os.write(reinterpret_cast<const char*>(sv.values.data()),
             static_cast<std::streamsize>(sv.values.size() * sizeof(double)));
  }
  fs::rename(tmp, file);
}

std::optional<SphereValues> read_sphere_cache(const fs::path& file, std::uint64_t key, CountMode mode, int L) {
  std::ifstream is(file, std::ios::binary);
  if (!is) return std::nullopt;
  char magic[sizeof kMagic];
  std::uint32_t version = 0;
  std::uint64_t k = 0, exc = 0, n = 0;
  std::uint8_t m = 0;
  std::int32_t l = 0;
  double minValue = 0;
  if (!is.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof kMagic) != 0) return std::nullopt;
  if (!get(is, version) || version != kCacheVersion) return std::nullopt;
  if (!get(is, k) || k != key) return std::nullopt;
  if (!get(is, m) || m != static_cast<std::uint8_t>(mode)) return std::nullopt;
  if (!get(is, l) || l != L) return std::nullopt;
  if (!get(is, exc) || !get(is, minValue) || !get(is, n)) return std::nullopt;
  if (n > (1ull << 32)) return std::nullopt;
  SphereValues sv;
  sv.L = L;
  sv.exceptional = exc;
  sv.minValue = minValue;
  sv.values.resize(n);
  if (!is.read(reinterpret_cast<char*>(sv.values.data()), static_cast<std::streamsize>(n * sizeof(double))))
    return std::nullopt;
  if (is.peek() != std::char_traits<char>::eof()) return std::nullopt;
  return sv;
}

std::vector<SphereValues> cached_spheres(const ExperimentConfig& c, const Representation<double>& rho,
                                         const BasepointFrame<double>& fr, CountMode mode, bool* fromCache) {
  const std::uint64_t key = evaluation_key(rho, fr);
  std::vector<SphereValues> out;
  for (int L = 0; L <= c.Lmax; ++L) {
    auto sv = read_sphere_cache(cache_path(c.out, key, mode, L), key, mode, L);
    if (!sv || sv->values.size() != sphere_size(rho.rank(), L)) break;
    out.push_back(std::move(*sv));
  }
  if (fromCache) *fromCache = static_cast<int>(out.size()) == c.Lmax + 1;
  if (static_cast<int>(out.size()) == c.Lmax + 1) return out;
  out = evaluate_spheres(fr, rho, c.Lmax, mode, c.threads);
  for (const auto& sv : out) write_sphere_cache(cache_path(c.out, key, mode, sv.L), key, mode, sv);
  return out;
}

// ---------------------------------------------------------------------------
// Commands.

namespace {

std::string num(double v) { return fmt::format("{}", v); }

// Grid points carry accumulated rounding from t.min + i t.step.
std::string tnum(double t) { return fmt::format("{:.12g}", t); }

fs::path fit_path(const ExperimentConfig& c, CountMode mode) {
  return fs::path(c.out) / fmt::format("fit_{}.json", to_string(mode));
}

}  // namespace

int cmd_gap(const ExperimentConfig& c, std::ostream& log) {
  auto rho = build_representation(c);
  auto fr = build_frame(c);
  if (c.Lmax < 2) throw ConfigError("Lmax", 0, "gap needs Lmax >= 2");
  auto rep = gap_report(rho, fr.tau(), c.Lmax, c.threads);
  std::string csv = "L,min_gap,witness,saturated\n";
  for (const auto& e : rep.perLength)
    csv += fmt::format("{},{},{},{}\n", e.L, num(e.minGap), e.witness.str(), e.saturated ? 1 : 0);
  write_text(fs::path(c.out) / "gap.csv", csv);
  json j{{"alpha", rep.alpha}, {"C", rep.C}, {"anosov", rep.anosov}, {"Lmax", c.Lmax}};
  write_text(fs::path(c.out) / "gap.json", j.dump(2) + "\n");
  log << fmt::format("gap: alpha = {:.6g}, C = {:.6g} over lengths 1..{}\n", rep.alpha, rep.C, c.Lmax);
  return rep.alpha > 0 ? kExitOk : kExitFailure;
}

int cmd_verify(const ExperimentConfig& c, std::ostream& log) {
  auto rho = build_representation(c);
  auto fr = build_frame(c);
  auto suites = run_suites(c, rho, fr);
  std::string csv = "suite,pass,worst,tolerance,cases,note\n";
  json arr = json::array();
  bool all = true;
  for (const auto& s : suites) {
    all = all && s.pass;
    csv += fmt::format("{},{},{},{},{},\"{}\"\n", s.name, s.pass ? 1 : 0, num(s.worst), num(s.tolerance), s.cases,
                       s.note);
    arr.push_back({{"suite", s.name},
                   {"pass", s.pass},
                   {"worst", s.worst},
                   {"tolerance", s.tolerance},
                   {"cases", s.cases},
                   {"note", s.note}});
    log << fmt::format("{:<17} {}  worst {:.3e} (tol {:.1e}, {} cases){}\n", s.name, s.pass ? "PASS" : "FAIL",
                       s.worst, s.tolerance, s.cases, s.note.empty() ? "" : "  " + s.note);
  }
  write_text(fs::path(c.out) / "verify.csv", csv);
  write_text(fs::path(c.out) / "verify.json", json{{"pass", all}, {"suites", arr}}.dump(2) + "\n");
  return all ? kExitOk : kExitFailure;
}

int cmd_count(const ExperimentConfig& c, CountMode mode, std::ostream& log) {
  auto rho = build_representation(c);
  auto fr = build_frame(c);
  require_margin(fr, rho, c.tol.margin);
  const auto grid = build_grid(c);
  bool hit = false;
  auto spheres = cached_spheres(c, rho, fr, mode, &hit);
  auto series = count_from_values(spheres, grid, mode);

  std::optional<AsymptoticFit> fit;
  std::string fitError;
  try {
    fit = fit_asymptotic(series, std::nullopt, c.fitWindow);
  } catch (const DomainError& e) {
    fitError = e.what();
  }
  std::string csv = "t,N,complete,Mehat\n";
  for (std::size_t i = 0; i < grid.size(); ++i) {
    std::string mhat;
    if (fit && series.counts[i] > 0) mhat = num(std::exp(fit->h * grid[i]) / static_cast<double>(series.counts[i]));
    csv += fmt::format("{},{},{},{}\n", tnum(grid[i]), series.counts[i], series.complete[i] ? 1 : 0, mhat);
  }
  const fs::path csvPath = fs::path(c.out) / fmt::format("count_{}.csv", to_string(mode));
  write_text(csvPath, csv);

  double certified = -INFINITY;
  for (std::size_t i = 0; i < grid.size(); ++i)
    if (series.complete[i]) certified = grid[i];
  json j{{"mode", to_string(mode)},
         {"Lmax", c.Lmax},
         {"exceptional", series.exceptional},
         {"certified_t_max", std::isfinite(certified) ? json(certified) : json(nullptr)},
         {"evaluation_key", fmt::format("{:016x}", evaluation_key(rho, fr))}};
  if (fit) {
    j["h"] = fit->h;
    j["M"] = fit->M;
    j["window"] = {fit->tLo, fit->tHi};
    j["residual"] = fit->residual;
    j["points"] = fit->points;
  } else {
    j["error"] = fitError;
  }
  // Exponent from the primitive length spectrum, for comparison with h.
  const int periodL = c.periodLmax > 0 ? c.periodLmax : c.Lmax + 3;
  std::optional<PeriodEntropy> pe;
  try {
    if (periodL >= 4) pe = entropy_from_periods(rho, periodL, c.fitWindow, c.threads);
  } catch (const DomainError& e) {
    j["h_periods_error"] = e.what();
  }
  j["period_Lmax"] = periodL;
  j["h_periods"] = pe && !pe->degenerate ? json(pe->h) : json(nullptr);
  write_text(fit_path(c, mode), j.dump(2) + "\n");
  log << fmt::format("count {}: {} spheres ({}), certified up to t = {}, exceptional = {}\n", to_string(mode),
                     spheres.size(), hit ? "cached" : "evaluated", std::isfinite(certified) ? num(certified) : "none",
                     series.exceptional);
  if (!fit) {
    log << "fit refused: " << fitError << "\n";
    return kExitFailure;
  }
  log << fmt::format("fit: h = {:.6g}, M = {:.6g}, window [{}, {}], residual {:.3g}\n", fit->h, fit->M,
                     num(fit->tLo), num(fit->tHi), fit->residual);
  if (pe && !pe->degenerate)
    log << fmt::format("periods: h = {:.6g} from {} primitive classes up to length {}\n", pe->h, pe->classes, periodL);
  return kExitOk;
}

int cmd_distribution(const ExperimentConfig& c, CountMode mode, std::ostream& log) {
  const fs::path fp = fit_path(c, mode);
  std::ifstream is(fp);
  if (!is) {
    log << "no fit at '" << fp.string() << "': run the count command first\n";
    return kExitFailure;
  }
  json fit;
  try {
    fit = json::parse(is);
  } catch (const json::exception& e) {
    log << "cannot read '" << fp.string() << "': " << e.what() << "\n";
    return kExitFailure;
  }
  if (!fit.contains("h") || !fit.contains("M")) {
    log << "'" << fp.string() << "' holds no fitted (h, M)\n";
    return kExitFailure;
  }
  auto rho = build_representation(c);
  auto fr = build_frame(c);
  if (fit.value("evaluation_key", "") != fmt::format("{:016x}", evaluation_key(rho, fr))) {
    log << "'" << fp.string() << "' was fitted for a different configuration\n";
    return kExitFailure;
  }
  const double h = fit["h"].get<double>(), M = fit["M"].get<double>();
  const auto grid = build_grid(c);
  auto fns = builtin_test_functions();
  auto tab = equidistribution_stat(fr, rho, fns, mode, h, M, c.Lmax, grid, c.threads);
  std::string csv = "t,complete";
  for (const auto& n : tab.names) csv += "," + n;
  csv += "\n";
  for (std::size_t i = 0; i < tab.t.size(); ++i) {
    csv += fmt::format("{},{}", tnum(tab.t[i]), tab.complete[i] ? 1 : 0);
    for (const auto& col : tab.columns) csv += "," + num(col[i]);
    csv += "\n";
  }
  write_text(fs::path(c.out) / fmt::format("distribution_{}.csv", to_string(mode)), csv);
  log << fmt::format("distribution {}: {} rows, h = {:.6g}, M = {:.6g}\n", to_string(mode), tab.t.size(), h, M);
  return kExitOk;
}

}  // namespace psoc::cli
