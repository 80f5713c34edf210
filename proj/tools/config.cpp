#include "config.hpp"

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace psoc::cli {

ConfigError::ConfigError(std::string field, int line, const std::string& msg)
    : std::runtime_error(line > 0 ? fmt::format("line {}: field '{}': {}", line, field, msg)
                                  : fmt::format("field '{}': {}", field, msg)),
      field_(std::move(field)),
      line_(line) {}

namespace {

const std::set<std::string> kKeys{
    "p",          "q",          "rank",        "builder",      "schottky.m",      "schottky.lengths",
    "schottky.axes", "deform.eps", "deform.seed", "generators", "basepoint",       "tau",
    "Lmax",       "period.Lmax", "t.min",      "t.max",        "t.step",          "fit.window",
    "verify.samples", "tol.identity", "tol.period", "tol.fixed_point", "tol.margin", "seed",
    "threads",    "out"};

int line_of(const YAML::Node& n) { return n.Mark().line >= 0 ? n.Mark().line + 1 : 0; }

double parse_decimal(const std::string& s, const std::string& field, int line) {
  double v = 0;
  const char* b = s.data();
  const char* e = s.data() + s.size();
  if (!s.empty() && *b == '+') ++b;
  auto [ptr, ec] = std::from_chars(b, e, v);
  if (ec != std::errc() || ptr != e || s.empty())
    throw ConfigError(field, line, fmt::format("'{}' is not a decimal number", s));
  if (!std::isfinite(v)) throw ConfigError(field, line, fmt::format("'{}' is not finite", s));
  return v;
}

std::string scalar(const YAML::Node& n, const std::string& field) {
  if (!n.IsScalar()) throw ConfigError(field, line_of(n), "expected a scalar");
  return n.Scalar();
}

double as_double(const YAML::Node& n, const std::string& field) {
  return parse_decimal(scalar(n, field), field, line_of(n));
}

long long as_int(const YAML::Node& n, const std::string& field) {
  std::string s = scalar(n, field);
  long long v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
    throw ConfigError(field, line_of(n), fmt::format("'{}' is not an integer", s));
  return v;
}

std::vector<std::string> as_strings(const YAML::Node& n, const std::string& field) {
  if (!n.IsSequence()) throw ConfigError(field, line_of(n), "expected a list");
  std::vector<std::string> out;
  for (const auto& e : n) {
    std::string s = scalar(e, field);
    parse_decimal(s, field, line_of(e));
    out.push_back(s);
  }
  return out;
}

std::vector<std::vector<std::string>> as_string_rows(const YAML::Node& n, const std::string& field) {
  if (!n.IsSequence()) throw ConfigError(field, line_of(n), "expected a list of lists");
  std::vector<std::vector<std::string>> out;
  for (const auto& e : n) out.push_back(as_strings(e, field));
  return out;
}

int field_line(const ExperimentConfig& c, const std::string& key) {
  auto it = c.lines.find(key);
  return it == c.lines.end() ? 0 : it->second;
}

[[noreturn]] void reject(const ExperimentConfig& c, const std::string& key, const std::string& msg) {
  throw ConfigError(key, field_line(c, key), msg);
}

void validate(const ExperimentConfig& c) {
  if (c.p < 1) reject(c, "p", "must be >= 1");
  if (c.q < 1) reject(c, "q", "must be >= 1");
  if (c.dim() < 3) reject(c, "q", "need p + q >= 3");
  if (c.rank < 1) reject(c, "rank", "must be >= 1");
  if (c.builder == "schottky") {
    const int m = c.schottkyM > 0 ? c.schottkyM : c.p;
    if (m < 2 || m > c.p) reject(c, "schottky.m", fmt::format("must be in [2, p] = [2, {}]", c.p));
    if (static_cast<int>(c.lengths.size()) != c.rank)
      reject(c, "schottky.lengths", fmt::format("expected {} lengths (rank), got {}", c.rank, c.lengths.size()));
    for (double l : c.lengths)
      if (!(l > 0)) reject(c, "schottky.lengths", "lengths must be positive");
    if (!c.axes.empty() && static_cast<int>(c.axes.size()) != c.rank)
      reject(c, "schottky.axes", fmt::format("expected {} axes (rank), got {}", c.rank, c.axes.size()));
    if (!c.generators.empty()) reject(c, "generators", "only used with builder: matrices");
  } else if (c.builder == "matrices") {
    if (static_cast<int>(c.generators.size()) != c.rank)
      reject(c, "generators", fmt::format("expected {} matrices (rank), got {}", c.rank, c.generators.size()));
    for (const auto& g : c.generators)
      if (static_cast<int>(g.size()) != c.dim() * c.dim())
        reject(c, "generators", fmt::format("each matrix needs {} entries (row-major)", c.dim() * c.dim()));
  } else {
    reject(c, "builder", fmt::format("unknown builder '{}' (expected schottky or matrices)", c.builder));
  }
  if (c.deformEps < 0) reject(c, "deform.eps", "must be >= 0");
  if (!c.basepoint.empty() && static_cast<int>(c.basepoint.size()) != c.dim())
    reject(c, "basepoint", fmt::format("expected {} entries", c.dim()));
  if (!c.tau.empty()) {
    if (static_cast<int>(c.tau.size()) != c.q) reject(c, "tau", fmt::format("expected q = {} columns", c.q));
    for (const auto& col : c.tau)
      if (static_cast<int>(col.size()) != c.dim()) reject(c, "tau", fmt::format("columns need {} entries", c.dim()));
  }
  if (c.Lmax < 0) reject(c, "Lmax", "must be >= 0");
  if (c.periodLmax != 0 && c.periodLmax < 4) reject(c, "period.Lmax", "must be >= 4");
  if (!(c.tStep > 0)) reject(c, "t.step", "must be positive");
  if (!(c.tMax >= c.tMin)) reject(c, "t.max", "must be >= t.min");
  if (!(c.fitWindow > 0 && c.fitWindow <= 1)) reject(c, "fit.window", "must be in (0, 1]");
  if (c.samples < 1) reject(c, "verify.samples", "must be >= 1");
  for (auto [key, v] : {std::pair{"tol.identity", c.tol.identity}, {"tol.period", c.tol.period},
                        {"tol.fixed_point", c.tol.fixedPoint}, {"tol.margin", c.tol.margin}})
    if (!(v >= 0)) reject(c, key, "must be >= 0");
  if (c.threads < 1) reject(c, "threads", "must be >= 1");
  if (c.out.empty()) reject(c, "out", "must not be empty");
}

}  // namespace

ExperimentConfig parse_config(const std::string& text, const std::string& origin) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ConfigError("<syntax>", e.mark.line >= 0 ? e.mark.line + 1 : 0, origin + ": " + e.msg);
  }
  if (!root.IsMap()) throw ConfigError("<root>", line_of(root), origin + ": expected a mapping of keys");
  ExperimentConfig c;
  for (const auto& kv : root) {
    const std::string key = kv.first.as<std::string>();
    const YAML::Node& v = kv.second;
    if (!kKeys.count(key)) throw ConfigError(key, line_of(kv.first), "unknown key");
    if (c.lines.count(key)) throw ConfigError(key, line_of(kv.first), "duplicate key");
    c.lines[key] = line_of(kv.first);
    if (key == "p") c.p = static_cast<int>(as_int(v, key));
    else if (key == "q") c.q = static_cast<int>(as_int(v, key));
    else if (key == "rank") c.rank = static_cast<int>(as_int(v, key));
    else if (key == "builder") c.builder = scalar(v, key);
    else if (key == "schottky.m") c.schottkyM = static_cast<int>(as_int(v, key));
    else if (key == "schottky.lengths") {
      for (const auto& s : as_strings(v, key)) c.lengths.push_back(parse_decimal(s, key, line_of(v)));
    } else if (key == "schottky.axes") {
      for (const auto& row : as_string_rows(v, key)) {
        if (row.size() != 2) throw ConfigError(key, line_of(v), "each axis is [angle, offset]");
        c.axes.emplace_back(parse_decimal(row[0], key, line_of(v)), parse_decimal(row[1], key, line_of(v)));
      }
    } else if (key == "deform.eps") c.deformEps = as_double(v, key);
    else if (key == "deform.seed") c.deformSeed = static_cast<std::uint64_t>(as_int(v, key));
    else if (key == "generators") c.generators = as_string_rows(v, key);
    else if (key == "basepoint") c.basepoint = as_strings(v, key);
    else if (key == "tau") c.tau = as_string_rows(v, key);
    else if (key == "Lmax") c.Lmax = static_cast<int>(as_int(v, key));
    else if (key == "period.Lmax") c.periodLmax = static_cast<int>(as_int(v, key));
    else if (key == "t.min") c.tMin = as_double(v, key);
    else if (key == "t.max") c.tMax = as_double(v, key);
    else if (key == "t.step") c.tStep = as_double(v, key);
    else if (key == "fit.window") c.fitWindow = as_double(v, key);
    else if (key == "verify.samples") c.samples = static_cast<int>(as_int(v, key));
    else if (key == "tol.identity") c.tol.identity = as_double(v, key);
    else if (key == "tol.period") c.tol.period = as_double(v, key);
    else if (key == "tol.fixed_point") c.tol.fixedPoint = as_double(v, key);
    else if (key == "tol.margin") c.tol.margin = as_double(v, key);
    else if (key == "seed") c.seed = static_cast<std::uint64_t>(as_int(v, key));
    else if (key == "threads") c.threads = static_cast<int>(as_int(v, key));
    else if (key == "out") c.out = scalar(v, key);
  }
  validate(c);
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("--config", 0, "cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

namespace {

std::string join_strings(const std::vector<std::string>& v) {
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", \"" : "\"") + v[i] + "\"";
  return s + "]";
}

std::string join_rows(const std::vector<std::vector<std::string>>& rows) {
  std::string s = "[";
  for (std::size_t i = 0; i < rows.size(); ++i) s += (i ? ", " : "") + join_strings(rows[i]);
  return s + "]";
}

}  // namespace

std::string to_yaml(const ExperimentConfig& c) {
  std::string s;
  s += fmt::format("p: {}\nq: {}\nrank: {}\nbuilder: {}\n", c.p, c.q, c.rank, c.builder);
  if (c.builder == "schottky") {
    if (c.schottkyM > 0) s += fmt::format("schottky.m: {}\n", c.schottkyM);
    std::vector<std::string> ls;
    for (double l : c.lengths) ls.push_back(fmt::format("{}", l));
    s += "schottky.lengths: " + join_strings(ls) + "\n";
    if (!c.axes.empty()) {
      std::vector<std::vector<std::string>> rows;
      for (auto [a, o] : c.axes) rows.push_back({fmt::format("{}", a), fmt::format("{}", o)});
      s += "schottky.axes: " + join_rows(rows) + "\n";
    }
  } else {
    s += "generators: " + join_rows(c.generators) + "\n";
  }
  s += fmt::format("deform.eps: {}\ndeform.seed: {}\n", c.deformEps, c.deformSeed);
  if (!c.basepoint.empty()) s += "basepoint: " + join_strings(c.basepoint) + "\n";
  if (!c.tau.empty()) s += "tau: " + join_rows(c.tau) + "\n";
  s += fmt::format("Lmax: {}\n", c.Lmax);
  if (c.periodLmax > 0) s += fmt::format("period.Lmax: {}\n", c.periodLmax);
  s += fmt::format("t.min: {}\nt.max: {}\nt.step: {}\nfit.window: {}\nverify.samples: {}\n", c.tMin, c.tMax, c.tStep,
                   c.fitWindow, c.samples);
  s += fmt::format("tol.identity: {}\ntol.period: {}\ntol.fixed_point: {}\ntol.margin: {}\n", c.tol.identity,
                   c.tol.period, c.tol.fixedPoint, c.tol.margin);
  s += fmt::format("seed: {}\nthreads: {}\nout: \"{}\"\n", c.seed, c.threads, c.out);
  return s;
}

Representation<double> build_representation(const ExperimentConfig& c) {
  QSpace sp(c.p, c.q);
  const int d = c.dim();
  Representation<double> rho;
  if (c.builder == "schottky") {
    const int m = c.schottkyM > 0 ? c.schottkyM : c.p;
    std::vector<AxisSpec<double>> axes;
    if (c.axes.empty()) {
      // Evenly spread angles through the basepoint.
      for (int i = 0; i < c.rank; ++i) axes.push_back({M_PI * i / c.rank, 0.0});
    } else {
      for (auto [a, o] : c.axes) axes.push_back({a, o});
    }
    try {
      auto rho0 = schottky_so_m1<double>(m, axes, c.lengths);
      rho = (c.p == m && c.q == 1) ? rho0 : embed_block(rho0, sp);
    } catch (const DomainError& e) {
      reject(c, "schottky.lengths", e.what());
    }
  } else {
    std::vector<Mat<double>> gens;
    for (std::size_t i = 0; i < c.generators.size(); ++i) {
      Mat<double> g(d, d);
      for (int r = 0; r < d; ++r)
        for (int k = 0; k < d; ++k)
          g(r, k) = parse_decimal(c.generators[i][static_cast<std::size_t>(r * d + k)], "generators",
                                  field_line(c, "generators"));
      if (form_defect<double>(sp, g) > 1e-8 * std::max(1.0, g.squaredNorm()))
        reject(c, "generators", fmt::format("matrix {} does not preserve the form of signature ({},{})", i, c.p, c.q));
      gens.push_back(g);
    }
    rho = Representation<double>(sp, gens);
  }
  if (c.deformEps > 0) rho = deform(rho, c.deformEps, c.deformSeed);
  return rho;
}

BasepointFrame<double> build_frame(const ExperimentConfig& c) {
  QSpace sp(c.p, c.q);
  const int d = c.dim();
  Vec<double> o = Vec<double>::Zero(d);
  if (c.basepoint.empty()) {
    o(c.p) = 1.0;
  } else {
    for (int i = 0; i < d; ++i) o(i) = parse_decimal(c.basepoint[static_cast<std::size_t>(i)], "basepoint", 0);
  }
  std::optional<Mat<double>> tau;
  if (!c.tau.empty()) {
    Mat<double> t(d, c.q);
    for (int j = 0; j < c.q; ++j)
      for (int i = 0; i < d; ++i) t(i, j) = parse_decimal(c.tau[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)], "tau", 0);
    tau = t;
  }
  try {
    return make_frame<double>(sp, o, tau);
  } catch (const DomainError& e) {
    const std::string msg = e.what();
    reject(c, msg.find("tau") != std::string::npos ? "tau" : "basepoint", msg);
  }
}

std::vector<double> build_grid(const ExperimentConfig& c) { return make_grid(c.tMin, c.tMax, c.tStep); }

std::uint64_t evaluation_key(const Representation<double>& rho, const BasepointFrame<double>& fr) {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&](const void* data, std::size_t n) {
    const auto* b = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= b[i];
      h *= 1099511628211ull;
    }
  };
  const int pq[2] = {rho.space().p(), rho.space().q()};
  mix(pq, sizeof pq);
  for (const auto& g : rho.generators()) mix(g.data(), sizeof(double) * static_cast<std::size_t>(g.size()));
  mix(fr.o_hat().data(), sizeof(double) * static_cast<std::size_t>(fr.o_hat().size()));
  Mat<double> plane = fr.tau().plane();
  mix(plane.data(), sizeof(double) * static_cast<std::size_t>(plane.size()));
  return h;
}

}  // namespace psoc::cli
