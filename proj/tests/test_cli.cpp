#include <catch2/catch_amalgamated.hpp>

#include "commands.hpp"

#include <fmt/format.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace psoc;
using namespace psoc::cli;
namespace fs = std::filesystem;

namespace {

fs::path data_dir() {
  const char* d = std::getenv("PSOC_DATA");
  return d ? fs::path(d) : fs::path(PSOC_SOURCE_DIR) / "configs";
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  fs::path p = fs::current_path() / "cli_test_out" / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

struct Run {
  int code;
  std::string out;
  std::string err;
};

/// Runs the psoc binary with `args`, capturing both streams.
Run run_tool(const std::string& args, const fs::path& dir) {
  const char* bin = std::getenv("PSOC_BIN");
  REQUIRE(bin != nullptr);
  const fs::path o = dir / "stdout.txt", e = dir / "stderr.txt";
  const std::string cmd = std::string(bin) + " " + args + " >" + o.string() + " 2>" + e.string();
  const int status = std::system(cmd.c_str());
  REQUIRE(WIFEXITED(status));
  return {WEXITSTATUS(status), slurp(o), slurp(e)};
}

ExperimentConfig reference_config() { return load_config((data_dir() / "reference.yaml").string()); }

std::string config_error_field(const std::string& text, int* line = nullptr) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    if (line) *line = e.line();
    return e.field();
  }
  return "";
}

const char* kMinimal =
    "p: 2\n"
    "q: 2\n"
    "rank: 2\n"
    "schottky.lengths: [4, 5.656854249492381]\n";

}  // namespace

TEST_CASE("config parsing and round trip", "[cli]") {
  auto c = reference_config();
  CHECK(c.p == 2);
  CHECK(c.q == 2);
  CHECK(c.lengths == std::vector<double>{4.0, 5.656854249492381});
  CHECK(c.axes.size() == 2);
  CHECK(c.Lmax == 12);
  CHECK(c.period_lmax() == 14);
  CHECK(c.tau.size() == 2);
  const std::string canon = to_yaml(c);
  auto again = parse_config(canon);
  CHECK(to_yaml(again) == canon);
  CHECK(again.lengths == c.lengths);
  CHECK(again.axes == c.axes);
  CHECK(again.tol.identity == c.tol.identity);

  // Defaults fill the rest; the canonical form is a fixed point as well.
  auto m = parse_config(kMinimal);
  CHECK(m.builder == "schottky");
  CHECK(m.basepoint.empty());
  CHECK(m.period_lmax() == m.Lmax + 3);
  CHECK(to_yaml(parse_config(to_yaml(m))) == to_yaml(m));
  auto fr = build_frame(m);
  CHECK((fr.o_hat() - Vec<double>((Vec<double>(4) << 0, 0, 1, 0).finished())).norm() < 1e-15);
  auto rho = build_representation(m);
  CHECK(lambda1<double>(rho.generator(0)) == Catch::Approx(4.0).epsilon(1e-12));

  // The matrices builder reproduces the Schottky builder from its own entries.
  ExperimentConfig mat = m;
  mat.builder = "matrices";
  mat.lengths.clear();
  for (const auto& g : rho.generators()) {
    std::vector<std::string> entries;
    for (int r = 0; r < 4; ++r)
      for (int k = 0; k < 4; ++k) entries.push_back(fmt::format("{}", g(r, k)));
    mat.generators.push_back(entries);
  }
  auto rhoMat = build_representation(parse_config(to_yaml(mat)));
  for (int i = 0; i < 2; ++i) CHECK(rhoMat.generator(i) == rho.generator(i));
  CHECK(evaluation_key(rhoMat, fr) == evaluation_key(rho, fr));
}

TEST_CASE("config diagnostics", "[cli]") {
  int line = 0;
  CHECK(config_error_field(std::string(kMinimal) + "Lmaxx: 3\n", &line) == "Lmaxx");
  CHECK(line == 5);
  CHECK(config_error_field("p: 2\nq: 2\nrank: 2\nschottky.lengths: [4, 4.0.1]\n", &line) == "schottky.lengths");
  CHECK(line == 4);
  CHECK(config_error_field("p: 2\nq: 2\nrank: 3\nschottky.lengths: [4, 4]\n") == "schottky.lengths");
  CHECK(config_error_field(std::string(kMinimal) + "builder: magic\n") == "builder");
  CHECK(config_error_field(std::string(kMinimal) + "t.step: 0\n") == "t.step");
  CHECK(config_error_field(std::string(kMinimal) + "threads: two\n") == "threads");
  CHECK(config_error_field(std::string(kMinimal) + "basepoint: [0, 0, 1]\n") == "basepoint");
  CHECK(config_error_field(std::string(kMinimal) + "tau: [[0, 0, 1, 0]]\n") == "tau");
  CHECK(config_error_field(std::string(kMinimal) + "fit.window: 1.5\n") == "fit.window");
  CHECK(config_error_field("p: 2\nq: [2\n", &line) == "<syntax>");
  CHECK(config_error_field("- 1\n- 2\n") == "<root>");
  CHECK(config_error_field("p: 1\nq: 1\nrank: 2\nschottky.lengths: [4, 4]\n") == "q");

  // Semantic rejections surface at build time with the field's line.
  auto notTimelike = parse_config(std::string(kMinimal) + "basepoint: [1, 0, 0, 0]\n");
  try {
    build_frame(notTimelike);
    FAIL("expected a ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.field() == "basepoint");
    CHECK(e.line() == 5);
  }
  auto overlap = parse_config("p: 2\nq: 2\nrank: 2\nschottky.lengths: [0.1, 0.1]\nschottky.axes: [[0, 0], [0.2, 0]]\n");
  CHECK_THROWS_AS(build_representation(overlap), ConfigError);
  auto notInGroup = parse_config(
      "p: 2\nq: 1\nrank: 2\nbuilder: matrices\ngenerators: [[2,0,0,0,1,0,0,0,1], [1,0,0,0,1,0,0,0,1]]\n");
  try {
    build_representation(notInGroup);
    FAIL("expected a ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.field() == "generators");
  }
  CHECK_THROWS_AS(load_config("/nonexistent/psoc.yaml"), ConfigError);

  ExperimentConfig c = parse_config(kMinimal);
  apply_overrides(c, Overrides{5, std::string("x"), 9, 3});
  CHECK(c.Lmax == 5);
  CHECK(c.out == "x");
  CHECK(c.seed == 9);
  CHECK(c.threads == 3);
  CHECK_THROWS_AS(apply_overrides(c, Overrides{-1, {}, {}, {}}), ConfigError);
}

TEST_CASE("sphere cache files", "[cli]") {
  auto dir = scratch("cache");
  SphereValues sv;
  sv.L = 2;
  sv.values = {0.5, 1.25, 3.0};
  sv.exceptional = 1;
  sv.minValue = 0.5;
  auto f = cache_path(dir, 0xabcdefull, CountMode::b_o, 2);
  CHECK(f.filename().string() == "0000000000abcdef_b_o_L02.bin");
  write_sphere_cache(f, 0xabcdefull, CountMode::b_o, sv);
  auto back = read_sphere_cache(f, 0xabcdefull, CountMode::b_o, 2);
  REQUIRE(back);
  CHECK(back->values == sv.values);
  CHECK(back->exceptional == 1);
  CHECK(back->minValue == 0.5);
  CHECK_FALSE(read_sphere_cache(f, 0xabcdeeull, CountMode::b_o, 2));
  CHECK_FALSE(read_sphere_cache(f, 0xabcdefull, CountMode::b_tau, 2));
  CHECK_FALSE(read_sphere_cache(f, 0xabcdefull, CountMode::b_o, 3));
  CHECK_FALSE(read_sphere_cache(dir / "missing.bin", 0xabcdefull, CountMode::b_o, 2));
  // Truncated and trailing-garbage files are rejected.
  std::string bytes = slurp(f);
  std::ofstream(f, std::ios::binary) << bytes.substr(0, bytes.size() - 3);
  CHECK_FALSE(read_sphere_cache(f, 0xabcdefull, CountMode::b_o, 2));
  std::ofstream(f, std::ios::binary) << bytes << "x";
  CHECK_FALSE(read_sphere_cache(f, 0xabcdefull, CountMode::b_o, 2));

  // A generator change moves the key.
  auto c = parse_config(kMinimal);
  auto rho = build_representation(c);
  auto fr = build_frame(c);
  c.deformEps = 1e-3;
  CHECK(evaluation_key(build_representation(c), fr) != evaluation_key(rho, fr));

  // Values read back from the cache equal a fresh evaluation.
  c = parse_config(std::string(kMinimal) + "Lmax: 6\n");
  c.out = scratch("cache_values").string();
  bool hit = true;
  auto first = cached_spheres(c, rho, fr, CountMode::b_o, &hit);
  CHECK_FALSE(hit);
  auto second = cached_spheres(c, rho, fr, CountMode::b_o, &hit);
  CHECK(hit);
  REQUIRE(first.size() == second.size());
  for (std::size_t L = 0; L < first.size(); ++L) CHECK(first[L].values == second[L].values);
}

TEST_CASE("identity suites", "[cli]") {
  auto c = reference_config();
  c.samples = 200;
  c.Lmax = 6;
  auto rho = build_representation(c);
  auto fr = build_frame(c);
  auto suites = run_suites(c, rho, fr);
  REQUIRE(suites.size() == 7);
  for (const auto& s : suites) {
    INFO(s.name << " " << s.worst << " " << s.note);
    CHECK(s.pass);
    CHECK(s.cases > 0);
  }
  // A tolerance below rounding fails every residual family.
  auto strict = c;
  strict.tol.identity = strict.tol.period = strict.tol.fixedPoint = 1e-20;
  int failed = 0;
  for (const auto& s : run_suites(strict, rho, fr)) failed += s.pass ? 0 : 1;
  CHECK(failed >= 4);
  // o = e_4 lies outside Omega_rho.
  auto off = load_config((data_dir() / "margin_zero.yaml").string());
  auto bad = run_suites(off, build_representation(off), build_frame(off));
  CHECK(bad.front().name == "omega_membership");
  CHECK_FALSE(bad.front().pass);
  CHECK(bad.front().worst < 1e-12);
  CHECK(bad.front().note.find("margin") != std::string::npos);
  for (std::size_t i = 3; i < bad.size(); ++i) CHECK_FALSE(bad[i].pass);
}

TEST_CASE("tool exit codes and outputs", "[cli]") {
  auto dir = scratch("tool");
  const std::string ref = "--config " + (data_dir() / "reference.yaml").string();
  auto out = [&](const std::string& sub) { return " --out " + (dir / sub).string(); };

  auto gap = run_tool("gap " + ref + " --Lmax 6" + out("gap"), dir);
  CHECK(gap.code == 0);
  CHECK(fs::exists(dir / "gap" / "gap.csv"));
  auto ident = run_tool("gap --config " + (data_dir() / "identity.yaml").string() + out("ident"), dir);
  CHECK(ident.code == 1);

  std::ofstream(dir / "bad.yaml") << "p: 2\nq: 2\nrank: 2\nschottky.lengths: [4, x]\n";
  auto bad = run_tool("gap --config " + (dir / "bad.yaml").string(), dir);
  CHECK(bad.code == 2);
  CHECK(bad.err.find("schottky.lengths") != std::string::npos);
  CHECK(bad.err.find("line 4") != std::string::npos);
  CHECK(run_tool("gap --config " + (dir / "missing.yaml").string(), dir).code == 2);
  CHECK(run_tool("count " + ref + " --mode sideways", dir).code == 2);
  CHECK(run_tool("", dir).code == 2);

  auto verify = run_tool("verify " + ref + " --Lmax 6" + out("verify"), dir);
  CHECK(verify.code == 0);
  CHECK(verify.out.find("FAIL") == std::string::npos);
  auto verifyOff = run_tool("verify --config " + (data_dir() / "margin_zero.yaml").string() + out("off"), dir);
  CHECK(verifyOff.code == 1);
  CHECK(verifyOff.out.find("omega_membership  FAIL") != std::string::npos);

  auto show = run_tool("config " + ref, dir);
  CHECK(show.code == 0);
  CHECK(show.out == to_yaml(reference_config()));
}

TEST_CASE("count and distribution runs", "[cli]") {
  auto dir = scratch("count");
  const std::string ref = "--config " + (data_dir() / "reference.yaml").string() + " --Lmax 8";
  const fs::path o = dir / "run";
  const std::string outArg = " --out " + o.string();

  CHECK(run_tool("distribution " + ref + outArg, dir).code == 1);  // no fit yet

  auto first = run_tool("count " + ref + outArg, dir);
  REQUIRE(first.code == 0);
  const std::string csv = slurp(o / "count_b_o.csv");
  const std::string fit = slurp(o / "fit_b_o.json");
  CHECK(csv.rfind("t,N,complete,Mehat\n", 0) == 0);
  // t.max = 47.95 runs past the range certified by depth 8.
  CHECK(csv.find(",1,") != std::string::npos);
  CHECK(csv.find("47.95,") != std::string::npos);
  CHECK(csv.substr(csv.find("47.95,")).find(",0,") != std::string::npos);

  // Rerun from the cache, without the cache, and with more threads: same bytes.
  auto cached = run_tool("count " + ref + outArg, dir);
  CHECK(cached.out.find("cached") != std::string::npos);
  CHECK(slurp(o / "count_b_o.csv") == csv);
  fs::remove_all(o / "cache");
  CHECK(run_tool("count " + ref + outArg + " --threads 3", dir).code == 0);
  CHECK(slurp(o / "count_b_o.csv") == csv);
  CHECK(slurp(o / "fit_b_o.json") == fit);

  auto tau = run_tool("count " + ref + outArg + " --mode b_tau", dir);
  CHECK(tau.code == 0);
  CHECK(fs::exists(o / "fit_b_tau.json"));

  auto dist = run_tool("distribution " + ref + outArg, dir);
  CHECK(dist.code == 0);
  const std::string table = slurp(o / "distribution_b_o.csv");
  CHECK(table.rfind("t,complete,one,xi_e1_sq,eta_e2_sq\n", 0) == 0);
  // A fit from another configuration is refused.
  CHECK(run_tool("distribution --config " + (data_dir() / "deformed.yaml").string() + " --Lmax 6" + outArg, dir)
            .code == 1);

  // Margin violation in count mode is a run failure.
  CHECK(run_tool("count --config " + (data_dir() / "margin_zero.yaml").string() + outArg, dir).code == 1);
  // Nothing certified at depth 1: the fit is refused.
  auto shallow = run_tool("count --config " + (data_dir() / "reference.yaml").string() + outArg + " --Lmax 1", dir);
  CHECK(shallow.code == 1);
  CHECK(shallow.out.find("fit refused") != std::string::npos);
}
