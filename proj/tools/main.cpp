#include "commands.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  using namespace psoc::cli;
  CLI::App app{"Orbit counting and boundary identities for Anosov subgroups of PO(p,q)", "psoc"};
  app.require_subcommand(1);
  std::string configPath;
  std::string mode = "b_o";
  Overrides ov;
  int lmax = -1, threads = 0;
  std::uint64_t seed = 0;
  std::string out;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", configPath, "experiment config (YAML)")->required()->check(CLI::ExistingFile);
    sub->add_option("--Lmax", lmax, "enumeration depth (word length)");
    sub->add_option("--out", out, "output directory");
    sub->add_option("--seed", seed, "seed for sampled identity checks");
    sub->add_option("--threads", threads, "worker threads");
  };
  auto* gap = app.add_subcommand("gap", "singular value gap per word length and the Anosov fit");
  auto* verify = app.add_subcommand("verify", "identity suites; exit 1 if any fails");
  auto* count = app.add_subcommand("count", "orbit counts N(t) and the asymptotic fit");
  auto* dist = app.add_subcommand("distribution", "equidistribution sums with the fitted (h, M)");
  auto* show = app.add_subcommand("config", "print the parsed config in canonical form");
  for (auto* s : {gap, verify, count, dist, show}) add_common(s);
  for (auto* s : {count, dist})
    s->add_option("--mode", mode, "b_o or b_tau")->check(CLI::IsMember({"b_o", "b_tau"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    ExperimentConfig cfg = load_config(configPath);
    for (auto* s : {gap, verify, count, dist, show}) {
      if (!s->parsed()) continue;
      if (s->count("--Lmax")) ov.Lmax = lmax;
      if (s->count("--out")) ov.out = out;
      if (s->count("--seed")) ov.seed = seed;
      if (s->count("--threads")) ov.threads = threads;
    }
    apply_overrides(cfg, ov);
    if (show->parsed()) {
      std::cout << to_yaml(cfg);
      return kExitOk;
    }
    if (gap->parsed()) return cmd_gap(cfg, std::cout);
    if (verify->parsed()) return cmd_verify(cfg, std::cout);
    if (count->parsed()) return cmd_count(cfg, psoc::parse_count_mode(mode), std::cout);
    if (dist->parsed()) return cmd_distribution(cfg, psoc::parse_count_mode(mode), std::cout);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitFailure;
}
