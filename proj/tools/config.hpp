// Experiment configuration: one flat YAML mapping per experiment.
#pragma once

#include "psoc/counting.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace psoc::cli {

/// Rejected configuration. `line` is 1-based, 0 when unknown.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, int line, const std::string& msg);
  const std::string& field() const { return field_; }
  int line() const { return line_; }

 private:
  std::string field_;
  int line_;
};

struct Tolerances {
  double identity = 1e-8;    // b_o formula, decompositions, cocycle and Gromov laws
  double period = 1e-7;      // periods vs lambda_1, relative
  double fixedPoint = 1e-6;  // cross-ratio identity at fixed points
  double margin = 1e-9;      // Omega-membership margin
};

struct ExperimentConfig {
  int p = 2;
  int q = 2;
  int rank = 2;
  std::string builder = "schottky";  // schottky | matrices
  // schottky builder: SO(m,1) block embedded in R^{p,q}
  int schottkyM = 0;  // 0 means p
  std::vector<double> lengths;
  std::vector<std::pair<double, double>> axes;  // (angle, offset)
  double deformEps = 0.0;
  std::uint64_t deformSeed = 0;
  // matrices builder: row-major decimal strings, rank of them
  std::vector<std::vector<std::string>> generators;
  std::vector<std::string> basepoint;            // decimal strings, length p+q
  std::vector<std::vector<std::string>> tau;     // optional q columns
  int Lmax = 8;
  int periodLmax = 0;  // 0 means Lmax + 3
  double tMin = 0.0;
  double tMax = 20.0;
  double tStep = 0.05;
  double fitWindow = 0.4;
  int samples = 1000;  // random triples per identity family in verify
  Tolerances tol;
  std::uint64_t seed = 1;
  int threads = 1;
  std::string out = "out";
  std::map<std::string, int> lines;  // key -> source line, for diagnostics

  int dim() const { return p + q; }
  int period_lmax() const { return periodLmax > 0 ? periodLmax : Lmax + 3; }
};

ExperimentConfig parse_config(const std::string& text, const std::string& origin = "<config>");
ExperimentConfig load_config(const std::string& path);

/// Canonical text form. parse_config(to_yaml(c)) reproduces c.
std::string to_yaml(const ExperimentConfig& c);

Representation<double> build_representation(const ExperimentConfig& c);
BasepointFrame<double> build_frame(const ExperimentConfig& c);
std::vector<double> build_grid(const ExperimentConfig& c);

/// FNV-1a over the generator matrices and the frame, as raw doubles.
std::uint64_t evaluation_key(const Representation<double>& rho, const BasepointFrame<double>& fr);

}  // namespace psoc::cli
