// Subcommands of the psoc tool. Each returns the process exit code:
// 0 success, 1 failed verification or run, 2 configuration error.
#pragma once

#include "config.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>

namespace psoc::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfig = 2;

/// Command-line values that override the config file.
struct Overrides {
  std::optional<int> Lmax;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
};

void apply_overrides(ExperimentConfig& c, const Overrides& o);

struct SuiteResult {
  std::string name;
  bool pass = false;
  double worst = 0.0;  // largest residual (for the margin suite: the margin itself)
  double tolerance = 0.0;
  std::size_t cases = 0;
  std::string note;
};

/// Identity families of the pseudometric and boundary-dynamics layers.
std::vector<SuiteResult> run_suites(const ExperimentConfig& c, const Representation<double>& rho,
                                    const BasepointFrame<double>& fr);

// ---------------------------------------------------------------------------
// Sphere cache: versioned binary blobs under <out>/cache, keyed by
// (evaluation_key, mode, L).

inline constexpr std::uint32_t kCacheVersion = 1;

std::filesystem::path cache_path(const std::filesystem::path& outDir, std::uint64_t key, CountMode mode, int L);
void write_sphere_cache(const std::filesystem::path& file, std::uint64_t key, CountMode mode, const SphereValues& sv);
/// nullopt when the file is absent, stale or corrupt.
std::optional<SphereValues> read_sphere_cache(const std::filesystem::path& file, std::uint64_t key, CountMode mode,
                                              int L);

/// Sphere values 0..c.Lmax, from the cache when every sphere is present.
std::vector<SphereValues> cached_spheres(const ExperimentConfig& c, const Representation<double>& rho,
                                         const BasepointFrame<double>& fr, CountMode mode, bool* fromCache = nullptr);

int cmd_gap(const ExperimentConfig& c, std::ostream& log);
int cmd_verify(const ExperimentConfig& c, std::ostream& log);
int cmd_count(const ExperimentConfig& c, CountMode mode, std::ostream& log);
int cmd_distribution(const ExperimentConfig& c, CountMode mode, std::ostream& log);

}  // namespace psoc::cli
