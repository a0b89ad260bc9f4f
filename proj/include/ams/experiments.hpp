#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "ams/config.hpp"
#include "ams/rare_event.hpp"
#include "ams/stats.hpp"

namespace ams {

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int config_error = 2;
inline constexpr int algorithm_failure = 3;  // extinction or iteration cap
inline constexpr int timeout = 4;
}  // namespace exit_code

enum class RealizationStatus { ok, extinction, not_converged, timeout };
std::string to_string(RealizationStatus s);

struct RealizationResult {
  std::size_t index = 0;
  std::uint64_t seed = 0;
  RealizationStatus status = RealizationStatus::ok;
  double estimate = 0.0;
  std::size_t q_iterations = 0;
  std::size_t tie_events = 0;
  bool final_partial = false;
  std::uint64_t total_steps = 0;
};

/// Aggregate over N_MC independent AMS realizations. Statistics use successful ones only.
struct EstimateSummary {
  double mean = 0.0;
  double std = 0.0;  // n-1 denominator
  double mean_iterations = 0.0;
  std::size_t succeeded = 0;
  std::size_t extinctions = 0;
  std::size_t not_converged = 0;
  std::size_t timeouts = 0;
  std::size_t tie_events = 0;
  std::uint64_t total_steps = 0;
  double wall_seconds = 0.0;
  std::vector<RealizationResult> realizations;

  int exit_code() const;
};

/// Seed of realization r: mix_seed(seed, r).
std::uint64_t realization_seed(std::uint64_t seed, std::size_t r);

using AmsObserver = std::function<void(std::size_t realization, const AmsConfig&, const AmsOutput&)>;

/// Runs n_mc realizations of ams_estimate, spread over `workers` threads (0: default).
/// The observer, if given, sees each successful output; it may be called concurrently.
EstimateSummary run_realizations(const AmsConfig& base, std::size_t n_mc, std::uint64_t seed,
                                 std::size_t workers = 0, const AmsObserver& observer = {});

/// Aggregates realization results (exposed for testing the reduction).
EstimateSummary summarize(std::vector<RealizationResult> results);

/// Shortest round-trip decimal text of a double.
std::string format_double(double v);

struct CommandResult {
  int exit_code = exit_code::ok;
  std::string message;
  std::vector<std::string> files;
};

/// Subcommands. Each writes its CSV files and manifest.json into `out_dir`.
CommandResult cmd_estimate(const RunConfig& cfg, const std::filesystem::path& out_dir);
CommandResult cmd_direct_mc(const RunConfig& cfg, const std::filesystem::path& out_dir);
CommandResult cmd_sweep_epsilon(const RunConfig& cfg, const std::filesystem::path& out_dir);
CommandResult cmd_trajectories(const RunConfig& cfg, const std::filesystem::path& out_dir);
CommandResult cmd_bifurcation(const RunConfig& cfg, const std::filesystem::path& out_dir);

/// Dispatches by subcommand name and maps exceptions to exit codes.
CommandResult run_command(const std::string& experiment, const RunConfig& cfg,
                          const std::filesystem::path& out_dir);

/// Re-executes the experiment recorded in a manifest into `out_dir`.
CommandResult replay_manifest(const std::filesystem::path& manifest, const std::filesystem::path& out_dir);

/// Packed trajectory file: 32-byte header then rows of (time, x_0 .. x_{N-1}) as
/// little-endian doubles.
void write_trajectory_bin(const std::filesystem::path& path, const StoppedRun& run, double dt);
void write_trajectory_csv(const std::filesystem::path& path, const StoppedRun& run, double dt);

struct TrajectoryFile {
  std::uint32_t version = 0;
  std::uint32_t stride = 0;
  std::uint64_t dim = 0;
  std::vector<double> rows;  // rows x (dim + 1)
};
TrajectoryFile read_trajectory_bin(const std::filesystem::path& path);

}  // namespace ams
