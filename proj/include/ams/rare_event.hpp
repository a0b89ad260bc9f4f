#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ams/dynamics.hpp"
#include "ams/model.hpp"
#include "ams/rng.hpp"

namespace ams {

enum class ReactionKind { mean_magnetization };

/// Scalar progress coordinate. Only the spatial mean ships.
struct ReactionCoordinate {
  ReactionKind kind = ReactionKind::mean_magnetization;

  double operator()(std::span<const double> x) const;
};

double xi(const ReactionCoordinate& rc, std::span<const double> x);

enum class StopReason { hit_a, hit_b, max_steps };

std::string to_string(StopReason r);

/// The transition out of step index `first_step` and all later ones (until the next
/// segment) draw their noise from key.at_step(step).
struct KeySegment {
  RngKey key;
  std::uint64_t first_step = 0;
  friend bool operator==(const KeySegment&, const KeySegment&) = default;
};

/// A trajectory stopped at absorption. States are kept every `stride` steps plus the
/// final one; the levels are those of the kept states.
struct StoppedRun {
  std::size_t dim = 0;
  std::uint32_t stride = 1;
  std::vector<std::uint64_t> steps;
  std::vector<double> states;  // row-major, steps.size() x dim
  std::vector<double> levels;
  double max_level = -std::numeric_limits<double>::infinity();
  StopReason stop_reason = StopReason::max_steps;
  std::vector<KeySegment> rng_lineage;

  std::size_t size() const { return steps.size(); }
  std::span<const double> state(std::size_t k) const { return {states.data() + k * dim, dim}; }
  std::span<const double> final_state() const { return state(size() - 1); }
  double final_level() const { return levels.back(); }
  std::uint64_t final_step() const { return steps.back(); }

  void push(std::uint64_t step, std::span<const double> x, double level);
  /// Keeps entries [0, count).
  void truncate(std::size_t count);
};

/// Raised when a run reaches max_steps_per_run without absorption.
class AbsorbedTimeout : public std::runtime_error {
 public:
  AbsorbedTimeout(const std::string& what, StoppedRun partial)
      : std::runtime_error(what), partial_run(std::move(partial)) {}
  StoppedRun partial_run;
};

/// No replica survives above the kill level, so branching is impossible.
class ExtinctionError : public std::runtime_error {
 public:
  ExtinctionError(const std::string& what, std::size_t iter)
      : std::runtime_error(what), iteration(iter) {}
  std::size_t iteration;
};

class NotConverged : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct AmsConfig {
  std::size_t n_rep = 100;
  std::size_t k_rep = 1;
  double z_a = -0.99;
  double z_b = 0.99;
  State x0;
  std::size_t max_iterations = 1'000'000;
  std::uint64_t max_steps_per_run = 10'000'000;
  std::uint64_t master_seed = 0;
  StepperConfig stepper;
  ReactionCoordinate reaction;
  std::uint32_t path_stride = 1;
  std::size_t workers = 0;  // 0: default_worker_count()

  /// Throws std::invalid_argument when an invariant is violated.
  void validate() const;
};

struct KillRecord {
  std::size_t iteration = 0;
  double level = 0.0;
  std::vector<std::size_t> killed;
  std::vector<std::size_t> cloned_from;
  std::vector<std::uint64_t> branch_step;
  /// Final step where fewer than k_rep replicas were still short of B: those are
  /// replaced by copies of B replicas and weighted by (1 - killed/n_rep).
  bool final_partial = false;
};

struct AmsOutput {
  double estimate = 1.0;
  double log_estimate = 0.0;
  std::size_t q_iterations = 0;
  std::vector<KillRecord> kill_log;
  std::vector<StoppedRun> reactive_trajectories;
  std::size_t tie_events = 0;
  std::size_t initial_hits_b = 0;
  std::uint64_t total_steps = 0;  // simulated steps, a machine-independent cost
};

/// Advances `stepper` from x_start (at step index start_step) until xi < z_A or xi > z_B.
/// The returned run holds only the states from start_step on, with `lineage` as its keys.
/// Throws AbsorbedTimeout when more than cfg.max_steps_per_run steps are taken in total.
StoppedRun run_until_absorbed(const AmsConfig& cfg, Stepper& stepper, std::span<const double> x_start,
                              std::uint64_t start_step, std::vector<KeySegment> lineage);
StoppedRun run_until_absorbed(const AmsConfig& cfg, std::span<const double> x_start,
                              std::uint64_t start_step, std::vector<KeySegment> lineage);

/// Re-simulates a run from its first state and lineage; used to audit branching.
StoppedRun replay_run(const AmsConfig& cfg, const StoppedRun& run);

/// Keys used by the estimators.
RngKey replica_key(std::uint64_t seed, std::uint32_t replica, std::uint32_t generation);
inline constexpr std::uint32_t donor_stream_replica = 0xFFFFFFFFu;
inline constexpr std::uint32_t direct_mc_generation = 0xFFFFFFFEu;

AmsOutput ams_estimate(const AmsConfig& cfg);

/// Product of the per-iteration factors in the kill log, grouped by kill count.
double estimate_from_kill_log(const std::vector<KillRecord>& log, std::size_t n_rep);

struct DirectMcResult {
  double p_hat = 0.0;
  double std_err = 0.0;
  std::uint64_t hits = 0;
  std::uint64_t samples = 0;
  std::uint64_t total_steps = 0;
};

/// Fraction of independent runs from x0 that reach B before A.
DirectMcResult direct_mc_estimate(const AmsConfig& cfg, std::uint64_t n_samples);

/// States where the level path crosses `level`, linearly interpolated between kept states.
std::vector<State> crossing_positions(const StoppedRun& run, double level);

}  // namespace ams
