#include "ams/rare_event.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "ams/parallel.hpp"

namespace ams {

double ReactionCoordinate::operator()(std::span<const double> x) const {
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

double xi(const ReactionCoordinate& rc, std::span<const double> x) { return rc(x); }

std::string to_string(StopReason r) {
  switch (r) {
    case StopReason::hit_a: return "hit-A";
    case StopReason::hit_b: return "hit-B";
    case StopReason::max_steps: return "max-steps";
  }
  return "?";
}

void StoppedRun::push(std::uint64_t step, std::span<const double> x, double level) {
  steps.push_back(step);
  states.insert(states.end(), x.begin(), x.end());
  levels.push_back(level);
  max_level = std::max(max_level, level);
}

void StoppedRun::truncate(std::size_t count) {
  steps.resize(count);
  states.resize(count * dim);
  levels.resize(count);
  max_level = levels.empty() ? -std::numeric_limits<double>::infinity()
                             : *std::max_element(levels.begin(), levels.end());
}

void AmsConfig::validate() const {
  stepper.validate();
  if (n_rep < 2) throw std::invalid_argument("ams: n_rep must be >= 2");
  if (k_rep < 1 || k_rep >= n_rep) throw std::invalid_argument("ams: k_rep must satisfy 1 <= k_rep < n_rep");
  if (!(z_a < z_b)) throw std::invalid_argument("ams: z_A must be < z_B");
  check_state(stepper.params, x0);
  const double x0_level = reaction(x0);
  if (!(z_a < x0_level && x0_level < z_b))
    throw std::invalid_argument("ams: need z_A < xi(x0) < z_B, got xi(x0) = " + std::to_string(x0_level));
  if (path_stride < 1) throw std::invalid_argument("ams: path_stride must be >= 1");
  if (max_steps_per_run < 1) throw std::invalid_argument("ams: max_steps_per_run must be >= 1");
}

RngKey replica_key(std::uint64_t seed, std::uint32_t replica, std::uint32_t generation) {
  return RngKey{seed, replica, generation, 0};
}

namespace {

// Segment governing the transition out of `step`.
const KeySegment& segment_for(const std::vector<KeySegment>& lineage, std::uint64_t step) {
  auto it = std::upper_bound(lineage.begin(), lineage.end(), step,
                             [](std::uint64_t s, const KeySegment& seg) { return s < seg.first_step; });
  if (it == lineage.begin()) throw std::logic_error("rng lineage does not cover step " + std::to_string(step));
  return *(it - 1);
}

std::optional<StopReason> absorbed(const AmsConfig& cfg, double level) {
  if (level < cfg.z_a) return StopReason::hit_a;
  if (level > cfg.z_b) return StopReason::hit_b;
  return std::nullopt;
}

}  // namespace

StoppedRun run_until_absorbed(const AmsConfig& cfg, Stepper& stepper, std::span<const double> x_start,
                              std::uint64_t start_step, std::vector<KeySegment> lineage) {
  if (lineage.empty()) throw std::invalid_argument("run_until_absorbed: empty rng lineage");
  StoppedRun run;
  run.dim = x_start.size();
  run.stride = cfg.path_stride;
  run.rng_lineage = std::move(lineage);
  State x(x_start.begin(), x_start.end());
  std::uint64_t step = start_step;
  double level = cfg.reaction(x);
  run.push(step, x, level);
  for (;;) {
    if (auto r = absorbed(cfg, level)) {
      run.stop_reason = *r;
      return run;
    }
    if (step >= cfg.max_steps_per_run) {
      if (run.final_step() != step) run.push(step, x, level);
      run.stop_reason = StopReason::max_steps;
      throw AbsorbedTimeout("run not absorbed after " + std::to_string(step) + " steps", std::move(run));
    }
    stepper.step(x, segment_for(run.rng_lineage, step).key.at_step(step));
    ++step;
    level = cfg.reaction(x);
    if (step % cfg.path_stride == 0 || absorbed(cfg, level)) run.push(step, x, level);
  }
}

StoppedRun run_until_absorbed(const AmsConfig& cfg, std::span<const double> x_start, std::uint64_t start_step,
                              std::vector<KeySegment> lineage) {
  Stepper stepper(cfg.stepper);
  check_state(cfg.stepper.params, x_start);
  return run_until_absorbed(cfg, stepper, x_start, start_step, std::move(lineage));
}

StoppedRun replay_run(const AmsConfig& cfg, const StoppedRun& run) {
  if (run.size() == 0) throw std::invalid_argument("replay_run: empty run");
  return run_until_absorbed(cfg, run.state(0), run.steps.front(), run.rng_lineage);
}

DirectMcResult direct_mc_estimate(const AmsConfig& cfg, std::uint64_t n_samples) {
  if (n_samples < 1) throw std::invalid_argument("direct_mc_estimate: n_samples must be >= 1");
  if (n_samples > 0xFFFFFFFFull) throw std::invalid_argument("direct_mc_estimate: at most 2^32 samples");
  cfg.validate();

  constexpr std::uint64_t chunk = 1024;
  const std::size_t chunks = static_cast<std::size_t>((n_samples + chunk - 1) / chunk);
  const std::size_t workers = cfg.workers ? cfg.workers : default_worker_count();
  std::vector<std::optional<Stepper>> steppers(std::min(workers, chunks));
  std::vector<std::uint64_t> hits(chunks, 0), steps(chunks, 0);

  parallel_for(chunks, workers, [&](std::size_t c, std::size_t w) {
    if (!steppers[w]) steppers[w].emplace(cfg.stepper);
    Stepper& stepper = *steppers[w];
    State x;
    const std::uint64_t end = std::min<std::uint64_t>(n_samples, (c + 1) * chunk);
    for (std::uint64_t s = c * chunk; s < end; ++s) {
      const RngKey key = replica_key(cfg.master_seed, static_cast<std::uint32_t>(s), direct_mc_generation);
      x = cfg.x0;
      double level = cfg.reaction(x);
      std::uint64_t step = 0;
      std::optional<StopReason> r;
      while (!(r = absorbed(cfg, level))) {
        if (step >= cfg.max_steps_per_run) {
          StoppedRun partial;
          partial.dim = x.size();
          partial.rng_lineage = {KeySegment{key, 0}};
          partial.push(step, x, level);
          throw AbsorbedTimeout("direct MC sample " + std::to_string(s) + " not absorbed after " +
                                    std::to_string(step) + " steps",
                                std::move(partial));
        }
        stepper.step(x, key.at_step(step));
        ++step;
        level = cfg.reaction(x);
      }
      steps[c] += step;
      if (*r == StopReason::hit_b) ++hits[c];
    }
  });

  DirectMcResult res;
  res.samples = n_samples;
  for (std::size_t c = 0; c < chunks; ++c) {
    res.hits += hits[c];
    res.total_steps += steps[c];
  }
  const double n = static_cast<double>(n_samples);
  res.p_hat = static_cast<double>(res.hits) / n;
  res.std_err = std::sqrt(res.p_hat * (1.0 - res.p_hat) / n);
  return res;
}

std::vector<State> crossing_positions(const StoppedRun& run, double level) {
  if (run.size() == 0) throw std::invalid_argument("crossing_positions: empty run");
  std::vector<State> out;
  for (std::size_t k = 0; k + 1 < run.size(); ++k) {
    const double a = run.levels[k], b = run.levels[k + 1];
    if ((a < level) == (b < level)) continue;
    const double theta = (level - a) / (b - a);
    const auto xa = run.state(k), xb = run.state(k + 1);
    State s(run.dim);
    for (std::size_t i = 0; i < run.dim; ++i) s[i] = xa[i] + theta * (xb[i] - xa[i]);
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace ams
