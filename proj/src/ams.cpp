#include <algorithm>
#include <cmath>
#include <map>
#include <optional>

#include "ams/parallel.hpp"
#include "ams/rare_event.hpp"

namespace ams {

namespace {

// Appends the continuation of `donor` past kept index `branch` to a copy of its prefix.
StoppedRun branch_and_resimulate(const AmsConfig& cfg, Stepper& stepper, const StoppedRun& donor,
                                 std::size_t branch, const RngKey& key) {
  const std::uint64_t branch_step = donor.steps[branch];
  std::vector<KeySegment> lineage;
  for (const auto& seg : donor.rng_lineage)
    if (seg.first_step < branch_step) lineage.push_back(seg);
  lineage.push_back(KeySegment{key, branch_step});

  StoppedRun tail = run_until_absorbed(cfg, stepper, donor.state(branch), branch_step, lineage);
  StoppedRun run = donor;
  run.truncate(branch + 1);
  run.rng_lineage = std::move(tail.rng_lineage);
  for (std::size_t k = 1; k < tail.size(); ++k) run.push(tail.steps[k], tail.state(k), tail.levels[k]);
  run.stop_reason = tail.stop_reason;
  return run;
}

std::size_t first_kept_above(const StoppedRun& run, double level) {
  for (std::size_t k = 0; k < run.size(); ++k)
    if (run.levels[k] > level) return k;
  throw std::logic_error("donor never exceeds the kill level");
}

}  // namespace

double estimate_from_kill_log(const std::vector<KillRecord>& log, std::size_t n_rep) {
  // Grouping by kill count makes the no-tie case exactly pow(1 - k/n, Q).
  std::map<std::size_t, int> counts;
  std::optional<std::size_t> partial;
  for (const auto& rec : log) {
    if (rec.final_partial) partial = rec.killed.size();
    else ++counts[rec.killed.size()];
  }
  const double n = static_cast<double>(n_rep);
  double est = 1.0;
  for (const auto& [k, c] : counts) est *= std::pow(1.0 - static_cast<double>(k) / n, c);
  if (partial) est *= 1.0 - static_cast<double>(*partial) / n;
  return est;
}

AmsOutput ams_estimate(const AmsConfig& cfg) {
  cfg.validate();
  const std::size_t n = cfg.n_rep;
  const std::size_t workers = cfg.workers ? cfg.workers : default_worker_count();
  std::vector<std::optional<Stepper>> steppers(std::min(workers, n));
  auto stepper_for = [&](std::size_t w) -> Stepper& {
    if (!steppers[w]) steppers[w].emplace(cfg.stepper);
    return *steppers[w];
  };

  AmsOutput out;
  std::vector<StoppedRun> reps(n);
  parallel_for(n, workers, [&](std::size_t i, std::size_t w) {
    const RngKey key = replica_key(cfg.master_seed, static_cast<std::uint32_t>(i), 0);
    reps[i] = run_until_absorbed(cfg, stepper_for(w), cfg.x0, 0, {KeySegment{key, 0}});
  });
  for (const auto& r : reps) {
    out.total_steps += r.final_step();
    if (r.stop_reason == StopReason::hit_b) ++out.initial_hits_b;
  }

  double log_est = 0.0;
  std::size_t q = 0;
  for (;;) {
    std::vector<double> maxima(n);
    std::size_t short_of_b = 0;
    for (std::size_t i = 0; i < n; ++i) {
      maxima[i] = reps[i].max_level;
      if (reps[i].stop_reason != StopReason::hit_b) ++short_of_b;
    }
    if (short_of_b == 0) break;

    std::vector<double> sorted = maxima;
    std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(cfg.k_rep - 1), sorted.end());
    const double kill_level = sorted[cfg.k_rep - 1];

    KillRecord rec;
    rec.iteration = q + 1;
    rec.level = kill_level;

    if (kill_level > cfg.z_b) {
      // Fewer than k_rep replicas remain short of B.
      std::vector<std::size_t> at_b;
      for (std::size_t i = 0; i < n; ++i) {
        if (reps[i].stop_reason == StopReason::hit_b) at_b.push_back(i);
        else rec.killed.push_back(i);
      }
      const RngKey dkey = replica_key(cfg.master_seed, donor_stream_replica, static_cast<std::uint32_t>(q + 1));
      for (std::size_t j = 0; j < rec.killed.size(); ++j) {
        const std::size_t donor = at_b[uniform_index(dkey.at_step(j), at_b.size())];
        rec.cloned_from.push_back(donor);
        rec.branch_step.push_back(reps[donor].final_step());
      }
      for (std::size_t j = 0; j < rec.killed.size(); ++j) reps[rec.killed[j]] = reps[rec.cloned_from[j]];
      rec.level = cfg.z_b;
      rec.final_partial = true;
      log_est += std::log1p(-static_cast<double>(rec.killed.size()) / static_cast<double>(n));
      out.kill_log.push_back(std::move(rec));
      break;
    }

    std::vector<std::size_t> survivors;
    for (std::size_t i = 0; i < n; ++i) {
      if (maxima[i] <= kill_level) rec.killed.push_back(i);
      else survivors.push_back(i);
    }
    if (survivors.empty())
      throw ExtinctionError("AMS extinction at iteration " + std::to_string(q + 1) +
                                ": no replica exceeds level " + std::to_string(kill_level),
                            q + 1);
    ++q;
    if (q > cfg.max_iterations)
      throw NotConverged("AMS not converged after " + std::to_string(cfg.max_iterations) + " iterations");
    if (rec.killed.size() > cfg.k_rep) ++out.tie_events;
    log_est += std::log1p(-static_cast<double>(rec.killed.size()) / static_cast<double>(n));

    const RngKey dkey = replica_key(cfg.master_seed, donor_stream_replica, static_cast<std::uint32_t>(q));
    std::vector<std::size_t> branch_index(rec.killed.size());
    for (std::size_t j = 0; j < rec.killed.size(); ++j) {
      const std::size_t donor = survivors[uniform_index(dkey.at_step(j), survivors.size())];
      rec.cloned_from.push_back(donor);
      branch_index[j] = first_kept_above(reps[donor], kill_level);
      rec.branch_step.push_back(reps[donor].steps[branch_index[j]]);
    }

    // Donors are survivors, so they are untouched while the killed slots are rewritten.
    std::vector<StoppedRun> fresh(rec.killed.size());
    parallel_for(rec.killed.size(), workers, [&](std::size_t j, std::size_t w) {
      const RngKey key = replica_key(cfg.master_seed, static_cast<std::uint32_t>(rec.killed[j]),
                                     static_cast<std::uint32_t>(q));
      fresh[j] = branch_and_resimulate(cfg, stepper_for(w), reps[rec.cloned_from[j]], branch_index[j], key);
    });
    for (std::size_t j = 0; j < rec.killed.size(); ++j) {
      out.total_steps += fresh[j].final_step() - rec.branch_step[j];
      reps[rec.killed[j]] = std::move(fresh[j]);
    }
    out.kill_log.push_back(std::move(rec));
  }

  out.q_iterations = q;
  out.log_estimate = log_est;
  out.estimate = estimate_from_kill_log(out.kill_log, n);
  out.reactive_trajectories = std::move(reps);
  return out;
}

}  // namespace ams
