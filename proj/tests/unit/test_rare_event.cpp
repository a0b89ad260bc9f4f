#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ams/rare_event.hpp"
#include "ams/stats.hpp"

using namespace ams;

namespace {

AmsConfig toy(std::size_t n_rep = 20, std::size_t k_rep = 1, std::uint64_t seed = 1) {
  AmsConfig c;
  c.stepper.params = ModelParams::chain(1, 0.0, 0.08, 0.01);
  c.x0 = {-0.8};
  c.z_a = -0.9;
  c.z_b = 0.9;
  c.n_rep = n_rep;
  c.k_rep = k_rep;
  c.master_seed = seed;
  c.workers = 1;
  return c;
}

AmsConfig small_grid(std::uint64_t seed = 3) {
  AmsConfig c;
  c.stepper.params = ModelParams::grid_with_spacing(0.1, 1.0, 0.1, 0.02);
  c.x0 = State(c.stepper.params.n, -0.8);
  c.z_a = -0.95;
  c.z_b = 0.95;
  c.n_rep = 10;
  c.master_seed = seed;
  c.workers = 1;
  return c;
}

bool prefix_equal(const StoppedRun& a, const StoppedRun& b, std::size_t count) {
  if (a.size() < count || b.size() < count) return false;
  return std::equal(a.steps.begin(), a.steps.begin() + count, b.steps.begin()) &&
         std::equal(a.states.begin(), a.states.begin() + count * a.dim, b.states.begin());
}

void check_contracts(const AmsConfig& cfg, const AmsOutput& out) {
  CHECK(out.estimate == estimate_from_kill_log(out.kill_log, cfg.n_rep));
  const bool partial = !out.kill_log.empty() && out.kill_log.back().final_partial;
  if (out.tie_events == 0 && !partial)
    CHECK(out.estimate == std::pow(1.0 - double(cfg.k_rep) / cfg.n_rep, double(out.q_iterations)));
  CHECK(std::abs(std::log(out.estimate) - out.log_estimate) < 1e-9);
  for (std::size_t i = 1; i < out.kill_log.size(); ++i) CHECK(out.kill_log[i].level > out.kill_log[i - 1].level);
  REQUIRE(out.reactive_trajectories.size() == cfg.n_rep);
  for (const auto& r : out.reactive_trajectories) {
    CHECK(r.stop_reason == StopReason::hit_b);
    CHECK(std::equal(cfg.x0.begin(), cfg.x0.end(), r.state(0).begin()));
    CHECK(r.steps.front() == 0);
    for (std::size_t k = 0; k + 1 < r.size(); ++k) {
      CHECK(r.levels[k] >= cfg.z_a);
      CHECK(r.levels[k] <= cfg.z_b);
    }
    CHECK(r.final_level() > cfg.z_b);
    CHECK(r.max_level == *std::max_element(r.levels.begin(), r.levels.end()));
  }
}

}  // namespace

TEST_SUITE("rare_event") {
  TEST_CASE("reaction coordinate") {
    ReactionCoordinate rc;
    CHECK(xi(rc, State(7, -0.8)) == doctest::Approx(-0.8).epsilon(1e-14));
    CHECK(std::abs(xi(rc, State(13, 0.37)) - 0.37) < 1e-14);
    CHECK(xi(rc, State{1.0, -1.0}) == 0.0);
    CHECK(xi(rc, State(51, 1.0)) == 1.0);
  }

  TEST_CASE("runs stop at the first absorption") {
    AmsConfig c = small_grid();
    c.z_a = -0.99;
    c.z_b = 0.99;
    const auto r = run_until_absorbed(c, State(c.stepper.params.n, -0.995), 0, {KeySegment{RngKey{}, 0}});
    CHECK(r.stop_reason == StopReason::hit_a);
    CHECK(r.size() == 1);

    for (auto cold : {toy(), small_grid()}) {
      cold.stepper.params.epsilon = 0.0;
      const auto d = run_until_absorbed(cold, cold.x0, 0, {KeySegment{RngKey{}, 0}});
      CHECK(d.stop_reason == StopReason::hit_a);
      CHECK(d.final_level() < cold.z_a);
      CHECK(d.max_level == doctest::Approx(-0.8));
    }

    AmsConfig hot = toy();
    const auto h = run_until_absorbed(hot, hot.x0, 0, {KeySegment{RngKey{5, 0, 0, 0}, 0}});
    CHECK((h.stop_reason == StopReason::hit_b) == (h.final_level() > hot.z_b));
    CHECK((h.stop_reason == StopReason::hit_a) == (h.final_level() < hot.z_a));
    CHECK(h.size() == h.final_step() + 1);
  }

  TEST_CASE("timeout carries the partial run") {
    AmsConfig c = toy();
    c.stepper.params.epsilon = 0.0;
    c.x0 = {0.0};  // unstable rest point: never absorbs without noise
    c.max_steps_per_run = 50;
    try {
      run_until_absorbed(c, c.x0, 0, {KeySegment{RngKey{}, 0}});
      FAIL("expected a timeout");
    } catch (const AbsorbedTimeout& e) {
      CHECK(e.partial_run.stop_reason == StopReason::max_steps);
      CHECK(e.partial_run.final_step() == 50);
    }
    CHECK_THROWS_AS(ams_estimate(c), AbsorbedTimeout);
  }

  TEST_CASE("configuration validation") {
    AmsConfig c = toy();
    c.x0 = {-0.95};
    CHECK_THROWS_AS(ams_estimate(c), std::invalid_argument);
    c = toy();
    c.k_rep = c.n_rep;
    CHECK_THROWS_AS(ams_estimate(c), std::invalid_argument);
    c = toy();
    c.n_rep = 1;
    c.k_rep = 0;
    CHECK_THROWS_AS(ams_estimate(c), std::invalid_argument);
  }

  TEST_CASE("no killing when every replica reaches B") {
    AmsConfig c = toy();
    c.stepper.params.epsilon = 0.0;
    c.x0 = {0.2};
    const auto out = ams_estimate(c);
    CHECK(out.q_iterations == 0);
    CHECK(out.estimate == 1.0);
    CHECK(out.initial_hits_b == c.n_rep);
  }

  TEST_CASE("identical replicas cannot branch") {
    AmsConfig c = toy();
    c.stepper.params.epsilon = 0.0;
    try {
      ams_estimate(c);
      FAIL("expected extinction");
    } catch (const ExtinctionError& e) {
      CHECK(e.iteration == 1);
    }
  }

  TEST_CASE("iteration cap") {
    AmsConfig c = toy();
    c.stepper.params.epsilon = 0.03;
    c.max_iterations = 2;
    CHECK_THROWS_AS(ams_estimate(c), NotConverged);
  }

  TEST_CASE("estimator and trajectory contracts") {
    for (std::size_t k : {1u, 5u}) {
      for (std::uint64_t seed : {1u, 2u, 3u}) {
        const AmsConfig c = toy(20, k, seed);
        const auto out = ams_estimate(c);
        check_contracts(c, out);
        CHECK(out.estimate > 0.0);
        CHECK(out.estimate <= 1.0);
      }
    }
    const AmsConfig g = small_grid();
    check_contracts(g, ams_estimate(g));
  }

  TEST_CASE("branched paths replay from their key lineage") {
    const AmsConfig c = toy(10, 2, 7);
    const auto out = ams_estimate(c);
    REQUIRE(out.q_iterations > 0);
    for (const auto& r : out.reactive_trajectories) {
      const auto again = replay_run(c, r);
      CHECK(again.steps == r.steps);
      CHECK(again.states == r.states);
    }
    // The first kept state past the prefix lies strictly above the kill level.
    for (const auto& rec : out.kill_log) {
      if (rec.final_partial) continue;
      for (std::size_t j = 0; j < rec.killed.size(); ++j) CHECK(rec.cloned_from[j] != rec.killed[j]);
    }
  }

  TEST_CASE("branching copies the donor prefix") {
    // Run one iteration by hand: the fresh replica must share the donor's states up to the
    // branch step, and its state there must exceed the kill level.
    const AmsConfig c = toy(8, 1, 11);
    std::vector<StoppedRun> initial;
    for (std::uint32_t i = 0; i < c.n_rep; ++i)
      initial.push_back(run_until_absorbed(c, c.x0, 0, {KeySegment{replica_key(c.master_seed, i, 0), 0}}));
    const auto out = ams_estimate(c);
    const KillRecord& first = out.kill_log.front();
    const std::size_t donor = first.cloned_from.front();
    const std::size_t slot = first.killed.front();
    const std::uint64_t b = first.branch_step.front();
    CHECK(initial[donor].levels[b] > first.level);
    for (std::uint64_t k = 0; k < b; ++k) CHECK(initial[donor].levels[k] <= first.level);
    CHECK(initial[slot].max_level == first.level);
    // Replay the branched replica from its lineage: prefix equals the donor's initial path.
    StoppedRun branched = initial[donor];
    branched.truncate(b + 1);
    branched.rng_lineage = {KeySegment{replica_key(c.master_seed, std::uint32_t(donor), 0), 0},
                            KeySegment{replica_key(c.master_seed, std::uint32_t(slot), 1), b}};
    const auto replayed = replay_run(c, branched);
    CHECK(prefix_equal(replayed, initial[donor], b + 1));
  }

  TEST_CASE("thinned paths branch at kept steps") {
    AmsConfig c = toy(10, 1, 4);
    c.path_stride = 5;
    const auto out = ams_estimate(c);
    check_contracts(c, out);
    for (const auto& rec : out.kill_log)
      for (auto b : rec.branch_step) CHECK(b % 5 == 0);
    for (const auto& r : out.reactive_trajectories)
      for (std::size_t k = 0; k + 1 < r.size(); ++k) CHECK(r.steps[k] % 5 == 0);
  }

  TEST_CASE("results do not depend on the worker count") {
    AmsConfig c = toy(30, 3, 5);
    c.workers = 1;
    const auto a = ams_estimate(c);
    c.workers = 4;
    const auto b = ams_estimate(c);
    CHECK(a.estimate == b.estimate);
    CHECK(a.q_iterations == b.q_iterations);
    CHECK(a.tie_events == b.tie_events);
    for (std::size_t i = 0; i < a.reactive_trajectories.size(); ++i)
      CHECK(a.reactive_trajectories[i].states == b.reactive_trajectories[i].states);
    AmsConfig d = toy();
    d.workers = 1;
    const auto m1 = direct_mc_estimate(d, 5000);
    d.workers = 3;
    const auto m3 = direct_mc_estimate(d, 5000);
    CHECK(m1.hits == m3.hits);
    CHECK(m1.total_steps == m3.total_steps);
  }

  TEST_CASE("direct Monte Carlo edge cases") {
    AmsConfig c = toy();
    CHECK_THROWS_AS(direct_mc_estimate(c, 0), std::invalid_argument);
    const auto one = direct_mc_estimate(c, 1);
    CHECK((one.p_hat == 0.0 || one.p_hat == 1.0));
    CHECK(one.std_err == 0.0);
    c.stepper.params.epsilon = 0.0;
    const auto cold = direct_mc_estimate(c, 100);
    CHECK(cold.p_hat == 0.0);
    CHECK(cold.std_err == 0.0);
  }

  TEST_CASE("AMS agrees with direct Monte Carlo on the toy model") {
    const std::uint64_t samples = 200000;
    const auto mc = direct_mc_estimate(toy(), samples);
    for (std::size_t k : {1u, 5u}) {
      std::vector<double> est;
      for (std::uint64_t r = 0; r < 300; ++r) est.push_back(ams_estimate(toy(20, k, mix_seed(99, r))).estimate);
      const double m = stats::mean(est);
      const double se = std::hypot(stats::sample_std(est) / std::sqrt(double(est.size())), mc.std_err);
      CHECK(std::abs(m - mc.p_hat) <= 3 * se);
    }
  }

  TEST_CASE("crossing positions") {
    StoppedRun up;
    up.dim = 2;
    for (int k = 0; k <= 20; ++k) {
      const double v = -0.8 + k * 0.09;
      up.push(k, State{v, v + 0.01 * k}, (2 * v + 0.01 * k) / 2);
    }
    const auto cr = crossing_positions(up, 0.0);
    REQUIRE(cr.size() == 1);
    CHECK(std::abs(xi(ReactionCoordinate{}, cr[0])) < 1e-12);

    StoppedRun low;
    low.dim = 1;
    for (int k = 0; k < 10; ++k) low.push(k, State{-0.9 + 0.01 * k}, -0.9 + 0.01 * k);
    CHECK(crossing_positions(low, 0.0).empty());
    CHECK_THROWS_AS(crossing_positions(StoppedRun{}, 0.0), std::invalid_argument);
  }
}
