#include "ams/experiments.hpp"

#include <bit>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "ams/bifurcation.hpp"
#include "ams/parallel.hpp"

#ifndef AMS_VERSION
#define AMS_VERSION "dev"
#endif

namespace ams {

namespace fs = std::filesystem;

static_assert(std::endian::native == std::endian::little, "trajectory files assume a little-endian host");

std::string to_string(RealizationStatus s) {
  switch (s) {
    case RealizationStatus::ok: return "ok";
    case RealizationStatus::extinction: return "extinction";
    case RealizationStatus::not_converged: return "not_converged";
    case RealizationStatus::timeout: return "timeout";
  }
  return "?";
}

int EstimateSummary::exit_code() const {
  if (timeouts > 0) return exit_code::timeout;
  if (extinctions + not_converged > 0) return exit_code::algorithm_failure;
  return exit_code::ok;
}

std::uint64_t realization_seed(std::uint64_t seed, std::size_t r) {
  return mix_seed(seed, r);
}

EstimateSummary summarize(std::vector<RealizationResult> results) {
  EstimateSummary s;
  std::vector<double> est;
  double iters = 0;
  for (const auto& r : results) {
    s.total_steps += r.total_steps;
    switch (r.status) {
      case RealizationStatus::ok:
        est.push_back(r.estimate);
        iters += static_cast<double>(r.q_iterations);
        s.tie_events += r.tie_events;
        break;
      case RealizationStatus::extinction: ++s.extinctions; break;
      case RealizationStatus::not_converged: ++s.not_converged; break;
      case RealizationStatus::timeout: ++s.timeouts; break;
    }
  }
  s.succeeded = est.size();
  if (!est.empty()) {
    s.mean = stats::mean(est);
    s.std = stats::sample_std(est);
    s.mean_iterations = iters / static_cast<double>(est.size());
  } else {
    s.mean = s.std = s.mean_iterations = std::nan("");
  }
  s.realizations = std::move(results);
  return s;
}

EstimateSummary run_realizations(const AmsConfig& base, std::size_t n_mc, std::uint64_t seed, std::size_t workers,
                                 const AmsObserver& observer) {
  if (n_mc == 0) throw std::invalid_argument("run_realizations: n_mc must be positive");
  base.validate();
  const auto start = std::chrono::steady_clock::now();
  std::vector<RealizationResult> results(n_mc);
  parallel_for(n_mc, workers == 0 ? default_worker_count() : workers, [&](std::size_t r, std::size_t) {
    AmsConfig cfg = base;
    cfg.master_seed = realization_seed(seed, r);
    cfg.workers = 1;
    RealizationResult& out = results[r];
    out.index = r;
    out.seed = cfg.master_seed;
    try {
      const AmsOutput o = ams_estimate(cfg);
      out.estimate = o.estimate;
      out.q_iterations = o.q_iterations;
      out.tie_events = o.tie_events;
      out.total_steps = o.total_steps;
      out.final_partial = !o.kill_log.empty() && o.kill_log.back().final_partial;
      if (observer) observer(r, cfg, o);
    } catch (const ExtinctionError& e) {
      out.status = RealizationStatus::extinction;
      out.q_iterations = e.iteration;
    } catch (const NotConverged&) {
      out.status = RealizationStatus::not_converged;
    } catch (const AbsorbedTimeout&) {
      out.status = RealizationStatus::timeout;
    }
  });
  EstimateSummary s = summarize(std::move(results));
  s.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return s;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

namespace {

class Csv {
 public:
  Csv(const fs::path& path, const std::string& id, const std::vector<std::string>& header) : out_(path) {
    if (!out_) throw std::runtime_error("cannot write " + path.string());
    out_ << "# manifest_id=" << id << "\n";
    row(header);
  }

  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
    out_ << "\n";
  }

 private:
  std::ofstream out_;
};

std::string fmt(double v) { return format_double(v); }
std::string fmt(std::uint64_t v) { return std::to_string(v); }

const std::vector<std::string> param_columns{"model", "n", "gamma", "epsilon", "dt", "dx", "n_rep", "k_rep", "seed"};

std::vector<std::string> param_cells(const RunConfig& cfg, const AmsConfig& a) {
  const ModelParams& p = a.stepper.params;
  return {to_string(p.kind), fmt(std::uint64_t(p.n)), fmt(p.gamma), fmt(p.epsilon), fmt(p.dt), fmt(p.dx()),
          fmt(std::uint64_t(a.n_rep)), fmt(std::uint64_t(a.k_rep)), fmt(cfg.seed)};
}

std::vector<std::string> concat(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

const std::vector<std::string> estimate_columns{"n_mc",      "estimate_mean", "estimate_std", "mean_iterations",
                                                "succeeded", "extinctions",   "not_converged", "timeouts",
                                                "tie_events", "total_steps"};

std::vector<std::string> estimate_cells(const RunConfig& cfg, const EstimateSummary& s) {
  return {fmt(std::uint64_t(cfg.n_mc)),      fmt(s.mean),
          fmt(s.std),                        fmt(s.mean_iterations),
          fmt(std::uint64_t(s.succeeded)),   fmt(std::uint64_t(s.extinctions)),
          fmt(std::uint64_t(s.not_converged)), fmt(std::uint64_t(s.timeouts)),
          fmt(std::uint64_t(s.tie_events)),  fmt(s.total_steps)};
}

void write_realizations(const fs::path& path, const std::string& id, const EstimateSummary& s, double epsilon,
                        bool first) {
  std::ofstream out;
  if (first) {
    Csv csv(path, id,
            {"epsilon", "realization", "seed", "status", "estimate", "q_iterations", "tie_events", "final_partial",
             "total_steps"});
  }
  out.open(path, std::ios::app);
  for (const auto& r : s.realizations) {
    out << fmt(epsilon) << "," << r.index << "," << r.seed << "," << to_string(r.status) << ","
        << (r.status == RealizationStatus::ok ? fmt(r.estimate) : "nan") << "," << r.q_iterations << ","
        << r.tie_events << "," << (r.final_partial ? 1 : 0) << "," << r.total_steps << "\n";
  }
}

CommandResult do_estimate(const RunConfig& cfg, const fs::path& out, const std::string& id) {
  const EstimateSummary s = run_realizations(cfg.ams, cfg.n_mc, cfg.seed);
  Csv csv(out / "summary.csv", id, concat(param_columns, estimate_columns));
  csv.row(concat(param_cells(cfg, cfg.ams), estimate_cells(cfg, s)));
  write_realizations(out / "realizations.csv", id, s, cfg.ams.stepper.params.epsilon, true);
  CommandResult r{s.exit_code(), {}, {"summary.csv", "realizations.csv"}};
  std::ostringstream msg;
  msg << "estimate " << fmt(s.mean) << " std " << fmt(s.std) << " over " << s.succeeded << "/" << cfg.n_mc
      << " realizations";
  if (s.succeeded < cfg.n_mc)
    msg << " (extinction " << s.extinctions << ", not converged " << s.not_converged << ", timeout " << s.timeouts
        << ")";
  r.message = msg.str();
  return r;
}

CommandResult do_direct_mc(const RunConfig& cfg, const fs::path& out, const std::string& id) {
  const DirectMcResult m = direct_mc_estimate(cfg.ams, cfg.mc_samples);
  Csv csv(out / "summary.csv", id,
          concat(param_columns, {"samples", "hits", "p_hat", "std_err", "total_steps"}));
  csv.row(concat(param_cells(cfg, cfg.ams), {fmt(m.samples), fmt(m.hits), fmt(m.p_hat), fmt(m.std_err),
                                             fmt(m.total_steps)}));
  return {exit_code::ok, "p_hat " + fmt(m.p_hat) + " +- " + fmt(m.std_err), {"summary.csv"}};
}

CommandResult do_sweep(const RunConfig& cfg, const fs::path& out, const std::string& id) {
  if (cfg.epsilons.size() < 3)
    throw ConfigError(cfg.source.origin("run.epsilons") + ": run.epsilons: need at least 3 values");
  CommandResult r{exit_code::ok, {}, {"summary.csv", "realizations.csv"}};
  Csv csv(out / "summary.csv", id, concat(param_columns, estimate_columns));
  std::vector<double> inv, logp;
  for (std::size_t i = 0; i < cfg.epsilons.size(); ++i) {
    AmsConfig a = cfg.ams;
    a.stepper.params.epsilon = cfg.epsilons[i];
    const EstimateSummary s = run_realizations(a, cfg.n_mc, cfg.seed);
    csv.row(concat(param_cells(cfg, a), estimate_cells(cfg, s)));
    write_realizations(out / "realizations.csv", id, s, cfg.epsilons[i], i == 0);
    if (s.exit_code() != exit_code::ok) {
      r.exit_code = s.exit_code();
      r.message = "epsilon " + fmt(cfg.epsilons[i]) + " failed; partial results saved, no fit written";
      return r;
    }
    inv.push_back(1.0 / cfg.epsilons[i]);
    logp.push_back(std::log(s.mean));
  }
  const auto f = stats::least_squares(inv, logp);
  Csv fit(out / "fit.csv", id, {"points", "slope", "intercept", "r_squared"});
  fit.row({fmt(std::uint64_t(inv.size())), fmt(f.slope), fmt(f.intercept), fmt(f.r_squared)});
  r.files.push_back("fit.csv");
  r.message = "log p = " + fmt(f.slope) + " / eps + " + fmt(f.intercept) + ", R^2 = " + fmt(f.r_squared);
  return r;
}

CommandResult do_trajectories(const RunConfig& cfg, const fs::path& out, const std::string& id) {
  AmsConfig a = cfg.ams;
  a.master_seed = cfg.seed;
  const AmsOutput o = ams_estimate(a);
  CommandResult r{exit_code::ok, {}, {"summary.csv"}};

  const std::size_t count = cfg.max_trajectories == 0
                                ? o.reactive_trajectories.size()
                                : std::min(cfg.max_trajectories, o.reactive_trajectories.size());
  const double dt = a.stepper.params.dt;
  for (std::size_t i = 0; i < count; ++i) {
    const std::string name = "traj_" + std::to_string(i) + "." + cfg.traj_format;
    if (cfg.traj_format == "bin")
      write_trajectory_bin(out / name, o.reactive_trajectories[i], dt);
    else
      write_trajectory_csv(out / name, o.reactive_trajectories[i], dt);
    r.files.push_back(name);
  }

  // For two particles, the crossing positions on the line x + y = 2 * level, by first coordinate.
  std::vector<double> crossings;
  if (a.stepper.params.n == 2)
    for (const auto& run : o.reactive_trajectories)
      for (const auto& x : crossing_positions(run, cfg.crossing_level)) crossings.push_back(x[0]);

  std::vector<std::string> cells{fmt(o.estimate), fmt(std::uint64_t(o.q_iterations)),
                                 fmt(std::uint64_t(o.tie_events)), fmt(std::uint64_t(count)),
                                 fmt(std::uint64_t(crossings.size()))};
  if (crossings.size() >= 4) {
    const auto h = stats::histogram(crossings, cfg.hist_bins ? std::optional<std::size_t>(cfg.hist_bins)
                                                             : std::nullopt);
    Csv hist(out / "hist.csv", id, {"bin_lower", "bin_upper", "bin_center", "count"});
    for (std::size_t b = 0; b < h.counts.size(); ++b)
      hist.row({fmt(h.edges[b]), fmt(h.edges[b + 1]), fmt(h.center(b)), fmt(h.counts[b])});
    r.files.push_back("hist.csv");
    const auto dip = stats::dip_test(crossings, 2000, cfg.seed);
    for (double v : {stats::mean(crossings), stats::sample_std(crossings), dip.dip, dip.p_value}) cells.push_back(fmt(v));
  } else {
    for (int k = 0; k < 4; ++k) cells.push_back("nan");
  }
  Csv csv(out / "summary.csv", id,
          concat(param_columns, {"estimate", "q_iterations", "tie_events", "trajectories", "crossings",
                                 "crossing_mean", "crossing_std", "dip", "dip_p_value"}));
  csv.row(concat(param_cells(cfg, a), cells));
  r.message = "estimate " + fmt(o.estimate) + ", " + std::to_string(count) + " trajectories, " +
              std::to_string(crossings.size()) + " crossings";
  return r;
}

CommandResult do_bifurcation(const RunConfig& cfg, const fs::path& out, const std::string& id) {
  if (cfg.kappas.empty() && cfg.spectrum_gammas.empty())
    throw ConfigError(cfg.source.origin("run.kappas") + ": run.kappas: give at least one value");
  Csv points(out / "critical_points.csv", id,
             {"kappa", "regime", "x", "y", "classification", "eig_min", "eig_max", "residual"});
  Csv summary(out / "summary.csv", id, {"kappa", "regime", "points", "minima", "saddles", "maxima"});
  Csv spectrum(out / "spectrum.csv", id, {"n", "gamma", "kappa", "index", "eigenvalue"});
  for (double kappa : cfg.kappas) {
    const bif::Regime regime = bif::classify_regime_2d(kappa);
    const auto pts = bif::critical_points_2d(kappa);
    std::uint64_t counts[3] = {0, 0, 0};
    for (const auto& p : pts) {
      if (p.classification != bif::PointClass::degenerate) ++counts[static_cast<int>(p.classification)];
      points.row({fmt(kappa), bif::to_string(regime), fmt(p.location[0]), fmt(p.location[1]),
                  bif::to_string(p.classification), fmt(p.hessian_eigenvalues.front()),
                  fmt(p.hessian_eigenvalues.back()), fmt(p.residual)});
    }
    summary.row({fmt(kappa), bif::to_string(regime), fmt(std::uint64_t(pts.size())), fmt(counts[0]), fmt(counts[1]),
                 fmt(counts[2])});
    const double gamma = gamma_from_kappa(2, kappa);
    const auto sp = bif::hessian_spectrum_origin(2, gamma);
    for (std::size_t i = 0; i < sp.size(); ++i)
      spectrum.row({"2", fmt(gamma), fmt(kappa), fmt(std::uint64_t(i)), fmt(sp[i])});
  }
  for (double gamma : cfg.spectrum_gammas) {
    const auto sp = bif::hessian_spectrum_origin(cfg.spectrum_n, gamma);
    for (std::size_t i = 0; i < sp.size(); ++i)
      spectrum.row({fmt(std::uint64_t(cfg.spectrum_n)), fmt(gamma), fmt(kappa_from_gamma(cfg.spectrum_n, gamma)),
                    fmt(std::uint64_t(i)), fmt(sp[i])});
  }
  return {exit_code::ok, std::to_string(cfg.kappas.size()) + " parameter values tabulated",
          {"critical_points.csv", "summary.csv", "spectrum.csv"}};
}

using Body = CommandResult (*)(const RunConfig&, const fs::path&, const std::string&);

CommandResult execute(const std::string& experiment, const RunConfig& cfg, const fs::path& out, Body body) {
  const auto start = std::chrono::steady_clock::now();
  const std::string id = manifest_id(experiment, cfg.source);
  CommandResult r;
  try {
    fs::create_directories(out);
    r = body(cfg, out, id);
  } catch (const ConfigError& e) {
    r = {exit_code::config_error, e.what(), {}};
  } catch (const std::invalid_argument& e) {
    r = {exit_code::config_error, e.what(), {}};
  } catch (const ExtinctionError& e) {
    r = {exit_code::algorithm_failure, e.what(), {}};
  } catch (const NotConverged& e) {
    r = {exit_code::algorithm_failure, e.what(), {}};
  } catch (const AbsorbedTimeout& e) {
    r = {exit_code::timeout, e.what(), {}};
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  nlohmann::ordered_json m;
  m["experiment"] = experiment;
  m["manifest_id"] = id;
  m["version"] = AMS_VERSION;
  m["master_seed"] = cfg.seed;
  nlohmann::ordered_json conf = nlohmann::ordered_json::object();
  for (const auto& [k, v] : cfg.source.values()) conf[k] = v;
  m["config"] = conf;
  m["wall_seconds"] = wall;
  m["exit_code"] = r.exit_code;
  m["message"] = r.message;
  m["files"] = r.files;
  std::error_code ec;
  fs::create_directories(out, ec);
  std::ofstream(out / "manifest.json") << m.dump(2) << "\n";
  r.files.push_back("manifest.json");
  return r;
}

}  // namespace

CommandResult cmd_estimate(const RunConfig& cfg, const fs::path& out) {
  return execute("estimate", cfg, out, do_estimate);
}
CommandResult cmd_direct_mc(const RunConfig& cfg, const fs::path& out) {
  return execute("direct-mc", cfg, out, do_direct_mc);
}
CommandResult cmd_sweep_epsilon(const RunConfig& cfg, const fs::path& out) {
  return execute("sweep-epsilon", cfg, out, do_sweep);
}
CommandResult cmd_trajectories(const RunConfig& cfg, const fs::path& out) {
  return execute("trajectories", cfg, out, do_trajectories);
}
CommandResult cmd_bifurcation(const RunConfig& cfg, const fs::path& out) {
  return execute("bifurcation", cfg, out, do_bifurcation);
}

CommandResult run_command(const std::string& experiment, const RunConfig& cfg, const fs::path& out) {
  if (experiment == "estimate") return cmd_estimate(cfg, out);
  if (experiment == "direct-mc") return cmd_direct_mc(cfg, out);
  if (experiment == "sweep-epsilon") return cmd_sweep_epsilon(cfg, out);
  if (experiment == "trajectories") return cmd_trajectories(cfg, out);
  if (experiment == "bifurcation") return cmd_bifurcation(cfg, out);
  return {exit_code::config_error, "unknown experiment '" + experiment + "'", {}};
}

CommandResult replay_manifest(const fs::path& manifest, const fs::path& out) {
  std::ifstream in(manifest);
  if (!in) return {exit_code::config_error, "cannot open " + manifest.string(), {}};
  try {
    const auto m = nlohmann::json::parse(in);
    ConfigMap map;
    for (const auto& [k, v] : m.at("config").items()) map.set(k, v.get<std::string>(), manifest.string());
    return run_command(m.at("experiment").get<std::string>(), resolve(map), out);
  } catch (const nlohmann::json::exception& e) {
    return {exit_code::config_error, manifest.string() + ": " + e.what(), {}};
  } catch (const ConfigError& e) {
    return {exit_code::config_error, e.what(), {}};
  }
}

void write_trajectory_csv(const fs::path& path, const StoppedRun& run, double dt) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "step,time";
  for (std::size_t i = 0; i < run.dim; ++i) out << ",x" << i;
  out << "\n";
  for (std::size_t k = 0; k < run.size(); ++k) {
    out << run.steps[k] << "," << format_double(static_cast<double>(run.steps[k]) * dt);
    for (double v : run.state(k)) out << "," << format_double(v);
    out << "\n";
  }
}

namespace {
constexpr char traj_magic[8] = {'A', 'M', 'S', 'T', 'R', 'A', 'J', '\0'};
constexpr std::uint32_t traj_version = 1;

template <class T>
void put(std::ofstream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}
}  // namespace

void write_trajectory_bin(const fs::path& path, const StoppedRun& run, double dt) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(traj_magic, sizeof traj_magic);
  put(out, traj_version);
  put(out, run.stride);
  put(out, static_cast<std::uint64_t>(run.dim));
  put(out, static_cast<std::uint64_t>(run.size()));
  for (std::size_t k = 0; k < run.size(); ++k) {
    put(out, static_cast<double>(run.steps[k]) * dt);
    const auto x = run.state(k);
    out.write(reinterpret_cast<const char*>(x.data()), static_cast<std::streamsize>(x.size() * sizeof(double)));
  }
}

TrajectoryFile read_trajectory_bin(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  char magic[8];
  if (!in.read(magic, sizeof magic) || std::memcmp(magic, traj_magic, sizeof magic) != 0)
    throw std::runtime_error(path.string() + ": not a trajectory file");
  TrajectoryFile f;
  std::uint64_t rows = 0;
  in.read(reinterpret_cast<char*>(&f.version), sizeof f.version);
  in.read(reinterpret_cast<char*>(&f.stride), sizeof f.stride);
  in.read(reinterpret_cast<char*>(&f.dim), sizeof f.dim);
  in.read(reinterpret_cast<char*>(&rows), sizeof rows);
  if (!in || f.version != traj_version) throw std::runtime_error(path.string() + ": bad header");
  f.rows.resize(rows * (f.dim + 1));
  if (!in.read(reinterpret_cast<char*>(f.rows.data()), static_cast<std::streamsize>(f.rows.size() * sizeof(double))))
    throw std::runtime_error(path.string() + ": truncated");
  return f;
}

}  // namespace ams
