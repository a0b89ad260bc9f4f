#include "ams/config.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace ams {

namespace {

struct KeyDefault {
  const char* key;
  const char* value;
};

// Every accepted key and its default. Grid defaults are the desk-scale Allen-Cahn setup.
constexpr KeyDefault known_keys[] = {
    {"model.kind", "grid"},
    {"model.n", "2"},
    {"model.dx", "0.04"},
    {"model.gamma", "1"},
    {"model.kappa", ""},
    {"model.epsilon", "0.05"},
    {"model.dt", "0.02"},
    {"model.potential", "double_well"},
    {"model.x0", "-0.8"},
    {"noise.basis", "grid"},
    {"noise.truncation", "0"},
    {"noise.sharing", "shared"},
    {"noise.scheme", "strang"},
    {"ams.n_rep", "100"},
    {"ams.k_rep", "1"},
    {"ams.z_a", "-0.99"},
    {"ams.z_b", "0.99"},
    {"ams.max_iterations", "1000000"},
    {"ams.max_steps_per_run", "10000000"},
    {"ams.path_stride", "1"},
    {"run.seed", "0"},
    {"run.n_mc", "20"},
    {"run.mc_samples", "200000"},
    {"run.epsilons", ""},
    {"run.kappas", ""},
    {"run.spectrum_gammas", ""},
    {"run.spectrum_n", "4"},
    {"run.traj_format", "csv"},
    {"run.hist_bins", "0"},
    {"run.crossing_level", "0"},
    {"run.max_trajectories", "0"},
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

[[noreturn]] void fail(const std::string& origin, const std::string& key, const std::string& msg) {
  throw ConfigError(origin + ": " + key + ": " + msg);
}

bool parse_double(const std::string& s, double& out) {
  const char* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && p == end;
}

Potential potential_from_string(const std::string& s) {
  if (s == "double_well") return Potential::double_well();
  if (s == "harmonic") return Potential::harmonic();
  if (s == "free") return Potential::free();
  throw std::invalid_argument("unknown potential '" + s + "'");
}

}  // namespace

ConfigMap::ConfigMap() {
  for (const auto& kd : known_keys) {
    values_[kd.key] = kd.value;
    origins_[kd.key] = "default";
  }
}

void ConfigMap::set(const std::string& key, const std::string& value, const std::string& origin) {
  auto it = values_.find(key);
  if (it == values_.end()) fail(origin, key, "unknown key");
  it->second = value;
  origins_[key] = origin;
}

void ConfigMap::merge_text(const std::string& text, const std::string& source) {
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string where = source + ":" + std::to_string(lineno);
    const auto hash = line.find_first_of("#;");
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where + ": malformed section header");
      section = lower(trim(line.substr(1, line.size() - 2)));
      if (section != "model" && section != "noise" && section != "ams" && section != "run")
        throw ConfigError(where + ": unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + ": expected key = value");
    if (section.empty()) throw ConfigError(where + ": key outside of a section");
    set(section + "." + lower(trim(line.substr(0, eq))), trim(line.substr(eq + 1)), where);
  }
}

void ConfigMap::merge_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string() + ": cannot open configuration file");
  std::stringstream ss;
  ss << in.rdbuf();
  merge_text(ss.str(), path.string());
}

void ConfigMap::apply_override(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError("--set " + assignment + ": expected section.key=value");
  const std::string key = lower(trim(assignment.substr(0, eq)));
  if (key.find('.') == std::string::npos) fail("--set", key, "expected section.key");
  set(key, trim(assignment.substr(eq + 1)), "--set");
}

const std::string& ConfigMap::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw std::logic_error("unregistered config key " + key);
  return it->second;
}

const std::string& ConfigMap::origin(const std::string& key) const {
  return origins_.at(key);
}

std::string ConfigMap::canonical_text() const {
  std::string out;
  for (const auto& [k, v] : values_) out += k + "=" + v + "\n";
  return out;
}

double ConfigMap::get_double(const std::string& key) const {
  double v = 0;
  if (!parse_double(get(key), v)) fail(origin(key), key, "expected a number, got '" + get(key) + "'");
  return v;
}

std::uint64_t ConfigMap::get_u64(const std::string& key) const {
  const std::string& s = get(key);
  std::uint64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    fail(origin(key), key, "expected a non-negative integer, got '" + s + "'");
  return v;
}

std::vector<double> ConfigMap::get_doubles(const std::string& key) const {
  std::vector<double> out;
  std::stringstream ss(get(key));
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    double v = 0;
    if (!parse_double(item, v)) fail(origin(key), key, "expected a comma-separated list of numbers");
    out.push_back(v);
  }
  return out;
}

RunConfig resolve(const ConfigMap& map) {
  RunConfig rc;
  rc.source = map;
  AmsConfig& a = rc.ams;

  // Wraps enum/parameter checks so the message carries the key and where it was set.
  auto guarded = [&](const std::string& key, auto&& fn) {
    try {
      fn();
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      fail(map.origin(key), key, e.what());
    }
  };

  ModelParams& p = a.stepper.params;
  if (!(map.get_double("model.epsilon") >= 0))
    fail(map.origin("model.epsilon"), "model.epsilon", "must be non-negative");
  if (!(map.get_double("model.dt") > 0)) fail(map.origin("model.dt"), "model.dt", "must be positive");
  if (!(map.get_double("model.gamma") >= 0)) fail(map.origin("model.gamma"), "model.gamma", "must be non-negative");
  guarded("model.kind", [&] {
    const ModelKind kind = model_kind_from_string(map.get("model.kind"));
    const double gamma = map.get_double("model.gamma");
    const double eps = map.get_double("model.epsilon");
    const double dt = map.get_double("model.dt");
    if (kind == ModelKind::grid) {
      guarded("model.dx", [&] { p = ModelParams::grid_with_spacing(map.get_double("model.dx"), gamma, eps, dt); });
    } else {
      const auto n = map.get_u64("model.n");
      if (n == 0) fail(map.origin("model.n"), "model.n", "must be positive");
      p = ModelParams::chain(n, gamma, eps, dt);
      if (!map.get("model.kappa").empty())
        guarded("model.kappa", [&] { p.gamma = gamma_from_kappa(n, map.get_double("model.kappa")); });
    }
  });
  guarded("model.potential", [&] { p.potential = potential_from_string(map.get("model.potential")); });
  guarded("model.epsilon", [&] { p.validate(); });

  guarded("noise.basis", [&] { a.stepper.basis = noise_basis_from_string(map.get("noise.basis")); });
  guarded("noise.sharing", [&] { a.stepper.sharing = noise_sharing_from_string(map.get("noise.sharing")); });
  guarded("noise.scheme", [&] { a.stepper.scheme = splitting_scheme_from_string(map.get("noise.scheme")); });
  a.stepper.truncation = map.get_u64("noise.truncation");
  guarded("noise.truncation", [&] { a.stepper.validate(); });

  const auto x0 = map.get_doubles("model.x0");
  if (x0.size() == 1)
    a.x0 = State(p.n, x0[0]);
  else if (x0.size() == p.n)
    a.x0 = x0;
  else
    fail(map.origin("model.x0"), "model.x0", "expected 1 or " + std::to_string(p.n) + " values");

  a.n_rep = map.get_u64("ams.n_rep");
  a.k_rep = map.get_u64("ams.k_rep");
  a.z_a = map.get_double("ams.z_a");
  a.z_b = map.get_double("ams.z_b");
  a.max_iterations = map.get_u64("ams.max_iterations");
  a.max_steps_per_run = map.get_u64("ams.max_steps_per_run");
  const auto stride = map.get_u64("ams.path_stride");
  if (stride == 0 || stride > 0xFFFFFFFFu) fail(map.origin("ams.path_stride"), "ams.path_stride", "out of range");
  a.path_stride = static_cast<std::uint32_t>(stride);

  rc.seed = map.get_u64("run.seed");
  a.master_seed = rc.seed;
  guarded("ams.n_rep", [&] { a.validate(); });

  rc.n_mc = map.get_u64("run.n_mc");
  if (rc.n_mc == 0) fail(map.origin("run.n_mc"), "run.n_mc", "must be positive");
  rc.mc_samples = map.get_u64("run.mc_samples");
  rc.epsilons = map.get_doubles("run.epsilons");
  rc.kappas = map.get_doubles("run.kappas");
  rc.spectrum_gammas = map.get_doubles("run.spectrum_gammas");
  rc.spectrum_n = map.get_u64("run.spectrum_n");
  rc.traj_format = map.get("run.traj_format");
  if (rc.traj_format != "csv" && rc.traj_format != "bin")
    fail(map.origin("run.traj_format"), "run.traj_format", "expected csv or bin");
  rc.hist_bins = map.get_u64("run.hist_bins");
  rc.crossing_level = map.get_double("run.crossing_level");
  rc.max_trajectories = map.get_u64("run.max_trajectories");
  return rc;
}

RunConfig load_run_config(const std::filesystem::path& path, const std::vector<std::string>& overrides,
                          const std::uint64_t* seed) {
  ConfigMap map;
  if (!path.empty()) map.merge_file(path);
  for (const auto& o : overrides) map.apply_override(o);
  if (seed) map.set("run.seed", std::to_string(*seed), "--seed");
  return resolve(map);
}

std::string manifest_id(const std::string& experiment, const ConfigMap& map) {
  // FNV-1a, 64 bit.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto feed = [&](const std::string& s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
  };
  feed(experiment);
  feed("\n");
  feed(map.canonical_text());
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace ams
