#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "ams/rare_event.hpp"

namespace ams {

/// Bad configuration text or values. The message names the source line and key.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Flat key/value configuration with INI sections [model], [noise], [ams], [run].
/// Keys are stored as "section.key". Every known key is present after construction,
/// holding its default until the text or an override replaces it.
class ConfigMap {
 public:
  ConfigMap();

  /// Parses INI text on top of the current values. `source` prefixes diagnostics.
  void merge_text(const std::string& text, const std::string& source);
  void merge_file(const std::filesystem::path& path);
  /// Applies "section.key=value".
  void apply_override(const std::string& assignment);
  void set(const std::string& key, const std::string& value, const std::string& origin);

  const std::string& get(const std::string& key) const;
  /// "file:line" or "--set" or "default", for diagnostics.
  const std::string& origin(const std::string& key) const;
  const std::map<std::string, std::string>& values() const { return values_; }

  /// Canonical "key=value" lines, sorted by key.
  std::string canonical_text() const;

  double get_double(const std::string& key) const;
  std::uint64_t get_u64(const std::string& key) const;
  std::vector<double> get_doubles(const std::string& key) const;

 private:
  std::map<std::string, std::string> values_;
  std::map<std::string, std::string> origins_;
};

/// A fully resolved run: the AMS/model configuration plus experiment-level knobs.
struct RunConfig {
  ConfigMap source;
  AmsConfig ams;
  std::uint64_t seed = 0;
  std::size_t n_mc = 20;
  std::uint64_t mc_samples = 200000;
  std::vector<double> epsilons;
  std::vector<double> kappas;
  std::vector<double> spectrum_gammas;
  std::size_t spectrum_n = 4;
  std::string traj_format = "csv";
  std::size_t hist_bins = 0;  // 0: Freedman-Diaconis
  double crossing_level = 0.0;
  std::size_t max_trajectories = 0;  // 0: export all
};

/// Builds the typed configuration; throws ConfigError with the offending key and origin.
RunConfig resolve(const ConfigMap& map);

/// Reads `path` (if not empty), applies overrides in order, then the seed if given.
RunConfig load_run_config(const std::filesystem::path& path, const std::vector<std::string>& overrides,
                          const std::uint64_t* seed = nullptr);

/// 16 hex digits identifying (experiment, canonical configuration).
std::string manifest_id(const std::string& experiment, const ConfigMap& map);

}  // namespace ams
