// amsrun: command-line driver for the rare-event experiments.
#include <CLI11.hpp>
#include <cstdio>
#include <iostream>

#include "ams/config.hpp"
#include "ams/experiments.hpp"

namespace {

struct CommonArgs {
  std::string config;
  std::vector<std::string> overrides;
  std::uint64_t seed = 0;
  std::string out = "out";
};

void add_common(CLI::App* sub, CommonArgs& args) {
  sub->add_option("-c,--config", args.config, "INI configuration file")->check(CLI::ExistingFile);
  sub->add_option("--set", args.overrides, "Override, section.key=value (repeatable)");
  sub->add_option("--seed", args.seed, "Master seed (overrides run.seed)");
  sub->add_option("-o,--out", args.out, "Output directory")->capture_default_str();
}

int report(const ams::CommandResult& r, const std::string& out) {
  if (!r.message.empty()) std::cerr << r.message << "\n";
  if (r.exit_code == ams::exit_code::ok) {
    for (const auto& f : r.files) std::cout << out << "/" << f << "\n";
  }
  return r.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive multilevel splitting experiments"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(AMS_VERSION));

  const std::vector<std::pair<std::string, std::string>> commands{
      {"estimate", "N_MC independent AMS estimates: mean and standard deviation"},
      {"direct-mc", "Direct Monte Carlo estimate of the transition probability"},
      {"sweep-epsilon", "AMS estimates over run.epsilons and a fit of log p against 1/epsilon"},
      {"trajectories", "One AMS run: reactive trajectories and the crossing histogram"},
      {"bifurcation", "Critical points and origin spectra over run.kappas"},
  };
  CommonArgs args;
  std::vector<CLI::App*> subs;
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    add_common(sub, args);
    subs.push_back(sub);
  }
  std::string manifest, replay_out = "replay";
  auto* replay = app.add_subcommand("replay", "Re-run the experiment recorded in a manifest.json");
  replay->add_option("manifest", manifest, "Manifest path")->required()->check(CLI::ExistingFile);
  replay->add_option("-o,--out", replay_out, "Output directory")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : ams::exit_code::config_error;
  }

  if (replay->parsed()) return report(ams::replay_manifest(manifest, replay_out), replay_out);

  for (std::size_t i = 0; i < subs.size(); ++i) {
    if (!subs[i]->parsed()) continue;
    ams::RunConfig cfg;
    try {
      const bool seeded = subs[i]->count("--seed") > 0;
      cfg = ams::load_run_config(args.config, args.overrides, seeded ? &args.seed : nullptr);
    } catch (const ams::ConfigError& e) {
      std::cerr << "config error: " << e.what() << "\n";
      return ams::exit_code::config_error;
    }
    return report(ams::run_command(commands[i].first, cfg, args.out), args.out);
  }
  return ams::exit_code::config_error;
}
