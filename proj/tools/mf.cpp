// Batch front-end: load an experiment config, run it, persist results.
//
// Exit codes: 0 success, 1 runtime failure, 2 invalid config, 3 checks failed.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "mf/mf.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "experiment config (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--out-dir", args.out_dir, "override the config's output directory");
  cmd->add_option("--seed", args.seed, "override the config's RNG seed");
}

int run(mf::RunMode mode, const CommonArgs& args) {
  mf::ExperimentConfig cfg = mf::load_config(args.config_path);
  if (cfg.mode != mode)
    throw mf::io::bad_config("config mode does not match the subcommand");
  mf::RunArtifacts art = mf::run_experiment(cfg, args.out_dir, args.seed);
  std::string out = args.out_dir.empty() ? cfg.out_dir : args.out_dir;
  if (art.summary.value("pass", true))
    std::cout << "ok: results in " << out << "\n";
  else
    std::cout << "CHECKS FAILED: see " << out << "/summary.json\n";
  return art.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"measure-valued mass evolution on [0,1]: simulation and verification"};
  app.require_subcommand(1);

  CommonArgs args;
  auto* simulate = app.add_subcommand("simulate", "run one Euler evolution");
  auto* converge = app.add_subcommand("converge", "mesh-refinement study against a reference");
  auto* depend = app.add_subcommand("depend", "continuous dependence on the initial datum");
  auto* norms = app.add_subcommand("norms", "dual norms of a measure literal");
  auto* verify = app.add_subcommand("verify", "seeded randomized invariant suite");
  for (auto* cmd : {simulate, converge, depend, norms, verify}) add_common(cmd, args);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (simulate->parsed()) return run(mf::RunMode::simulate, args);
    if (converge->parsed()) return run(mf::RunMode::converge, args);
    if (depend->parsed()) return run(mf::RunMode::depend, args);
    if (norms->parsed()) return run(mf::RunMode::norms, args);
    return run(mf::RunMode::verify, args);
  } catch (const mf::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code() == mf::Errc::config_invalid ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
