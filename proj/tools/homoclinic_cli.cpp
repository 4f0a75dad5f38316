// Command-line front end: check, solve, search, refine, diagnose.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "homoclinic/commands.hpp"
#include "homoclinic/errors.hpp"

namespace hc = homoclinic;

int main(int argc, char** argv) {
  CLI::App app{"Homoclinic orbits of singular periodic Hamiltonian systems"};
  app.require_subcommand(1);
  app.footer("Configuration is a JSON document; omitted fields take these defaults:\n" +
             hc::to_json(hc::RunConfig{}).dump(2) +
             "\n\nThe output directory is --out, else the config's \"output\", else "
             "$HOMOCLINIC_OUT, else ./homoclinic_out.\n"
             "Exit codes: 0 success, 1 config or IO error, 2 hypothesis violated, "
             "3 no (or too few) solutions.");

  std::string config_path;
  std::string out_dir;
  std::optional<int> jobs;
  std::optional<std::uint64_t> seed;
  app.add_option("--config", config_path, "JSON run configuration");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--jobs", jobs, "worker threads for search (default 1)")
      ->check(CLI::PositiveNumber);
  app.add_option("--seed", seed, "overrides the config seed");

  auto* check = app.add_subcommand("check", "run the hypothesis checks");
  auto* solve = app.add_subcommand("solve", "compute one homoclinic solution");
  auto* search = app.add_subcommand("search", "collect geometrically distinct solutions");
  auto* refine = app.add_subcommand("refine", "solve at m and 2m and compare");
  auto* diagnose = app.add_subcommand("diagnose", "split and check an existing trajectory");
  std::string trajectory;
  std::string manifest;
  diagnose->add_option("trajectory", trajectory, "trajectory CSV on the config grid")
      ->required();
  diagnose->add_option("--library", manifest, "search manifest whose entries to match against");
  for (auto* sub : {check, solve, search, refine, diagnose}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : hc::kExitConfig;
  }

  hc::RunConfig cfg;
  try {
    if (!config_path.empty()) cfg = hc::load_config(config_path);
    if (seed) cfg.seed = *seed;
    if (jobs) cfg.search.jobs = *jobs;
    if (!manifest.empty()) {
      for (auto& p : hc::library_from_manifest(manifest)) cfg.diagnose.library.push_back(p);
    }
  } catch (const hc::Error& e) {
    std::cerr << e.what() << '\n';
    return hc::kExitConfig;
  }

  std::string out = out_dir;
  if (out.empty()) out = cfg.output;
  if (out.empty()) {
    const char* env = std::getenv("HOMOCLINIC_OUT");
    out = env && *env ? env : "homoclinic_out";
  }

  if (*check) return hc::cmd_check(cfg, std::cout);
  if (*solve) return hc::cmd_solve(cfg, out, std::cout);
  if (*search) return hc::cmd_search(cfg, out, std::cout);
  if (*refine) return hc::cmd_refine(cfg, out, std::cout);
  return hc::cmd_diagnose(cfg, trajectory, out, std::cout);
}
