#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "homoclinic/config.hpp"

namespace homoclinic {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitHypothesis = 2;
inline constexpr int kExitNoSolution = 3;

/// One row of the hypothesis table: margin > 0 means the check passed.
struct CheckRow {
  std::string name;
  bool passed;
  double margin;
  std::string detail;
};

/// Runs every hypothesis check on the configured potential.
std::vector<CheckRow> run_checks(const RunConfig& cfg);

/// Each command prints a summary to `out` and returns the process exit code;
/// errors are reported on `out` as well.
int cmd_check(const RunConfig& cfg, std::ostream& out);
/// solution.csv, action_history.csv, report.json
int cmd_solve(const RunConfig& cfg, const std::filesystem::path& out_dir, std::ostream& out);
/// manifest.json, entry_<id>.csv, distances.csv, report.json; uses
/// cfg.search.jobs workers
int cmd_search(const RunConfig& cfg, const std::filesystem::path& out_dir, std::ostream& out);
/// refine.json plus the trajectory at each level
int cmd_refine(const RunConfig& cfg, const std::filesystem::path& out_dir, std::ostream& out);
/// diagnose.json; matches bumps against cfg.diagnose.library
int cmd_diagnose(const RunConfig& cfg, const std::filesystem::path& trajectory,
                 const std::filesystem::path& out_dir, std::ostream& out);

/// Trajectory CSV paths listed in a search manifest, resolved against its
/// directory.
std::vector<std::string> library_from_manifest(const std::filesystem::path& manifest);

}  // namespace homoclinic
