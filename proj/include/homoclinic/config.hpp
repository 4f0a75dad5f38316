#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "homoclinic/function_space.hpp"
#include "homoclinic/multiplicity.hpp"
#include "homoclinic/potential.hpp"
#include "homoclinic/solver.hpp"

#include <json.hpp>

namespace homoclinic {

struct PotentialBlock {
  int dimension = 2;
  std::vector<double> q{2.0, 0.0};
  double alpha = 2.0;
  double a_base = 4.0;
  double a_amp = 2.5;
};

struct GridBlock {
  double T = 1.0;  ///< also the period of a(t)
  int m = 40;
  int M = 8;
};

struct RefineBlock {
  int fine_m = 0;  ///< 0 selects 2 m
};

struct DiagnoseBlock {
  std::vector<std::string> library;  ///< trajectory CSVs to match bumps against
  int windows = 20;                  ///< random Sobolev window centers
};

struct RunConfig {
  PotentialBlock potential;
  GridBlock grid;
  SolverConfig solver;
  SearchConfig search;
  RefineBlock refine;
  DiagnoseBlock diagnose;
  std::string output;  ///< empty: --out, then HOMOCLINIC_OUT, then "homoclinic_out"
  std::uint64_t seed = 1;

  Potential make_potential() const;
  Grid make_grid() const;
  /// Solver settings with the run seed applied.
  SolverConfig solver_config() const;
};

/// Throws ConfigError naming the offending line or field.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);

/// Fully resolved configuration; parse_config(to_json(c).dump()) == c.
nlohmann::ordered_json to_json(const RunConfig& cfg);

}  // namespace homoclinic
