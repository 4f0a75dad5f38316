#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "homoclinic/function_space.hpp"
#include "homoclinic/potential.hpp"
#include "homoclinic/solver.hpp"

namespace homoclinic {

/// min over |k| <= M of |u - tau_k v|_{H^1}, symmetrized over both orders.
double geometric_distance(const GridFunction& u, const GridFunction& v);

/// Shift minimizing |u - tau_k v|_{H^1} and the distance it attains.
struct ShiftMatch {
  int shift;
  double distance;
};
ShiftMatch best_shift(const GridFunction& u, const GridFunction& v);

bool is_distinct(const GridFunction& u, const GridFunction& v, double epsilon_distinct);

struct LibraryEntry {
  int id;
  HomoclinicCandidate candidate;
  std::uint64_t seed;
  std::string schedule_item;
};

/// Normalized, pairwise geometrically distinct solutions.
class SolutionLibrary {
 public:
  explicit SolutionLibrary(double epsilon_distinct = 0.1) : epsilon_(epsilon_distinct) {}

  double epsilon_distinct() const { return epsilon_; }
  const std::vector<LibraryEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }

  struct Insertion {
    bool inserted;
    int id;                 ///< new id, or the entry it duplicates
    double nearest;         ///< distance to the closest existing entry
  };
  /// Moves the trajectory to its normalized translate, then inserts it iff it
  /// is at distance >= epsilon from every stored entry. Throws
  /// PreconditionViolation when the translate would lose mass off the grid.
  Insertion insert(HomoclinicCandidate candidate, std::uint64_t seed, std::string item);

  /// Symmetric matrix of geometric distances (zero diagonal).
  std::vector<std::vector<double>> distance_matrix() const;
  /// +inf for fewer than two entries.
  double min_pairwise_distance() const;

 private:
  double epsilon_;
  std::vector<LibraryEntry> entries_;
  std::vector<std::vector<double>> distances_;
};

/// Nodes where |v| > threshold: [first, last], or nullopt for v below it.
std::optional<std::pair<int, int>> support_range(const GridFunction& v, double threshold);

/// Pointwise sum of tau_{k_i} v_i. Shifted supports (|v| > 1e-6) must stay on
/// the grid and be pairwise separated by at least two periods.
/// Throws OverlappingBumps, ShiftOutOfRange, InfeasibleGuess.
GridFunction multibump_guess(const std::vector<GridFunction>& entries,
                             const std::vector<int>& shifts, const Potential& pot);

inline constexpr double kMultibumpSupportThreshold = 1e-6;

struct Bump {
  int first;  ///< window [first, last] in node indices
  int last;
  GridFunction extracted;
  std::optional<int> library_index;
  int shift = 0;
  double match_distance = 0.0;
};

struct BumpDecomposition {
  std::vector<Bump> bumps;
  double residual_norm = 0.0;  ///< |u - sum tau_k v|_{H^1} over matched bumps
};

/// Windows where |u| >= delta_bump, widened until |u| < delta_gap on both
/// sides, each matched against the library by shift-minimized distance.
BumpDecomposition ps_split(const GridFunction& u, const std::vector<GridFunction>& library,
                           double delta_bump = 0.05, double delta_gap = 0.01);

/// |v - (v restricted to its ps_split windows)|_{H^1}: the mass ps_split
/// cannot see.
double tail_mass(const GridFunction& v, double delta_bump = 0.05, double delta_gap = 0.01);

struct SearchConfig {
  int targets = 3;
  double epsilon_distinct = 0.1;
  std::vector<double> k0s{1.2, 1.5, 2.0};
  int phases = 4;                        ///< bump centers across one period
  std::vector<double> width_factors{1.0, 0.5};
  bool multibump = true;
  int jobs = 1;
};

struct ScheduleRecord {
  std::string item;
  std::uint64_t seed;
  std::string outcome;  ///< inserted / duplicate / failed / rejected
  std::string detail;
  std::optional<double> action;
};

struct SearchResult {
  SolutionLibrary library;
  std::vector<ScheduleRecord> log;
};

/// Single-bump seeds (orientation x k0 x width at the phase where a(t) peaks),
/// then multibump guesses from the entries found, then the remaining phases
/// and another multibump round. Stops once `targets` entries are stored.
SearchResult search_distinct(const Potential& pot, const Grid& grid, const SolverConfig& cfg,
                             const SearchConfig& search);

}  // namespace homoclinic
