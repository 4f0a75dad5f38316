#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "homoclinic/action.hpp"
#include "homoclinic/function_space.hpp"
#include "homoclinic/potential.hpp"

namespace homoclinic {

struct SolverConfig {
  double grad_tol = 1e-6;       ///< threshold on |g|_2 / sqrt(h)
  int max_iters = 100000;       ///< per descent stage
  double armijo_c1 = 1e-4;
  double backtrack = 0.5;
  int max_backtracks = 60;
  double eps_k = 0.1;           ///< constraint class needs k >= 1 + eps_k
  int renormalize_every = 25;
  double bump_width = 2.0;      ///< sech rate beta of the initial guess
  double k0 = 1.5;
  /// Side offset of the initial loop, in units of |q|; the sign of
  /// `orientation` picks the side it passes q on first.
  double loop_offset = 1.0;
  int orientation = 1;
  /// Crossing time of the seed loop, as a fraction of the period after the
  /// node where a(t) peaks.
  double phase = 0.0;
  bool precondition = true;     ///< H^1 Riesz-map (tridiagonal) preconditioning
  std::uint64_t seed = 1;
  int max_restarts = 3;
  double zero_threshold = 1e-4;  ///< sup-norm below which descent has collapsed
  int constraint_active_window = 50;
};

/// Node `node` is pinned to k q with k >= k_min.
struct ConstraintE {
  int node;
  double k_min;
  double k;
};

struct GuessShape {
  double loop_offset = 1.0;
  int orientation = 1;
  double eps_k = 0.1;
};

/// k0 q sech(beta (t - c)) plus a transverse sech*tanh offset that takes the
/// path around q, so u(c) = k0 q exactly and the guess lies in E_h.
/// Throws PreconditionViolation (k0 < 1 + eps_k, center off-grid or support
/// leaving (-L, L)) and InfeasibleGuess (clearance below delta_seg).
GridFunction initial_guess_bump(const Grid& grid, const Potential& pot, double k0,
                                double center, double width, const GuessShape& shape = {});

struct RenormalizationEvent {
  int iteration;
  int shift;
  double action_before;
  double action_after;
  bool applied;  ///< false when the shift would have raised the action
};

struct EStageResult {
  GridFunction u;
  double k;
  double value;
  double grad_norm;
  int iterations;
  bool converged;
  bool constraint_active;  ///< k sat on its clamp for the configured window
  std::vector<double> values;
};

/// Projected (optionally preconditioned) Armijo descent over the free nodes
/// and the scalar k, with node `constraint.node` held at k q.
EStageResult minimize_over_E(const GridFunction& u0, const ConstraintE& constraint,
                             const Potential& pot, const SolverConfig& cfg);

struct Crossing {
  int node;
  double k;
};

struct HomoclinicCandidate {
  GridFunction trajectory;
  double action;
  double grad_norm;
  ResidualReport residual;
  double clearance;
  std::optional<Crossing> crossing;
  int iterations;
  std::vector<double> action_history;
  std::vector<RenormalizationEvent> renormalizations;
  // Constrained stage that produced the seed, when there was one.
  std::optional<double> e_value;
  std::optional<double> e_k;
  bool constraint_active = false;
  /// False when moving the peak into [0, T) would push mass off the grid;
  /// the trajectory is then left where the descent put it.
  bool normalized = true;
};

/// Unconstrained Armijo descent with periodic translation renormalization.
/// Throws ConvergedToZero, MaxItersExceeded.
HomoclinicCandidate descend_to_critical(const GridFunction& u0, const Potential& pot,
                                        const SolverConfig& cfg);

/// First node in [0, T) where a(t) is largest.
int coefficient_peak_node(const Grid& grid, const Potential& pot);

/// Guess -> minimize over E -> release -> descend -> normalize, with up to
/// cfg.max_restarts reseeded attempts. Throws HypothesisViolation before any
/// optimization when the potential fails check_A or check_H2, and
/// NoSolutionFound when every attempt fails.
HomoclinicCandidate solve_homoclinic(const Potential& pot, const Grid& grid,
                                     const SolverConfig& cfg);

/// Where the trajectory meets the ray {k q : k > 1}, if it does.
std::optional<Crossing> find_crossing(const GridFunction& u, const Potential& pot);

}  // namespace homoclinic
