#pragma once

#include <cstdint>
#include <vector>

#include "homoclinic/function_space.hpp"
#include "homoclinic/potential.hpp"

namespace homoclinic {

/// Discrete action I_h(u) = sum_i |u_{i+1}-u_i|^2 / (2h) - trapezoid(a(t) W(u)).
struct ActionEval {
  double value = 0.0;
  /// Euclidean gradient with respect to node values, row-major n x d;
  /// boundary rows are zero.
  std::vector<double> gradient;
  double min_seg_dist = 0.0;
  bool feasible = false;
};

struct ResidualReport {
  /// max over interior nodes of |(u_{i+1} - 2u_i + u_{i-1})/h^2 + a(t_i) grad W(u_i)|
  double sup_residual = 0.0;
  /// Same residual with the fourth-order five-point second difference. For a
  /// converged discrete solution this measures the O(h^2) consistency error of
  /// the three-point scheme, which is what grid refinement studies compare.
  double consistency_residual = 0.0;
  double tail_sup_u = 0.0;   ///< max |u(t_i)| over |t_i| >= L - T
  double tail_sup_du = 0.0;  ///< max forward-difference |u'| over the same tails
};

/// Feasibility clearance delta_seg = 1e-3 |q|.
double default_clearance(const Potential& pot);

/// Throws SingularityProximity when a node is within eps_q of q; a segment
/// passing closer than `clearance` only marks the result infeasible.
/// `clearance` <= 0 selects default_clearance(pot).
ActionEval eval_action(const GridFunction& u, const Potential& pot, double clearance = 0.0);

/// Value only; same error contract as eval_action.
double action_value(const GridFunction& u, const Potential& pot);

/// I_h(v) - I_h(u) accumulated cell by cell, which keeps the difference
/// accurate when it is many orders of magnitude below I_h itself.
double action_difference(const GridFunction& u, const GridFunction& v, const Potential& pot);

/// Dual-norm proxy |g|_2 / sqrt(h) used by every stopping rule.
double gradient_norm(const std::vector<double>& gradient, double h);

/// Largest relative deviation between the analytic gradient and central
/// differences of the action along `directions` random coordinate axes.
/// Errors are taken relative to max(|g_i|, 1e-2 |g|_inf); when g == 0 the
/// absolute finite difference is returned.
double eval_gradient_fd_check(const GridFunction& u, const Potential& pot, double step,
                              int directions = 20, std::uint64_t seed = 7);

ResidualReport ode_residual(const GridFunction& u, const Potential& pot);

/// min over cells of the distance from q to the segment [u_i, u_{i+1}].
double singularity_clearance(const GridFunction& u, const Potential& pot);

struct PositivityProbe {
  double min_action;
  double max_action;
  int samples;
};

/// Samples random smooth feasible trajectories with |u|_{H^1} = radius and
/// records the smallest action seen (a sampled stand-in for inf_{|u|=r} I).
PositivityProbe probe_positivity_gap(const Potential& pot, const Grid& grid, double radius,
                                     int samples = 1000, std::uint64_t seed = 11);

/// A random smooth interior-supported trajectory (sum of Gaussian bumps) with
/// the given sup norm, centred in the middle half of the grid.
GridFunction random_smooth_trajectory(const Grid& grid, int dimension, double amplitude,
                                      std::uint64_t seed);

}  // namespace homoclinic
