#pragma once

#include <filesystem>
#include <span>
#include <vector>

namespace homoclinic {

/// Uniform, period-aligned grid on [-L, L] with L = half_periods * period.
///
/// Node i sits at t_i = -L + i h with h = period / nodes_per_period, so t = 0 is
/// node half_periods * nodes_per_period and a shift by nodes_per_period nodes is
/// exactly one period.
class Grid {
 public:
  Grid(double period, int nodes_per_period, int half_periods);

  double period() const { return period_; }
  int nodes_per_period() const { return m_; }
  int half_periods() const { return M_; }
  double h() const { return period_ / m_; }
  double half_length() const { return M_ * period_; }
  int size() const { return 2 * M_ * m_ + 1; }
  int zero_index() const { return M_ * m_; }
  double time(int i) const { return -half_length() + i * h(); }
  /// Nearest node to time t (clamped to the grid).
  int nearest_index(double t) const;

  bool operator==(const Grid& other) const = default;

 private:
  double period_;
  int m_;
  int M_;
};

/// Trajectory sampled on a Grid: n points of R^d, zero at both ends.
class GridFunction {
 public:
  GridFunction(Grid grid, int dimension);  ///< u == 0
  /// Throws PreconditionViolation unless the boundary nodes vanish and all
  /// values are finite.
  GridFunction(Grid grid, int dimension, std::vector<double> values);

  const Grid& grid() const { return grid_; }
  int dimension() const { return dim_; }
  int size() const { return grid_.size(); }

  std::span<const double> point(int i) const {
    return {values_.data() + static_cast<std::size_t>(i) * dim_, static_cast<std::size_t>(dim_)};
  }
  std::span<double> point(int i) {
    return {values_.data() + static_cast<std::size_t>(i) * dim_, static_cast<std::size_t>(dim_)};
  }
  double& operator()(int i, int c) { return values_[static_cast<std::size_t>(i) * dim_ + c]; }
  double operator()(int i, int c) const {
    return values_[static_cast<std::size_t>(i) * dim_ + c];
  }

  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }

  double norm_at(int i) const;

  GridFunction& operator+=(const GridFunction& other);
  GridFunction& operator-=(const GridFunction& other);
  friend GridFunction operator+(GridFunction a, const GridFunction& b) { return a += b; }
  friend GridFunction operator-(GridFunction a, const GridFunction& b) { return a -= b; }

 private:
  Grid grid_;
  int dim_;
  std::vector<double> values_;
};

/// Trapezoid L2 norm.
double l2_norm(const GridFunction& u);
/// L2 norm of the forward-difference derivative (exact for the piecewise
/// linear interpolant).
double kinetic_seminorm(const GridFunction& u);
double h1_norm(const GridFunction& u);
double sup_norm(const GridFunction& u);

/// tau_k u = u(. - kT): node values move k*m places, vacated nodes are zero
/// and the boundary nodes are pinned back to zero.
GridFunction shift_periods(const GridFunction& u, int k);

struct Renormalized {
  GridFunction function;
  int shift;  ///< l such that function == shift_periods(u, -l)
};

/// Moves the first node attaining max |u| into [0, T) by an integer number
/// of periods. Throws ZeroFunction for u == 0.
Renormalized renormalize_translation(const GridFunction& u);

struct SobolevReport {
  double lhs;  ///< |u(s)|
  double rhs;  ///< windowed L2 norm of u plus windowed L2 norm of u'
  bool passed;
};

/// Pointwise bound |u(s)| <= |u|_{L2(A)} + |u'|_{L2(A)} on the unit window A(s)
/// ([s, s+1] for s >= 0, [s-1, s] otherwise), snapped to whole cells.
/// `s` is snapped to the nearest node. Throws WindowOutOfDomain.
SobolevReport sobolev_bound_check(const GridFunction& u, double s);

/// CSV with header `t,u1,...,ud` and 17 significant digits.
void write_trajectory_csv(const GridFunction& u, const std::filesystem::path& path);
/// Reads a trajectory and checks that its times match `grid` (ConfigError
/// otherwise).
GridFunction read_trajectory_csv(const std::filesystem::path& path, const Grid& grid);

}  // namespace homoclinic
