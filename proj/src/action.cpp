#include "homoclinic/action.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "homoclinic/errors.hpp"

namespace homoclinic {

namespace {

double segment_distance(std::span<const double> a, std::span<const double> b,
                        std::span<const double> q) {
  double ab2 = 0.0;
  double proj = 0.0;
  for (std::size_t c = 0; c < a.size(); ++c) {
    const double ab = b[c] - a[c];
    ab2 += ab * ab;
    proj += (q[c] - a[c]) * ab;
  }
  const double s = ab2 > 0.0 ? std::clamp(proj / ab2, 0.0, 1.0) : 0.0;
  double d2 = 0.0;
  for (std::size_t c = 0; c < a.size(); ++c) {
    const double x = a[c] + s * (b[c] - a[c]) - q[c];
    d2 += x * x;
  }
  return std::sqrt(d2);
}

void check_dimension(const GridFunction& u, const Potential& pot) {
  if (u.dimension() != pot.dimension()) {
    throw PreconditionViolation("trajectory and potential dimensions differ");
  }
}

}  // namespace

double default_clearance(const Potential& pot) { return 1e-3 * pot.q_norm(); }

double singularity_clearance(const GridFunction& u, const Potential& pot) {
  check_dimension(u, pot);
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i + 1 < u.size(); ++i) {
    best = std::min(best, segment_distance(u.point(i), u.point(i + 1), pot.q()));
  }
  return best;
}

double action_value(const GridFunction& u, const Potential& pot) {
  check_dimension(u, pot);
  const Grid& g = u.grid();
  const double h = g.h();
  const int d = u.dimension();
  double kinetic = 0.0;
  double potential = 0.0;
  for (int i = 0; i + 1 < u.size(); ++i) {
    for (int c = 0; c < d; ++c) {
      const double du = u(i + 1, c) - u(i, c);
      kinetic += du * du;
    }
  }
  // Boundary nodes are zero and W(0) = 0, so the trapezoid reduces to interior nodes.
  for (int i = 1; i + 1 < u.size(); ++i) {
    potential += pot.a(g.time(i)) * pot.W(u.point(i));
  }
  return 0.5 * kinetic / h - h * potential;
}

double action_difference(const GridFunction& u, const GridFunction& v, const Potential& pot) {
  check_dimension(u, pot);
  if (!(u.grid() == v.grid()) || u.dimension() != v.dimension()) {
    throw PreconditionViolation("action difference needs functions on one grid");
  }
  const Grid& g = u.grid();
  const double h = g.h();
  const int d = u.dimension();
  double kinetic = 0.0;
  double potential = 0.0;
  for (int i = 0; i + 1 < u.size(); ++i) {
    for (int c = 0; c < d; ++c) {
      const double du = u(i + 1, c) - u(i, c);
      const double dv = v(i + 1, c) - v(i, c);
      kinetic += (dv - du) * (dv + du);
    }
  }
  for (int i = 1; i + 1 < u.size(); ++i) {
    potential += pot.a(g.time(i)) * (pot.W(v.point(i)) - pot.W(u.point(i)));
  }
  return 0.5 * kinetic / h - h * potential;
}

ActionEval eval_action(const GridFunction& u, const Potential& pot, double clearance) {
  check_dimension(u, pot);
  const Grid& g = u.grid();
  const double h = g.h();
  const int n = u.size();
  const int d = u.dimension();
  if (clearance <= 0.0) clearance = default_clearance(pot);

  ActionEval out;
  out.gradient.assign(static_cast<std::size_t>(n) * d, 0.0);
  std::vector<double> gw(static_cast<std::size_t>(d));
  double kinetic = 0.0;
  double potential = 0.0;
  for (int i = 0; i + 1 < n; ++i) {
    for (int c = 0; c < d; ++c) {
      const double du = u(i + 1, c) - u(i, c);
      kinetic += du * du;
    }
  }
  for (int i = 1; i + 1 < n; ++i) {
    const double a = pot.a(g.time(i));
    const auto ui = u.point(i);
    potential += a * pot.W(ui);
    pot.gradW(ui, gw);
    double* gi = out.gradient.data() + static_cast<std::size_t>(i) * d;
    for (int c = 0; c < d; ++c) {
      gi[c] = -(u(i + 1, c) - 2.0 * u(i, c) + u(i - 1, c)) / h - h * a * gw[c];
    }
  }
  out.value = 0.5 * kinetic / h - h * potential;
  out.min_seg_dist = singularity_clearance(u, pot);
  out.feasible = out.min_seg_dist >= clearance;
  return out;
}

double gradient_norm(const std::vector<double>& gradient, double h) {
  double s = 0.0;
  for (double x : gradient) s += x * x;
  return std::sqrt(s / h);
}

double eval_gradient_fd_check(const GridFunction& u, const Potential& pot, double step,
                              int directions, std::uint64_t seed) {
  const ActionEval ev = eval_action(u, pot);
  double ginf = 0.0;
  for (double x : ev.gradient) ginf = std::max(ginf, std::abs(x));

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> node(1, u.size() - 2);
  std::uniform_int_distribution<int> comp(0, u.dimension() - 1);
  GridFunction probe = u;
  double worst = 0.0;
  for (int k = 0; k < directions; ++k) {
    const int i = node(rng);
    const int c = comp(rng);
    const double x0 = u(i, c);
    const double s = step * (1.0 + std::abs(x0));
    probe(i, c) = x0 + s;
    const double fp = action_value(probe, pot);
    probe(i, c) = x0 - s;
    const double fm = action_value(probe, pot);
    probe(i, c) = x0;
    const double fd = (fp - fm) / (2.0 * s);
    const double gi = ev.gradient[static_cast<std::size_t>(i) * u.dimension() + c];
    const double err = ginf == 0.0
                           ? std::abs(fd)
                           : std::abs(fd - gi) / std::max(std::abs(gi), 1e-2 * ginf);
    worst = std::max(worst, err);
  }
  return worst;
}

ResidualReport ode_residual(const GridFunction& u, const Potential& pot) {
  check_dimension(u, pot);
  const Grid& g = u.grid();
  const double h = g.h();
  const int n = u.size();
  const int d = u.dimension();
  std::vector<double> gw(static_cast<std::size_t>(d));

  ResidualReport rep;
  for (int i = 1; i + 1 < n; ++i) {
    const double a = pot.a(g.time(i));
    pot.gradW(u.point(i), gw);
    double r2 = 0.0;
    double c2 = 0.0;
    const bool wide = i >= 2 && i + 2 < n;
    for (int c = 0; c < d; ++c) {
      const double force = a * gw[c];
      const double lap = (u(i + 1, c) - 2.0 * u(i, c) + u(i - 1, c)) / (h * h);
      r2 += (lap + force) * (lap + force);
      if (wide) {
        const double lap4 = (-u(i + 2, c) + 16.0 * u(i + 1, c) - 30.0 * u(i, c) +
                             16.0 * u(i - 1, c) - u(i - 2, c)) /
                            (12.0 * h * h);
        c2 += (lap4 + force) * (lap4 + force);
      }
    }
    rep.sup_residual = std::max(rep.sup_residual, std::sqrt(r2));
    rep.consistency_residual = std::max(rep.consistency_residual, std::sqrt(c2));
  }

  const double tail = g.half_length() - g.period();
  const double eps = 1e-9 * g.h();
  for (int i = 0; i < n; ++i) {
    if (std::abs(g.time(i)) >= tail - eps) rep.tail_sup_u = std::max(rep.tail_sup_u, u.norm_at(i));
  }
  for (int i = 0; i + 1 < n; ++i) {
    const bool right = g.time(i) >= tail - eps;
    const bool left = g.time(i + 1) <= -tail + eps;
    if (!right && !left) continue;
    double s = 0.0;
    for (int c = 0; c < d; ++c) {
      const double du = u(i + 1, c) - u(i, c);
      s += du * du;
    }
    rep.tail_sup_du = std::max(rep.tail_sup_du, std::sqrt(s) / h);
  }
  return rep;
}

GridFunction random_smooth_trajectory(const Grid& grid, int dimension, double amplitude,
                                      std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double quarter = 0.5 * grid.half_length();
  const int bumps = 1 + static_cast<int>(unif(rng) * 3.0);

  GridFunction u(grid, dimension);
  for (int b = 0; b < bumps; ++b) {
    const double width = grid.period() * (0.5 + 1.5 * unif(rng));
    const double w = std::min(width, quarter);
    const double center = -quarter + w + (2.0 * (quarter - w)) * unif(rng);
    std::vector<double> dir(static_cast<std::size_t>(dimension));
    for (double& x : dir) x = gauss(rng);
    for (int i = 1; i + 1 < u.size(); ++i) {
      const double x = (grid.time(i) - center) / w;
      if (std::abs(x) >= 1.0) continue;
      // C^1 cos^2 bump with compact support inside the middle half.
      const double c = std::cos(0.5 * std::numbers::pi * x);
      for (int k = 0; k < dimension; ++k) u(i, k) += dir[k] * c * c;
    }
  }
  const double s = sup_norm(u);
  if (s > 0.0) {
    for (double& x : u.values()) x *= amplitude / s;
  }
  return u;
}

PositivityProbe probe_positivity_gap(const Potential& pot, const Grid& grid, double radius,
                                     int samples, std::uint64_t seed) {
  PositivityProbe rep{std::numeric_limits<double>::infinity(), 0.0, 0};
  const double clearance = default_clearance(pot);
  std::mt19937_64 seeds(seed);
  int attempts = 0;
  while (rep.samples < samples) {
    if (++attempts > 100 * samples) {
      throw PreconditionViolation("could not sample feasible trajectories at this radius");
    }
    GridFunction u = random_smooth_trajectory(grid, pot.dimension(), 1.0, seeds());
    const double n = h1_norm(u);
    if (n == 0.0) continue;
    for (double& x : u.values()) x *= radius / n;
    if (singularity_clearance(u, pot) < clearance) continue;
    const double value = action_value(u, pot);
    rep.min_action = std::min(rep.min_action, value);
    rep.max_action = std::max(rep.max_action, value);
    ++rep.samples;
  }
  return rep;
}

}  // namespace homoclinic
