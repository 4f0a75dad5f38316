#include "homoclinic/solver.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "homoclinic/errors.hpp"

namespace homoclinic {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// A = K + M restricted to interior nodes: K the stiffness matrix of the
// forward-difference kinetic term, M = h I the trapezoid mass. A^{-1} g is the
// H^1 representative of the Euclidean gradient g.
class RieszMap {
 public:
  explicit RieszMap(const Grid& grid) : n_(grid.size()), h_(grid.h()) {
    const int m = n_ - 2;
    const double diag = 2.0 / h_ + h_;
    const double off = -1.0 / h_;
    upper_.resize(static_cast<std::size_t>(m));
    inv_pivot_.resize(static_cast<std::size_t>(m));
    double prev_upper = 0.0;
    for (int i = 0; i < m; ++i) {
      const double pivot = diag - (i > 0 ? off * prev_upper : 0.0);
      inv_pivot_[i] = 1.0 / pivot;
      upper_[i] = off * inv_pivot_[i];
      prev_upper = upper_[i];
    }
    off_ = off;
  }

  // In-place solve on an n x d row-major array; boundary rows are left zero.
  void solve(std::vector<double>& v, int d) const {
    const int m = n_ - 2;
    for (int c = 0; c < d; ++c) {
      auto at = [&](int i) -> double& { return v[static_cast<std::size_t>(i + 1) * d + c]; };
      at(0) *= inv_pivot_[0];
      for (int i = 1; i < m; ++i) at(i) = (at(i) - off_ * at(i - 1)) * inv_pivot_[i];
      for (int i = m - 2; i >= 0; --i) at(i) -= upper_[i] * at(i + 1);
      v[static_cast<std::size_t>(c)] = 0.0;
      v[static_cast<std::size_t>(n_ - 1) * d + c] = 0.0;
    }
  }

  // x^T A x for an n x d array with zero boundary rows.
  double energy(const std::vector<double>& x, int d) const {
    double s = 0.0;
    for (int i = 0; i + 1 < n_; ++i) {
      for (int c = 0; c < d; ++c) {
        const double dx = x[static_cast<std::size_t>(i + 1) * d + c] -
                          x[static_cast<std::size_t>(i) * d + c];
        s += dx * dx / h_;
      }
    }
    for (double e : x) s += h_ * e * e;
    return s;
  }

  std::vector<double> unit_response(int node) const {
    std::vector<double> e(static_cast<std::size_t>(n_), 0.0);
    e[static_cast<std::size_t>(node)] = 1.0;
    solve(e, 1);
    return e;
  }

 private:
  int n_;
  double h_;
  double off_ = 0.0;
  std::vector<double> upper_;
  std::vector<double> inv_pivot_;
};

std::vector<double> cell_distances(const GridFunction& u, std::span<const double> q) {
  const int d = u.dimension();
  std::vector<double> out(static_cast<std::size_t>(u.size() - 1));
  for (int i = 0; i + 1 < u.size(); ++i) {
    const auto a = u.point(i);
    const auto b = u.point(i + 1);
    double ab2 = 0.0;
    double proj = 0.0;
    for (int c = 0; c < d; ++c) {
      ab2 += (b[c] - a[c]) * (b[c] - a[c]);
      proj += (q[c] - a[c]) * (b[c] - a[c]);
    }
    const double s = ab2 > 0.0 ? std::clamp(proj / ab2, 0.0, 1.0) : 0.0;
    double d2 = 0.0;
    for (int c = 0; c < d; ++c) {
      const double x = a[c] + s * (b[c] - a[c]) - q[c];
      d2 += x * x;
    }
    out[static_cast<std::size_t>(i)] = std::sqrt(d2);
  }
  return out;
}

// Every trajectory on the straight homotopy from `from` to `to` keeps each
// segment at least `clearance` away from q. A point of the swept cell lies
// within max(|du_i|, |du_{i+1}|) of the old segment, which gives a sufficient
// per-cell test; it keeps a step from hopping over the singularity between
// two iterates.
bool homotopy_clear(const GridFunction& from, const GridFunction& to,
                    const std::vector<double>& cell_clearance, double clearance) {
  const int d = from.dimension();
  double prev = 0.0;
  for (int i = 0; i < from.size(); ++i) {
    double s = 0.0;
    for (int c = 0; c < d; ++c) s += (to(i, c) - from(i, c)) * (to(i, c) - from(i, c));
    const double move = std::sqrt(s);
    if (i > 0 && std::max(prev, move) > cell_clearance[static_cast<std::size_t>(i - 1)] - clearance) {
      return false;
    }
    prev = move;
  }
  return true;
}

// A period shift is exact on R; on the truncated grid it is accepted only if
// it loses no measurable mass off the far end, and never if it raises I.
bool renormalization_neutral(double before, double after) {
  return after <= before && before - after <= 1e-10 * (1.0 + std::abs(before));
}

struct DescentOutcome {
  GridFunction u;
  double value;
  double grad_norm;
  double k = 0.0;
  int iterations = 0;
  bool converged = false;
  bool stalled = false;
  bool constraint_active = false;
  std::vector<double> values;
  std::vector<RenormalizationEvent> renormalizations;
};

// Shared Armijo descent. With `constraint` set, node constraint->node stays at
// k q (k >= k_min) and k is an extra unknown; otherwise the descent is free and
// translation renormalization runs every cfg.renormalize_every iterations.
DescentOutcome run_descent(GridFunction x, const std::optional<ConstraintE>& constraint,
                           const Potential& pot, const SolverConfig& cfg) {
  const Grid grid = x.grid();
  const int n = grid.size();
  const int d = x.dimension();
  const double h = grid.h();
  const double clearance = default_clearance(pot);
  const std::vector<double> q(pot.q().begin(), pot.q().end());
  const double q2 = dot(q, q);

  std::optional<RieszMap> riesz;
  if (cfg.precondition) riesz.emplace(grid);

  const bool constrained = constraint.has_value();
  const int j = constrained ? constraint->node : -1;
  double k = constrained ? constraint->k : 0.0;
  const double k_min = constrained ? constraint->k_min : 0.0;
  std::vector<double> z;
  if (constrained && riesz) z = riesz->unit_response(j);

  auto at_clamp = [&] { return constrained && k <= k_min * (1.0 + 1e-12); };

  // Removes the part of the node-j row that the constraint does not allow.
  // With `fix`, the whole row is pinned (k on its clamp).
  auto constrain_row = [&](std::vector<double>& v, bool fix) {
    double* row = v.data() + static_cast<std::size_t>(j) * d;
    const double along = fix ? 0.0 : dot({row, static_cast<std::size_t>(d)}, q) / q2;
    for (int c = 0; c < d; ++c) row[c] = along * q[c];
  };

  auto direction = [&](const std::vector<double>& g, bool fix) {
    std::vector<double> p = g;
    if (riesz) {
      riesz->solve(p, d);
      if (constrained) {
        // p - z (row_j - allowed(row_j)) / z_j keeps the A-orthogonal
        // projection onto the constrained subspace.
        std::vector<double> row(p.begin() + static_cast<std::ptrdiff_t>(j) * d,
                                p.begin() + static_cast<std::ptrdiff_t>(j + 1) * d);
        const double along = fix ? 0.0 : dot(row, q) / q2;
        for (int c = 0; c < d; ++c) row[c] -= along * q[c];
        const double zj = z[static_cast<std::size_t>(j)];
        for (int i = 0; i < n; ++i) {
          const double f = z[static_cast<std::size_t>(i)] / zj;
          for (int c = 0; c < d; ++c) p[static_cast<std::size_t>(i) * d + c] -= f * row[c];
        }
      }
    } else if (constrained) {
      constrain_row(p, fix);
    }
    return p;
  };

  auto reduced_norm = [&](const std::vector<double>& g) {
    if (!constrained) return gradient_norm(g, h);
    std::vector<double> r = g;
    const double gk = dot({g.data() + static_cast<std::size_t>(j) * d, static_cast<std::size_t>(d)}, q);
    constrain_row(r, at_clamp() && gk > 0.0);
    return gradient_norm(r, h);
  };

  ActionEval ev = eval_action(x, pot, clearance);
  if (!ev.feasible) throw InfeasibleGuess("descent started from an infeasible trajectory");

  DescentOutcome out{x, ev.value, reduced_norm(ev.gradient), 0.0, 0, false, false, false, {}, {}};
  out.values.push_back(ev.value);

  std::vector<double> prev_x;
  std::vector<double> prev_g;
  double step = 1.0;
  int clamp_run = 0;
  constexpr int kStallWindow = 500;
  double window_start = ev.value;
  GridFunction trial = x;

  for (int iter = 0;; ++iter) {
    out.grad_norm = reduced_norm(ev.gradient);
    if (out.grad_norm <= cfg.grad_tol) {
      out.converged = true;
      break;
    }
    if (iter >= cfg.max_iters) break;

    if (!constrained && sup_norm(x) < cfg.zero_threshold) {
      std::ostringstream os;
      os << "descent collapsed to the trivial solution after " << iter << " iterations";
      throw ConvergedToZero(os.str());
    }

    const double gk =
        constrained
            ? dot({ev.gradient.data() + static_cast<std::size_t>(j) * d, static_cast<std::size_t>(d)}, q)
            : 0.0;
    const bool fix = at_clamp() && gk > 0.0;
    const std::vector<double> p = direction(ev.gradient, fix);
    const double slope = dot(ev.gradient, p);
    if (!(slope > 0.0)) {
      out.stalled = true;
      break;
    }

    // Barzilai-Borwein trial step in the preconditioner's metric; Armijo
    // backtracking below keeps the descent monotone regardless.
    if (!prev_x.empty()) {
      std::vector<double> dx(x.values().size());
      std::vector<double> dg(dx.size());
      for (std::size_t i = 0; i < dx.size(); ++i) {
        dx[i] = x.values()[i] - prev_x[i];
        dg[i] = ev.gradient[i] - prev_g[i];
      }
      const double curv = dot(dx, dg);
      const double metric = riesz ? riesz->energy(dx, d) : dot(dx, dx);
      step = (curv > 0.0 && metric > 0.0) ? metric / curv : 1.0;
      if (!(step >= 1e-12 && step <= 1e12)) step = 1.0;
    }

    const std::vector<double> cell_clearance = cell_distances(x, q);
    bool accepted = false;
    double trial_k = k;
    double change = 0.0;
    for (int b = 0; b <= cfg.max_backtracks; ++b, step *= cfg.backtrack) {
      auto& tv = trial.values();
      const auto& xv = x.values();
      for (std::size_t i = 0; i < tv.size(); ++i) tv[i] = xv[i] - step * p[i];
      if (constrained) {
        const double dk = dot({p.data() + static_cast<std::size_t>(j) * d, static_cast<std::size_t>(d)}, q) / q2;
        trial_k = std::max(k_min, k - step * dk);
        for (int c = 0; c < d; ++c) trial(j, c) = trial_k * q[c];
      }
      if (!homotopy_clear(x, trial, cell_clearance, clearance)) continue;
      change = action_difference(x, trial, pot);
      double predicted = 0.0;
      for (std::size_t i = 0; i < tv.size(); ++i) predicted += ev.gradient[i] * (tv[i] - xv[i]);
      if (change <= cfg.armijo_c1 * predicted) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      out.stalled = true;
      break;
    }

    prev_x = x.values();
    prev_g = ev.gradient;
    std::swap(x, trial);
    k = trial_k;
    // The logged value is carried forward by the accurately summed
    // difference, so the recorded sequence is exactly nonincreasing.
    const double tracked = out.values.back() + change;
    ev = eval_action(x, pot, clearance);
    ev.value = tracked;
    out.values.push_back(tracked);
    out.iterations = iter + 1;

    // Stagnation: accepted steps that no longer move the action. This is what
    // a trajectory pressed against the clearance guard looks like.
    if ((iter + 1) % kStallWindow == 0) {
      if (window_start - tracked <= 1e-13 * (1.0 + std::abs(tracked))) {
        out.stalled = true;
        break;
      }
      window_start = tracked;
    }

    if (constrained) {
      clamp_run = at_clamp() ? clamp_run + 1 : 0;
      if (clamp_run >= cfg.constraint_active_window) out.constraint_active = true;
    } else if (cfg.renormalize_every > 0 && (iter + 1) % cfg.renormalize_every == 0) {
      Renormalized r = renormalize_translation(x);
      if (r.shift != 0) {
        const double after = action_value(r.function, pot);
        RenormalizationEvent event{iter + 1, r.shift, ev.value, after,
                                   renormalization_neutral(ev.value, after)};
        if (event.applied) {
          x = std::move(r.function);
          trial = x;
          ev = eval_action(x, pot, clearance);
          out.values.push_back(ev.value);
          prev_x.clear();
          prev_g.clear();
        }
        out.renormalizations.push_back(event);
      }
    }
  }

  out.u = x;
  out.value = ev.value;
  out.k = k;
  return out;
}

std::vector<double> transverse_direction(std::span<const double> q) {
  const int d = static_cast<int>(q.size());
  std::vector<double> e(static_cast<std::size_t>(d), 0.0);
  if (d == 2) {
    e[0] = -q[1];
    e[1] = q[0];
  } else {
    // Coordinate axis least aligned with q, then Gram-Schmidt.
    int axis = 0;
    for (int i = 1; i < d; ++i) {
      if (std::abs(q[i]) < std::abs(q[axis])) axis = i;
    }
    e[axis] = 1.0;
    const double f = q[axis] / dot(q, q);
    for (int i = 0; i < d; ++i) e[i] -= f * q[i];
  }
  const double n = std::sqrt(dot(e, e));
  for (double& x : e) x /= n;
  return e;
}

}  // namespace

GridFunction initial_guess_bump(const Grid& grid, const Potential& pot, double k0, double center,
                                double width, const GuessShape& shape) {
  if (!(k0 >= 1.0 + shape.eps_k)) {
    throw PreconditionViolation("k0 must be at least 1 + eps_k");
  }
  if (!(width > 0.0)) throw PreconditionViolation("bump width must be positive");
  const int jc = grid.nearest_index(center);
  if (std::abs(grid.time(jc) - center) > 1e-9 * grid.h()) {
    throw PreconditionViolation("bump center must be a grid node");
  }
  if (jc == 0 || jc == grid.size() - 1) {
    throw PreconditionViolation("bump center must be an interior node");
  }

  const int d = pot.dimension();
  const auto q = pot.q();
  const auto side = transverse_direction(q);
  const double offset = shape.orientation * shape.loop_offset * pot.q_norm();
  GridFunction u(grid, d);
  for (int i = 1; i + 1 < u.size(); ++i) {
    const double tau = width * (grid.time(i) - grid.time(jc));
    const double sech = 1.0 / std::cosh(tau);
    const double lateral = offset * sech * std::tanh(tau);
    for (int c = 0; c < d; ++c) u(i, c) = k0 * q[c] * sech + lateral * side[c];
  }
  for (int c = 0; c < d; ++c) u(jc, c) = k0 * q[c];

  const double cl = singularity_clearance(u, pot);
  if (cl < default_clearance(pot)) {
    std::ostringstream os;
    os << "initial guess passes within " << cl << " of the singularity";
    throw InfeasibleGuess(os.str());
  }
  return u;
}

EStageResult minimize_over_E(const GridFunction& u0, const ConstraintE& constraint,
                             const Potential& pot, const SolverConfig& cfg) {
  if (constraint.node <= 0 || constraint.node >= u0.size() - 1) {
    throw PreconditionViolation("constrained node must be interior");
  }
  if (!(constraint.k >= constraint.k_min) || !(constraint.k_min > 1.0)) {
    throw PreconditionViolation("constraint needs k >= k_min > 1");
  }
  const auto q = pot.q();
  for (int c = 0; c < u0.dimension(); ++c) {
    const double want = constraint.k * q[c];
    if (std::abs(u0(constraint.node, c) - want) > 1e-12 * (1.0 + std::abs(want))) {
      throw PreconditionViolation("initial iterate is not in E: u(t_j) != k q");
    }
  }
  DescentOutcome r = run_descent(u0, constraint, pot, cfg);
  return EStageResult{std::move(r.u), r.k,          r.value,
                      r.grad_norm,    r.iterations, r.converged,
                      r.constraint_active, std::move(r.values)};
}

std::optional<Crossing> find_crossing(const GridFunction& u, const Potential& pot) {
  const auto q = pot.q();
  const double q2 = dot(q, q);
  const int d = u.dimension();
  if (d == 2) {
    // Sign change of the component across the line spanned by q.
    auto across = [&](int i) { return q[0] * u(i, 1) - q[1] * u(i, 0); };
    for (int i = 0; i + 1 < u.size(); ++i) {
      const double a = across(i);
      const double b = across(i + 1);
      if (a == 0.0) {
        const double k = dot(u.point(i), q) / q2;
        if (k > 1.0) return Crossing{i, k};
      }
      if (a == 0.0 && b == 0.0) continue;
      if ((a <= 0.0 && b > 0.0) || (a >= 0.0 && b < 0.0)) {
        const double s = a / (a - b);
        double along = 0.0;
        for (int c = 0; c < 2; ++c) along += (u(i, c) + s * (u(i + 1, c) - u(i, c))) * q[c];
        const double k = along / q2;
        if (k > 1.0) return Crossing{s < 0.5 ? i : i + 1, k};
      }
    }
    return std::nullopt;
  }
  const double tol = default_clearance(pot);
  std::optional<Crossing> best;
  double best_dist = tol;
  for (int i = 1; i + 1 < u.size(); ++i) {
    const double k = dot(u.point(i), q) / q2;
    if (k <= 1.0) continue;
    double dist2 = 0.0;
    for (int c = 0; c < d; ++c) dist2 += (u(i, c) - k * q[c]) * (u(i, c) - k * q[c]);
    const double dist = std::sqrt(dist2);
    if (dist <= best_dist) {
      best_dist = dist;
      best = Crossing{i, k};
    }
  }
  return best;
}

HomoclinicCandidate descend_to_critical(const GridFunction& u0, const Potential& pot,
                                        const SolverConfig& cfg) {
  DescentOutcome r = run_descent(u0, std::nullopt, pot, cfg);
  if (!r.converged) {
    std::ostringstream os;
    os << (r.stalled ? "line search stalled" : "iteration budget exhausted") << " after "
       << r.iterations << " iterations at gradient norm " << r.grad_norm;
    throw MaxItersExceeded(os.str());
  }
  if (sup_norm(r.u) < cfg.zero_threshold) {
    throw ConvergedToZero("descent converged to the trivial solution");
  }

  Renormalized norm = renormalize_translation(r.u);
  GridFunction traj = r.u;
  double value = r.value;
  bool normalized = true;
  if (norm.shift != 0) {
    const double after = action_value(norm.function, pot);
    const bool neutral = renormalization_neutral(r.value, after);
    r.renormalizations.push_back({r.iterations, norm.shift, r.value, after, neutral});
    if (neutral) {
      traj = std::move(norm.function);
      value = after;
    } else {
      normalized = false;
    }
  }

  HomoclinicCandidate cand{traj,
                           value,
                           gradient_norm(eval_action(traj, pot).gradient, traj.grid().h()),
                           ode_residual(traj, pot),
                           singularity_clearance(traj, pot),
                           find_crossing(traj, pot),
                           r.iterations,
                           std::move(r.values),
                           std::move(r.renormalizations),
                           std::nullopt,
                           std::nullopt};
  cand.normalized = normalized;
  if (cand.clearance < default_clearance(pot)) {
    throw InfeasibleGuess("converged trajectory violates the singularity clearance");
  }
  if (!(cand.action > 0.0)) throw ConvergedToZero("converged trajectory has zero action");
  return cand;
}

int coefficient_peak_node(const Grid& grid, const Potential& pot) {
  const int start = grid.zero_index();
  int best = start;
  for (int i = start; i < start + grid.nodes_per_period(); ++i) {
    if (pot.a(grid.time(i)) > pot.a(grid.time(best))) best = i;
  }
  return best;
}

HomoclinicCandidate solve_homoclinic(const Potential& pot, const Grid& grid,
                                     const SolverConfig& cfg) {
  check_A(pot.coefficient());
  check_H2(pot.singular());

  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::ostringstream failures;
  const int m = grid.nodes_per_period();
  const int offset = static_cast<int>(std::lround(cfg.phase * m)) % m;
  const int jc = coefficient_peak_node(grid, pot) + (offset + m) % m;

  for (int attempt = 0; attempt <= cfg.max_restarts; ++attempt) {
    double k0 = cfg.k0;
    double width = cfg.bump_width;
    const int node = jc;
    if (attempt > 0) {
      // Reseed: jitter the crossing depth and the width.
      k0 = std::max(1.0 + cfg.eps_k, cfg.k0 * (0.8 + 0.6 * unif(rng)));
      width = cfg.bump_width * (0.6 + 0.8 * unif(rng));
    }
    try {
      const GridFunction guess =
          initial_guess_bump(grid, pot, k0, grid.time(node), width,
                             GuessShape{cfg.loop_offset, cfg.orientation, cfg.eps_k});
      const ConstraintE constraint{node, 1.0 + cfg.eps_k, k0};
      EStageResult e = minimize_over_E(guess, constraint, pot, cfg);
      HomoclinicCandidate cand = descend_to_critical(e.u, pot, cfg);
      cand.e_value = e.value;
      cand.e_k = e.k;
      cand.constraint_active = e.constraint_active;
      return cand;
    } catch (const ConvergedToZero& ex) {
      failures << " [attempt " << attempt << ": " << ex.what() << "]";
    } catch (const MaxItersExceeded& ex) {
      failures << " [attempt " << attempt << ": " << ex.what() << "]";
    } catch (const InfeasibleGuess& ex) {
      failures << " [attempt " << attempt << ": " << ex.what() << "]";
    }
  }
  throw NoSolutionFound("no homoclinic candidate found:" + failures.str());
}

}  // namespace homoclinic
