#include "homoclinic/potential.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <utility>

#include "homoclinic/errors.hpp"

namespace homoclinic {

namespace {

double norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double dist_to(std::span<const double> u, std::span<const double> q) {
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double d = u[i] - q[i];
    s += d * d;
  }
  return std::sqrt(s);
}

void guard(const SingularPotentialSpec& spec, std::span<const double> u) {
  if (static_cast<int>(u.size()) != spec.dimension) {
    throw PreconditionViolation("point dimension does not match potential dimension");
  }
  const double dq = dist_to(u, spec.q);
  if (dq < spec.singularity_guard()) {
    std::ostringstream os;
    os << "evaluation within " << dq << " of the singularity";
    throw SingularityHit(os.str());
  }
}

std::vector<double> random_direction(std::mt19937_64& rng, int dim) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> v(static_cast<std::size_t>(dim));
  double n = 0.0;
  while (n < 1e-12) {
    for (double& x : v) x = gauss(rng);
    n = norm(v);
  }
  for (double& x : v) x /= n;
  return v;
}

}  // namespace

double CoefficientSpec::a0() const { return a_base - std::abs(a_amp); }
double CoefficientSpec::a_inf() const { return a_base + std::abs(a_amp); }

double eval_a(const CoefficientSpec& spec, double t) {
  // Reduce t into one period first so that a(t + T) == a(t) does not depend on
  // the magnitude of t.
  double phase = std::fmod(t, spec.period);
  if (phase < 0.0) phase += spec.period;
  return spec.a_base + spec.a_amp * std::cos(2.0 * std::numbers::pi * phase / spec.period);
}

double SingularPotentialSpec::q_norm() const { return norm(q); }

double SingularPotentialSpec::singularity_guard() const {
  return eps_q > 0.0 ? eps_q : 1e-9 * q_norm();
}

SingularPotentialSpec SingularPotentialSpec::example_family(int dimension,
                                                            std::vector<double> q,
                                                            double alpha) {
  if (dimension < 2) throw PreconditionViolation("dimension must be at least 2");
  if (static_cast<int>(q.size()) != dimension) {
    throw PreconditionViolation("q must have `dimension` components");
  }
  if (!(alpha >= 2.0 && alpha <= 4.0)) {
    throw PreconditionViolation("alpha must lie in [2, 4]");
  }
  SingularPotentialSpec s;
  s.dimension = dimension;
  s.q = std::move(q);
  s.alpha = alpha;
  if (s.q_norm() == 0.0) throw PreconditionViolation("q must be nonzero");
  return s;
}

SingularPotentialSpec SingularPotentialSpec::custom(int dimension, std::vector<double> q,
                                                    ScalarField W, VectorField gradW) {
  if (!W || !gradW) throw PreconditionViolation("custom potentials need W and grad W");
  if (static_cast<int>(q.size()) != dimension) {
    throw PreconditionViolation("q must have `dimension` components");
  }
  SingularPotentialSpec s;
  s.dimension = dimension;
  s.q = std::move(q);
  s.alpha = 0.0;
  s.custom_W = std::move(W);
  s.custom_gradW = std::move(gradW);
  if (s.q_norm() == 0.0) throw PreconditionViolation("q must be nonzero");
  return s;
}

double eval_W(const SingularPotentialSpec& spec, std::span<const double> u) {
  guard(spec, u);
  if (spec.is_custom()) return spec.custom_W(u);
  double r2 = 0.0;
  for (double x : u) r2 += x * x;
  if (r2 == 0.0) return 0.0;
  return -r2 * std::pow(dist_to(u, spec.q), -spec.alpha);
}

void eval_gradW(const SingularPotentialSpec& spec, std::span<const double> u,
                std::span<double> out) {
  guard(spec, u);
  if (spec.is_custom()) {
    spec.custom_gradW(u, out);
    return;
  }
  double r2 = 0.0;
  double d2 = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    r2 += u[i] * u[i];
    const double d = u[i] - spec.q[i];
    d2 += d * d;
  }
  // grad(-|u|^2 |u-q|^-a) = -2u |u-q|^-a + a |u|^2 |u-q|^(-a-2) (u - q)
  const double inv_pow = std::pow(d2, -0.5 * spec.alpha);
  const double radial = spec.alpha * r2 * inv_pow / d2;
  for (std::size_t i = 0; i < u.size(); ++i) {
    out[i] = -2.0 * u[i] * inv_pow + radial * (u[i] - spec.q[i]);
  }
}

std::vector<double> eval_gradW(const SingularPotentialSpec& spec, std::span<const double> u) {
  std::vector<double> g(u.size());
  eval_gradW(spec, u, g);
  return g;
}

Potential::Potential(CoefficientSpec coeff, SingularPotentialSpec w)
    : coeff_(coeff), w_(std::move(w)), q_norm_(w_.q_norm()) {
  if (coeff_.period <= 0.0) throw PreconditionViolation("period must be positive");
}

StrongForceWitness StrongForceWitness::defaults(const SingularPotentialSpec& spec, double c,
                                                double radius, double c_inf, double R0) {
  StrongForceWitness w;
  w.radius = radius;
  w.R0 = R0 > 0.0 ? R0 : 4.0 * spec.q_norm();
  const std::vector<double> q = spec.q;
  const double alpha = spec.alpha > 0.0 ? spec.alpha : 2.0;

  if (alpha == 2.0) {
    w.U = [q, c](std::span<const double> u) { return c * std::log(dist_to(u, q)); };
    w.gradU = [q, c](std::span<const double> u, std::span<double> out) {
      double d2 = 0.0;
      for (std::size_t i = 0; i < u.size(); ++i) d2 += (u[i] - q[i]) * (u[i] - q[i]);
      for (std::size_t i = 0; i < u.size(); ++i) out[i] = c * (u[i] - q[i]) / d2;
    };
  } else {
    const double e = 1.0 - 0.5 * alpha;
    w.U = [q, c, e](std::span<const double> u) { return c * std::pow(dist_to(u, q), e); };
    w.gradU = [q, c, e](std::span<const double> u, std::span<double> out) {
      const double d = dist_to(u, q);
      const double f = c * e * std::pow(d, e - 2.0);
      for (std::size_t i = 0; i < u.size(); ++i) out[i] = f * (u[i] - q[i]);
    };
  }

  if (alpha < 4.0) {
    const double e = 0.5 * (4.0 - alpha);
    w.U_inf = [c_inf, e](std::span<const double> u) { return c_inf * std::pow(norm(u), e); };
    w.gradU_inf = [c_inf, e](std::span<const double> u, std::span<double> out) {
      const double r = norm(u);
      const double f = c_inf * e * std::pow(r, e - 2.0);
      for (std::size_t i = 0; i < u.size(); ++i) out[i] = f * u[i];
    };
  } else {
    w.U_inf = [c_inf](std::span<const double> u) { return c_inf * std::log(norm(u)); };
    w.gradU_inf = [c_inf](std::span<const double> u, std::span<double> out) {
      double r2 = 0.0;
      for (double x : u) r2 += x * x;
      for (std::size_t i = 0; i < u.size(); ++i) out[i] = c_inf * u[i] / r2;
    };
  }
  return w;
}

AReport check_A(const CoefficientSpec& spec, int n_samples) {
  if (n_samples < 1) throw PreconditionViolation("check_A needs at least one sample");
  AReport rep{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (int i = 0; i < n_samples; ++i) {
    const double a = eval_a(spec, spec.period * i / n_samples);
    rep.min_a = std::min(rep.min_a, a);
    rep.max_a = std::max(rep.max_a, a);
  }
  if (rep.min_a <= 0.0) {
    throw HypothesisViolation("a(t) is not bounded below by a positive constant", rep.min_a);
  }
  return rep;
}

H2Report check_H2(const SingularPotentialSpec& spec, double fd_step) {
  const int d = spec.dimension;
  Eigen::MatrixXd H(d, d);
  std::vector<double> x(static_cast<std::size_t>(d), 0.0);
  std::vector<double> gp(static_cast<std::size_t>(d));
  std::vector<double> gm(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i) {
    x[i] = fd_step;
    eval_gradW(spec, x, gp);
    x[i] = -fd_step;
    eval_gradW(spec, x, gm);
    x[i] = 0.0;
    for (int j = 0; j < d; ++j) H(j, i) = (gp[j] - gm[j]) / (2.0 * fd_step);
  }
  const Eigen::MatrixXd sym = 0.5 * (H + H.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym, Eigen::EigenvaluesOnly);
  H2Report rep;
  rep.eigen_min = eig.eigenvalues().minCoeff();
  rep.eigen_max = eig.eigenvalues().maxCoeff();
  rep.alpha0 = -rep.eigen_min;
  rep.alpha1 = -rep.eigen_max;
  if (rep.eigen_max >= 0.0) {
    throw HypothesisViolation("Hessian of W at 0 is not negative definite", rep.eigen_max);
  }
  return rep;
}

H3Report check_H3(const SingularPotentialSpec& spec, const StrongForceWitness& witness,
                  int n_samples, std::uint64_t seed) {
  const double qn = spec.q_norm();
  if (!(witness.radius > 0.0 && witness.radius < 0.5 * qn)) {
    throw PreconditionViolation("strong-force witness radius must lie in (0, |q|/2)");
  }
  if (!witness.U || !witness.gradU) throw PreconditionViolation("witness U is missing");

  const int d = spec.dimension;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<double> u(static_cast<std::size_t>(d));
  std::vector<double> g(static_cast<std::size_t>(d));

  H3Report rep{std::numeric_limits<double>::infinity(), 0};
  for (int s = 0; s < n_samples; ++s) {
    const double rho = witness.radius * std::pow(10.0, -6.0 * unif(rng));
    const auto dir = random_direction(rng, d);
    for (int i = 0; i < d; ++i) u[i] = spec.q[i] + rho * dir[i];
    witness.gradU(u, g);
    double g2 = 0.0;
    for (double x : g) g2 += x * x;
    rep.min_margin = std::min(rep.min_margin, -eval_W(spec, u) - g2);
    ++rep.samples;
  }

  // |U| must grow monotonically along rays into q.
  constexpr int kRays = 16;
  constexpr int kSteps = 60;
  for (int r = 0; r < kRays; ++r) {
    const auto dir = random_direction(rng, d);
    double prev = -1.0;
    for (int k = 0; k <= kSteps; ++k) {
      const double rho = witness.radius * std::pow(10.0, -6.0 * k / kSteps);
      for (int i = 0; i < d; ++i) u[i] = spec.q[i] + rho * dir[i];
      const double mag = std::abs(witness.U(u));
      if (mag < prev) {
        throw HypothesisViolation("|U| does not grow toward the singularity", mag - prev);
      }
      prev = mag;
    }
  }

  if (rep.min_margin < 0.0) {
    throw HypothesisViolation("strong-force inequality W <= -|grad U|^2 fails near q",
                              rep.min_margin);
  }
  return rep;
}

H4Report check_H4(const SingularPotentialSpec& spec, const StrongForceWitness& witness,
                  int n_samples, std::uint64_t seed) {
  if (!witness.U_inf || !witness.gradU_inf) {
    throw PreconditionViolation("witness U_inf is missing");
  }
  if (!(witness.R0 > spec.q_norm())) {
    throw PreconditionViolation("R0 must exceed |q| so the exterior avoids the singularity");
  }
  const int d = spec.dimension;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<double> u(static_cast<std::size_t>(d));
  std::vector<double> g(static_cast<std::size_t>(d));

  H4Report rep{std::numeric_limits<double>::infinity(), 0};
  for (int s = 0; s < n_samples; ++s) {
    const double radius = witness.R0 * std::pow(10.0, 3.0 * unif(rng));
    const auto dir = random_direction(rng, d);
    for (int i = 0; i < d; ++i) u[i] = radius * dir[i];
    witness.gradU_inf(u, g);
    double g2 = 0.0;
    for (double x : g) g2 += x * x;
    rep.min_margin = std::min(rep.min_margin, -eval_W(spec, u) - g2);
    ++rep.samples;
  }

  constexpr int kRays = 16;
  constexpr int kSteps = 60;
  for (int r = 0; r < kRays; ++r) {
    const auto dir = random_direction(rng, d);
    double first = 0.0;
    double prev = -1.0;
    for (int k = 0; k <= kSteps; ++k) {
      const double radius = witness.R0 * std::pow(10.0, 6.0 * k / kSteps);
      for (int i = 0; i < d; ++i) u[i] = radius * dir[i];
      const double mag = std::abs(witness.U_inf(u));
      if (k == 0) first = mag;
      if (mag < prev) {
        throw HypothesisViolation("|U_inf| does not grow at infinity", mag - prev);
      }
      prev = mag;
    }
    if (!(prev > first)) throw HypothesisViolation("|U_inf| is flat at infinity", 0.0);
  }

  if (rep.min_margin < 0.0) {
    throw HypothesisViolation("W <= -|grad U_inf|^2 fails at infinity", rep.min_margin);
  }
  return rep;
}

SignReport check_negativity(const SingularPotentialSpec& spec, double radius, int n_samples,
                            std::uint64_t seed) {
  const int d = spec.dimension;
  const std::vector<double> zero(static_cast<std::size_t>(d), 0.0);
  const double w0 = eval_W(spec, zero);
  if (w0 != 0.0) throw HypothesisViolation("W(0) must vanish", w0);

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<double> u(static_cast<std::size_t>(d));
  const double skip = 1e-6 * spec.q_norm();
  SignReport rep{-std::numeric_limits<double>::infinity(), 0};
  for (int s = 0; s < n_samples; ++s) {
    // Log-spaced radii cover both the quadratic region and the far field.
    const double r = radius * std::pow(10.0, -4.0 * unif(rng));
    const auto dir = random_direction(rng, d);
    for (int i = 0; i < d; ++i) u[i] = r * dir[i];
    if (dist_to(u, spec.q) < skip) continue;
    rep.max_W = std::max(rep.max_W, eval_W(spec, u));
    ++rep.samples;
  }
  if (rep.max_W >= 0.0) throw HypothesisViolation("W is not negative away from 0", rep.max_W);
  return rep;
}

}  // namespace homoclinic
