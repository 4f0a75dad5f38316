#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace homoclinic {

/// Periodic coefficient a(t) = a_base + a_amp * cos(2 pi t / period).
struct CoefficientSpec {
  double a_base = 4.0;
  double a_amp = 2.5;
  double period = 1.0;

  double a0() const;     ///< lower bound a_base - |a_amp|
  double a_inf() const;  ///< upper bound a_base + |a_amp|
};

double eval_a(const CoefficientSpec& spec, double t);

using ScalarField = std::function<double(std::span<const double>)>;
using VectorField = std::function<void(std::span<const double>, std::span<double>)>;

/// The singular factor W of V(t,u) = a(t) W(u).
///
/// The built-in family is W(u) = -|u|^2 |u - q|^(-alpha) with alpha in [2, 4].
/// A user-supplied W must come with its gradient; Hessians are never requested
/// from users and are finite-differenced where needed.
struct SingularPotentialSpec {
  int dimension = 2;
  std::vector<double> q{2.0, 0.0};
  double alpha = 2.0;
  /// Distance to q below which evaluation refuses; <= 0 selects 1e-9 |q|.
  double eps_q = 0.0;

  ScalarField custom_W;
  VectorField custom_gradW;

  bool is_custom() const { return static_cast<bool>(custom_W); }
  double q_norm() const;
  double singularity_guard() const;

  static SingularPotentialSpec example_family(int dimension, std::vector<double> q,
                                              double alpha);
  static SingularPotentialSpec custom(int dimension, std::vector<double> q, ScalarField W,
                                      VectorField gradW);
};

/// Throws SingularityHit when |u - q| < eps_q.
double eval_W(const SingularPotentialSpec& spec, std::span<const double> u);
void eval_gradW(const SingularPotentialSpec& spec, std::span<const double> u,
                std::span<double> out);
std::vector<double> eval_gradW(const SingularPotentialSpec& spec, std::span<const double> u);

/// a(t) W(u) bundled with the geometry the action and solver need.
class Potential {
 public:
  Potential(CoefficientSpec coeff, SingularPotentialSpec w);

  const CoefficientSpec& coefficient() const { return coeff_; }
  const SingularPotentialSpec& singular() const { return w_; }
  int dimension() const { return w_.dimension; }
  std::span<const double> q() const { return w_.q; }
  double q_norm() const { return q_norm_; }
  double period() const { return coeff_.period; }

  double a(double t) const { return eval_a(coeff_, t); }
  double W(std::span<const double> u) const { return eval_W(w_, u); }
  void gradW(std::span<const double> u, std::span<double> out) const {
    eval_gradW(w_, u, out);
  }

 private:
  CoefficientSpec coeff_;
  SingularPotentialSpec w_;
  double q_norm_;
};

/// Witness fields for the strong-force condition near q and the growth
/// condition at infinity.
struct StrongForceWitness {
  ScalarField U;
  VectorField gradU;
  double radius = 0.1;
  ScalarField U_inf;
  VectorField gradU_inf;
  double R0 = 8.0;

  /// c ln|u-q| (alpha = 2) or c |u-q|^(1-alpha/2) near q; c_inf |u|^((4-alpha)/2)
  /// (alpha < 4) or c_inf ln|u| (alpha = 4) at infinity.
  static StrongForceWitness defaults(const SingularPotentialSpec& spec, double c = 1.0,
                                     double radius = 0.1, double c_inf = 0.5,
                                     double R0 = 0.0);
};

struct AReport {
  double min_a;
  double max_a;
};

struct H2Report {
  double eigen_min;
  double eigen_max;
  double alpha0;
  double alpha1;
};

struct H3Report {
  double min_margin;
  int samples;
};

struct H4Report {
  double min_margin;
  int samples;
};

struct SignReport {
  double max_W;  ///< largest sampled W(u) over u != 0, q
  int samples;
};

/// Samples one period; throws HypothesisViolation when min a <= 0.
AReport check_A(const CoefficientSpec& spec, int n_samples = 1000);

/// Finite-difference Hessian of W at 0 (symmetrized); throws
/// HypothesisViolation when any eigenvalue is >= 0.
H2Report check_H2(const SingularPotentialSpec& spec, double fd_step = 1e-4);

/// min of -W - |grad U|^2 over 0 < |u - q| <= r; also requires |U| to grow
/// monotonically along sampled rays into q.
H3Report check_H3(const SingularPotentialSpec& spec, const StrongForceWitness& witness,
                  int n_samples = 2000, std::uint64_t seed = 1);

/// min of -W - |grad U_inf|^2 over |u| >= R0 plus growth of |U_inf| along rays.
H4Report check_H4(const SingularPotentialSpec& spec, const StrongForceWitness& witness,
                  int n_samples = 2000, std::uint64_t seed = 2);

/// W(0) = 0 and W < 0 elsewhere, by sampling a ball of the given radius.
SignReport check_negativity(const SingularPotentialSpec& spec, double radius,
                            int n_samples = 2000, std::uint64_t seed = 3);

}  // namespace homoclinic
