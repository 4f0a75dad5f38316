#pragma once

#include <cmath>
#include <vector>

#include "homoclinic/function_space.hpp"
#include "homoclinic/potential.hpp"

namespace testing_support {

using namespace homoclinic;

inline Potential example_potential(double alpha = 2.0, double a_base = 4.0, double a_amp = 2.5) {
  CoefficientSpec c;
  c.a_base = a_base;
  c.a_amp = a_amp;
  c.period = 1.0;
  return Potential(c, SingularPotentialSpec::example_family(2, {2.0, 0.0}, alpha));
}

inline Grid default_grid() { return Grid(1.0, 40, 8); }

// Closed-form oracle for W(u) = -|u|^2 |u - q|^(-alpha), written out
// independently of the library.
inline double oracle_W(const std::vector<double>& u, const std::vector<double>& q, double alpha) {
  double uu = 0.0, dd = 0.0;
  for (std::size_t c = 0; c < u.size(); ++c) {
    uu += u[c] * u[c];
    dd += (u[c] - q[c]) * (u[c] - q[c]);
  }
  return -uu * std::pow(dd, -alpha / 2.0);
}

inline std::vector<double> oracle_gradW(const std::vector<double>& u, const std::vector<double>& q,
                                        double alpha) {
  double uu = 0.0, dd = 0.0;
  for (std::size_t c = 0; c < u.size(); ++c) {
    uu += u[c] * u[c];
    dd += (u[c] - q[c]) * (u[c] - q[c]);
  }
  std::vector<double> g(u.size());
  for (std::size_t c = 0; c < u.size(); ++c) {
    g[c] = -2.0 * u[c] * std::pow(dd, -alpha / 2.0) +
           alpha * uu * std::pow(dd, -alpha / 2.0 - 1.0) * (u[c] - q[c]);
  }
  return g;
}

// A single interior hat of height `height` at node j (component 0).
inline GridFunction hat(const Grid& g, int dim, int j, double height = 1.0) {
  GridFunction u(g, dim);
  u(j, 0) = height;
  return u;
}

}  // namespace testing_support
