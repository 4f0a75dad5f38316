#include "homoclinic/function_space.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>

#include "homoclinic/errors.hpp"

namespace homoclinic {

Grid::Grid(double period, int nodes_per_period, int half_periods)
    : period_(period), m_(nodes_per_period), M_(half_periods) {
  if (!(period > 0.0)) throw PreconditionViolation("grid period must be positive");
  if (m_ < 8) throw PreconditionViolation("grid needs at least 8 nodes per period");
  if (M_ < 2) throw PreconditionViolation("grid needs at least 2 half periods");
}

int Grid::nearest_index(double t) const {
  const long i = std::lround((t + half_length()) / h());
  return static_cast<int>(std::clamp<long>(i, 0, size() - 1));
}

GridFunction::GridFunction(Grid grid, int dimension)
    : grid_(grid), dim_(dimension),
      values_(static_cast<std::size_t>(grid.size()) * dimension, 0.0) {
  if (dimension < 1) throw PreconditionViolation("dimension must be positive");
}

GridFunction::GridFunction(Grid grid, int dimension, std::vector<double> values)
    : grid_(grid), dim_(dimension), values_(std::move(values)) {
  if (dimension < 1) throw PreconditionViolation("dimension must be positive");
  if (values_.size() != static_cast<std::size_t>(grid_.size()) * dim_) {
    throw PreconditionViolation("value count does not match grid size times dimension");
  }
  for (double x : values_) {
    if (!std::isfinite(x)) throw PreconditionViolation("grid function has non-finite values");
  }
  for (int c = 0; c < dim_; ++c) {
    if ((*this)(0, c) != 0.0 || (*this)(size() - 1, c) != 0.0) {
      throw PreconditionViolation("grid function must vanish at both boundary nodes");
    }
  }
}

double GridFunction::norm_at(int i) const {
  double s = 0.0;
  for (double x : point(i)) s += x * x;
  return std::sqrt(s);
}

GridFunction& GridFunction::operator+=(const GridFunction& other) {
  if (!(grid_ == other.grid_) || dim_ != other.dim_) {
    throw PreconditionViolation("grid functions live on different grids");
  }
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
  return *this;
}

GridFunction& GridFunction::operator-=(const GridFunction& other) {
  if (!(grid_ == other.grid_) || dim_ != other.dim_) {
    throw PreconditionViolation("grid functions live on different grids");
  }
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
  return *this;
}

namespace {

double point_sq(const GridFunction& u, int i) {
  double s = 0.0;
  for (double x : u.point(i)) s += x * x;
  return s;
}

double diff_sq(const GridFunction& u, int i) {
  double s = 0.0;
  for (int c = 0; c < u.dimension(); ++c) {
    const double d = u(i + 1, c) - u(i, c);
    s += d * d;
  }
  return s;
}

// Trapezoid integral of |u|^2 over nodes [lo, hi].
double trapezoid_sq(const GridFunction& u, int lo, int hi) {
  if (hi <= lo) return 0.0;
  double s = 0.5 * (point_sq(u, lo) + point_sq(u, hi));
  for (int i = lo + 1; i < hi; ++i) s += point_sq(u, i);
  return s * u.grid().h();
}

// Integral of |u'|^2 over the cells between nodes lo and hi.
double kinetic_sq(const GridFunction& u, int lo, int hi) {
  double s = 0.0;
  for (int i = lo; i < hi; ++i) s += diff_sq(u, i);
  return s / u.grid().h();
}

}  // namespace

double l2_norm(const GridFunction& u) { return std::sqrt(trapezoid_sq(u, 0, u.size() - 1)); }

double kinetic_seminorm(const GridFunction& u) {
  return std::sqrt(kinetic_sq(u, 0, u.size() - 1));
}

double h1_norm(const GridFunction& u) {
  return std::sqrt(trapezoid_sq(u, 0, u.size() - 1) + kinetic_sq(u, 0, u.size() - 1));
}

double sup_norm(const GridFunction& u) {
  double s = 0.0;
  for (int i = 0; i < u.size(); ++i) s = std::max(s, point_sq(u, i));
  return std::sqrt(s);
}

GridFunction shift_periods(const GridFunction& u, int k) {
  const int n = u.size();
  const long offset = static_cast<long>(k) * u.grid().nodes_per_period();
  if (std::abs(offset) >= n) {
    throw ShiftOutOfRange("period shift moves every node off the grid");
  }
  GridFunction out(u.grid(), u.dimension());
  const int d = u.dimension();
  for (int i = 1; i < n - 1; ++i) {
    const long src = i - offset;
    if (src <= 0 || src >= n - 1) continue;
    std::copy_n(u.point(static_cast<int>(src)).begin(), d, out.point(i).begin());
  }
  return out;
}

Renormalized renormalize_translation(const GridFunction& u) {
  int arg = -1;
  double best = 0.0;
  for (int i = 0; i < u.size(); ++i) {
    const double s = point_sq(u, i);
    if (s > best) {
      best = s;
      arg = i;
    }
  }
  if (arg < 0) throw ZeroFunction("cannot renormalize the zero function");
  const int m = u.grid().nodes_per_period();
  const int rel = arg - u.grid().zero_index();
  // floor division: the period [lT, (l+1)T) containing the maximizer
  const int l = rel >= 0 ? rel / m : -((-rel + m - 1) / m);
  if (l == 0) return {u, 0};
  return {shift_periods(u, -l), l};
}

SobolevReport sobolev_bound_check(const GridFunction& u, double s) {
  const Grid& g = u.grid();
  const int is = g.nearest_index(s);
  if (std::abs(g.time(is) - s) > 0.5 * g.h() + 1e-12 * (1.0 + std::abs(s))) {
    throw WindowOutOfDomain("window center lies outside the grid");
  }
  const int cells = std::max(1, static_cast<int>(std::lround(1.0 / g.h())));
  const bool forward = g.time(is) >= 0.0;
  const int lo = forward ? is : is - cells;
  const int hi = forward ? is + cells : is;
  if (lo < 0 || hi > u.size() - 1) {
    throw WindowOutOfDomain("unit window around s leaves [-L, L]");
  }
  SobolevReport rep;
  rep.lhs = u.norm_at(is);
  rep.rhs = std::sqrt(trapezoid_sq(u, lo, hi)) + std::sqrt(kinetic_sq(u, lo, hi));
  rep.passed = rep.lhs <= rep.rhs + 1e-8;
  return rep;
}

void write_trajectory_csv(const GridFunction& u, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open " + path.string() + " for writing");
  out << "t";
  for (int c = 0; c < u.dimension(); ++c) out << ",u" << (c + 1);
  out << '\n' << std::setprecision(17);
  for (int i = 0; i < u.size(); ++i) {
    out << u.grid().time(i);
    for (int c = 0; c < u.dimension(); ++c) out << ',' << u(i, c);
    out << '\n';
  }
  if (!out) throw ConfigError("failed writing " + path.string());
}

GridFunction read_trajectory_csv(const std::filesystem::path& path, const Grid& grid) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open trajectory " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw ConfigError(path.string() + ": empty trajectory file");

  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  if (header.size() < 2 || header[0] != "t") {
    throw ConfigError(path.string() + ":1: header must be t,u1,...,ud");
  }
  const int d = static_cast<int>(header.size()) - 1;
  for (int c = 0; c < d; ++c) {
    if (header[c + 1] != "u" + std::to_string(c + 1)) {
      throw ConfigError(path.string() + ":1: unexpected column '" + header[c + 1] + "'");
    }
  }

  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(grid.size()) * d);
  int row = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const int lineno = row + 2;
    if (row >= grid.size()) {
      throw ConfigError(path.string() + ":" + std::to_string(lineno) +
                        ": more rows than grid nodes");
    }
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> cells;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        cells.push_back(std::stod(cell, &used));
        if (used != cell.size()) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": bad number '" +
                          cell + "'");
      }
    }
    if (static_cast<int>(cells.size()) != d + 1) {
      throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": expected " +
                        std::to_string(d + 1) + " columns");
    }
    const double t = grid.time(row);
    if (std::abs(cells[0] - t) > 1e-9 * (1.0 + std::abs(t))) {
      throw ConfigError(path.string() + ":" + std::to_string(lineno) +
                        ": node time does not match the configured grid");
    }
    values.insert(values.end(), cells.begin() + 1, cells.end());
    ++row;
  }
  if (row != grid.size()) {
    throw ConfigError(path.string() + ": " + std::to_string(row) + " rows, grid has " +
                      std::to_string(grid.size()) + " nodes");
  }
  try {
    return GridFunction(grid, d, std::move(values));
  } catch (const PreconditionViolation& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

}  // namespace homoclinic
