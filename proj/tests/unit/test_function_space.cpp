#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "homoclinic/action.hpp"
#include "homoclinic/errors.hpp"
#include "support.hpp"

using namespace homoclinic;
using namespace testing_support;

namespace {

// Window quadrature written out directly: trapezoid for |u|^2, exact cell
// integrals of the piecewise-constant derivative.
std::pair<double, double> window_oracle(const GridFunction& u, int lo, int hi) {
  const double h = u.grid().h();
  double mass = 0.0, kin = 0.0;
  for (int i = lo; i <= hi; ++i) {
    double s = 0.0;
    for (int c = 0; c < u.dimension(); ++c) s += u(i, c) * u(i, c);
    mass += (i == lo || i == hi ? 0.5 : 1.0) * h * s;
  }
  for (int i = lo; i < hi; ++i) {
    for (int c = 0; c < u.dimension(); ++c) {
      const double d = (u(i + 1, c) - u(i, c)) / h;
      kin += h * d * d;
    }
  }
  return {mass, kin};
}

}  // namespace

TEST_CASE("grid geometry") {
  const Grid g = default_grid();
  CHECK(g.size() == 641);
  CHECK(g.zero_index() == 320);
  CHECK(g.time(g.zero_index()) == 0.0);
  CHECK(g.time(0) == -8.0);
  CHECK(g.time(g.size() - 1) == doctest::Approx(8.0).epsilon(1e-15));
  CHECK(g.h() * g.nodes_per_period() == doctest::Approx(1.0).epsilon(1e-15));
  for (int i = 0; i + 40 < g.size(); ++i) {
    CHECK(std::abs(g.time(i + 40) - g.time(i) - 1.0) <= 1e-12);
  }
  CHECK_THROWS_AS(Grid(1.0, 7, 8), PreconditionViolation);
  CHECK_THROWS_AS(Grid(1.0, 40, 1), PreconditionViolation);
}

TEST_CASE("grid functions keep a zero, finite boundary") {
  const Grid g(1.0, 8, 2);
  std::vector<double> v(static_cast<std::size_t>(g.size()), 0.0);
  v[3] = 1.0;
  CHECK_NOTHROW(GridFunction(g, 1, v));
  v[0] = 1.0;
  CHECK_THROWS_AS(GridFunction(g, 1, v), PreconditionViolation);
  v[0] = 0.0;
  v[4] = std::nan("");
  CHECK_THROWS_AS(GridFunction(g, 1, v), PreconditionViolation);
}

TEST_CASE("norms of zero and of a single hat") {
  const Grid g = default_grid();
  const GridFunction z(g, 2);
  CHECK(l2_norm(z) == 0.0);
  CHECK(h1_norm(z) == 0.0);
  CHECK(sup_norm(z) == 0.0);

  const GridFunction u = hat(g, 1, 100);
  const double h = g.h();
  CHECK(l2_norm(u) * l2_norm(u) == doctest::Approx(h).epsilon(1e-14));
  CHECK(kinetic_seminorm(u) * kinetic_seminorm(u) == doctest::Approx(2.0 / h).epsilon(1e-14));
  CHECK(h1_norm(u) * h1_norm(u) ==
        doctest::Approx(l2_norm(u) * l2_norm(u) + kinetic_seminorm(u) * kinetic_seminorm(u)));
  CHECK(sup_norm(u) == 1.0);
}

TEST_CASE("period shifts relabel nodes exactly") {
  const Grid g = default_grid();
  const GridFunction z(g, 2);
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const GridFunction u = random_smooth_trajectory(g, 2, 1.0, seed);
    CHECK(shift_periods(u, 0).values() == u.values());
    for (int k = -3; k <= 3; ++k) {
      const GridFunction v = shift_periods(u, k);
      CHECK(shift_periods(v, -k).values() == u.values());
      CHECK(std::abs(h1_norm(v) - h1_norm(u)) <= 1e-12 * h1_norm(u));
      CHECK(std::abs(l2_norm(v) - l2_norm(u)) <= 1e-12 * l2_norm(u));
      CHECK(sup_norm(v) == sup_norm(u));
    }
  }
  CHECK_THROWS_AS(shift_periods(z, 17), ShiftOutOfRange);
  CHECK_THROWS_AS(shift_periods(z, -17), ShiftOutOfRange);
  CHECK_NOTHROW(shift_periods(z, 16));
}

TEST_CASE("sup norm is dominated by the H1 norm") {
  for (int m : {8, 40, 160}) {
    const Grid g(1.0, m, 4);
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
      const GridFunction u = random_smooth_trajectory(g, 3, 2.0, seed);
      CHECK(sup_norm(u) <= h1_norm(u) * (1.0 + 1e-10));
    }
    CHECK(sup_norm(hat(g, 1, 3)) <= h1_norm(hat(g, 1, 3)));
  }
}

TEST_CASE("translation renormalization") {
  const Grid g = default_grid();
  SUBCASE("already normalized") {
    GridFunction u = hat(g, 2, g.zero_index() + 5);
    const Renormalized r = renormalize_translation(u);
    CHECK(r.shift == 0);
    CHECK(r.function.values() == u.values());
  }
  SUBCASE("peak in [5T, 6T)") {
    GridFunction u = hat(g, 2, g.zero_index() + 5 * 40 + 7);
    const Renormalized r = renormalize_translation(u);
    CHECK(r.shift == 5);
    CHECK(r.function(g.zero_index() + 7, 0) == 1.0);
    CHECK(renormalize_translation(r.function).shift == 0);
  }
  SUBCASE("negative times floor toward -inf") {
    GridFunction u = hat(g, 2, g.zero_index() - 1);
    const Renormalized r = renormalize_translation(u);
    CHECK(r.shift == -1);
    CHECK(r.function(g.zero_index() + 39, 0) == 1.0);
  }
  SUBCASE("earliest maximum wins") {
    GridFunction u(g, 2);
    u(g.zero_index() - 80 + 3, 1) = 2.0;
    u(g.zero_index() + 120 + 3, 1) = 2.0;
    CHECK(renormalize_translation(u).shift == -2);
  }
  SUBCASE("idempotent on random functions") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      const GridFunction u = random_smooth_trajectory(g, 2, 1.0, seed);
      const Renormalized r = renormalize_translation(u);
      CHECK(renormalize_translation(r.function).shift == 0);
    }
  }
  CHECK_THROWS_AS(renormalize_translation(GridFunction(g, 2)), ZeroFunction);
}

TEST_CASE("pointwise Sobolev bound") {
  const Grid g = default_grid();
  const GridFunction z(g, 2);
  const SobolevReport r0 = sobolev_bound_check(z, 0.3);
  CHECK(r0.lhs == 0.0);
  CHECK(r0.rhs == 0.0);
  CHECK(r0.passed);

  SUBCASE("hat at s") {
    const int j = g.zero_index() + 13;
    const SobolevReport r = sobolev_bound_check(hat(g, 1, j), g.time(j));
    // Forward window: trapezoid mass h/2 at s, derivative 1/h on one cell.
    const double h = g.h();
    CHECK(r.lhs == 1.0);
    CHECK(r.rhs == doctest::Approx(std::sqrt(h / 2.0) + std::sqrt(1.0 / h)).epsilon(1e-14));
    CHECK(r.rhs >= 1.0);
  }

  SUBCASE("random functions against the windowed quadrature oracle") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> where(-7.0, 7.0);
    const int cells = 40;
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
      const GridFunction u = random_smooth_trajectory(g, 2, 1.0 + seed % 5, seed);
      const double s = where(rng);
      const int is = g.nearest_index(s);
      const int lo = g.time(is) >= 0.0 ? is : is - cells;
      const auto [mass, kin] = window_oracle(u, lo, lo + cells);
      const SobolevReport r = sobolev_bound_check(u, s);
      CHECK(r.rhs == doctest::Approx(std::sqrt(mass) + std::sqrt(kin)).epsilon(1e-12));
      CHECK(r.lhs == doctest::Approx(u.norm_at(is)).epsilon(1e-15));
      CHECK(r.passed);
      CHECK(r.lhs <= r.rhs + 1e-8);
    }
  }
  CHECK_THROWS_AS(sobolev_bound_check(z, 7.5), WindowOutOfDomain);
  CHECK_THROWS_AS(sobolev_bound_check(z, -7.5), WindowOutOfDomain);
  CHECK_THROWS_AS(sobolev_bound_check(z, 9.0), WindowOutOfDomain);
}

TEST_CASE("trajectory CSV round trip and grid mismatch") {
  const Grid g(1.0, 8, 2);
  const GridFunction u = random_smooth_trajectory(g, 2, 1.5, 4);
  const auto dir = std::filesystem::temp_directory_path() / "homoclinic_fs_test";
  std::filesystem::create_directories(dir);
  write_trajectory_csv(u, dir / "u.csv");
  {
    std::ifstream in(dir / "u.csv");
    std::string header;
    std::getline(in, header);
    CHECK(header == "t,u1,u2");
  }
  const GridFunction v = read_trajectory_csv(dir / "u.csv", g);
  CHECK(v.values() == u.values());
  CHECK_THROWS_AS(read_trajectory_csv(dir / "u.csv", Grid(1.0, 8, 3)), ConfigError);
  CHECK_THROWS_AS(read_trajectory_csv(dir / "u.csv", Grid(1.0, 16, 2)), ConfigError);
  CHECK_THROWS_AS(read_trajectory_csv(dir / "missing.csv", g), ConfigError);
  {
    std::ofstream bad(dir / "bad.csv");
    bad << "t,u1,u2\n-2,0,0\n-1.875,abc,0\n";
  }
  CHECK_THROWS_AS(read_trajectory_csv(dir / "bad.csv", g), ConfigError);
  std::filesystem::remove_all(dir);
}
