#include <doctest.h>

#include <random>

#include "homoclinic/errors.hpp"
#include "support.hpp"

using namespace homoclinic;
using namespace testing_support;

TEST_CASE("a(t) closed-form values and exact periodicity") {
  CoefficientSpec c{2.0, 1.0, 1.0};
  CHECK(eval_a(c, 0.0) == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(eval_a(c, 0.25) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(eval_a(c, 7.25) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(c.a0() == 1.0);
  CHECK(c.a_inf() == 3.0);

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> t(-50.0, 50.0);
  for (int i = 0; i < 1000; ++i) {
    const double s = t(rng);
    const double x = eval_a(c, s);
    const double y = eval_a(c, s + c.period);
    CHECK(std::abs(x - y) <= 1e-12 * std::abs(x));
    CHECK(x >= c.a0() - 1e-15);
    CHECK(x <= c.a_inf() + 1e-15);
  }
}

TEST_CASE("W of the example family at hand-evaluated points") {
  const auto s2 = SingularPotentialSpec::example_family(2, {2.0, 0.0}, 2.0);
  const auto s3 = SingularPotentialSpec::example_family(2, {2.0, 0.0}, 3.0);
  const std::vector<double> zero{0.0, 0.0};
  CHECK(eval_W(s2, zero) == 0.0);
  CHECK(eval_W(s2, std::vector<double>{-2.0, 0.0}) == doctest::Approx(-0.25).epsilon(1e-15));
  CHECK(eval_W(s3, std::vector<double>{1.0, 0.0}) == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK_THROWS_AS(eval_W(s2, std::vector<double>{2.0, 0.0}), SingularityHit);
  CHECK_THROWS_AS(eval_W(s2, std::vector<double>{2.0 + 1e-12, 0.0}), SingularityHit);
  CHECK_THROWS_AS(SingularPotentialSpec::example_family(2, {2.0, 0.0}, 1.5), PreconditionViolation);
}

TEST_CASE("W is negative away from 0 and q") {
  for (double alpha : {2.0, 3.0, 4.0}) {
    const auto s = SingularPotentialSpec::example_family(3, {0.0, 2.0, 0.0}, alpha);
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> x(-10.0, 10.0);
    for (int i = 0; i < 2000; ++i) {
      std::vector<double> u{x(rng), x(rng), x(rng)};
      CHECK(eval_W(s, u) < 0.0);
    }
    CHECK_NOTHROW(check_negativity(s, 8.0));
  }
}

TEST_CASE("gradW: zero at origin, closed form, and central differences") {
  for (double alpha : {2.0, 3.0, 4.0}) {
    const std::vector<double> q{2.0, 0.0};
    const auto s = SingularPotentialSpec::example_family(2, q, alpha);
    const auto g0 = eval_gradW(s, std::vector<double>{0.0, 0.0});
    CHECK(g0[0] == 0.0);
    CHECK(g0[1] == 0.0);

    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> x(-4.0, 4.0);
    int tested = 0;
    while (tested < 100) {
      std::vector<double> u{x(rng), x(rng)};
      const double dq = std::hypot(u[0] - q[0], u[1] - q[1]);
      if (dq < 0.2) continue;
      ++tested;
      const auto g = eval_gradW(s, u);
      const auto ref = oracle_gradW(u, q, alpha);
      const double un = std::hypot(u[0], u[1]);
      const double step = 1e-5 * (1.0 + un);
      const double gn = std::hypot(ref[0], ref[1]);
      for (int c = 0; c < 2; ++c) {
        CHECK(std::abs(g[c] - ref[c]) <= 1e-12 * (1.0 + gn));
        auto up = u, dn = u;
        up[c] += step;
        dn[c] -= step;
        const double fd = (oracle_W(up, q, alpha) - oracle_W(dn, q, alpha)) / (2.0 * step);
        CHECK(std::abs(fd - g[c]) <= 1e-6 * std::max(gn, 1e-3));
      }
    }
  }
}

TEST_CASE("W decreases along the segment from 0 toward q") {
  const std::vector<double> q{2.0, 0.0};
  const auto s = SingularPotentialSpec::example_family(2, q, 2.0);
  for (int i = 1; i < 100; ++i) {
    const double t = i / 100.0;
    const auto g = eval_gradW(s, std::vector<double>{t * q[0], t * q[1]});
    CHECK(g[0] * q[0] + g[1] * q[1] < 0.0);
  }
}

TEST_CASE("check_H2 recovers the closed-form Hessian -2|q|^-alpha") {
  SUBCASE("d = 3, alpha = 2") {
    const auto r = check_H2(SingularPotentialSpec::example_family(3, {2.0, 0.0, 0.0}, 2.0));
    CHECK(std::abs(r.eigen_max + 0.5) <= 1e-4);
    CHECK(std::abs(r.eigen_min + 0.5) <= 1e-4);
  }
  for (double alpha : {2.0, 3.0, 4.0}) {
    const auto r = check_H2(SingularPotentialSpec::example_family(2, {2.0, 0.0}, alpha));
    const double expected = -2.0 * std::pow(2.0, -alpha);
    CHECK(std::abs(r.eigen_min - expected) <= 1e-4);
    CHECK(std::abs(r.eigen_max - expected) <= 1e-4);
    CHECK(r.alpha0 == doctest::Approx(-r.eigen_min));
    CHECK(r.alpha1 == doctest::Approx(-r.eigen_max));
  }
  SUBCASE("a positive-definite W near 0 is rejected") {
    auto bowl = SingularPotentialSpec::custom(
        2, {2.0, 0.0}, [](std::span<const double> u) { return u[0] * u[0] + u[1] * u[1]; },
        [](std::span<const double> u, std::span<double> g) {
          g[0] = 2.0 * u[0];
          g[1] = 2.0 * u[1];
        });
    CHECK_THROWS_AS(check_H2(bowl), HypothesisViolation);
  }
}

TEST_CASE("check_H3: log witness passes for alpha = 2, fails for a weak singularity") {
  const auto s = SingularPotentialSpec::example_family(2, {2.0, 0.0}, 2.0);
  const auto w = StrongForceWitness::defaults(s, 1.0, 0.1);
  const H3Report r = check_H3(s, w);
  CHECK(r.min_margin > 0.0);
  CHECK(r.samples > 0);

  const std::vector<double> q{2.0, 0.0};
  auto weak = SingularPotentialSpec::custom(
      2, q,
      [q](std::span<const double> u) { return -1.0 / std::hypot(u[0] - q[0], u[1] - q[1]); },
      [q](std::span<const double> u, std::span<double> g) {
        const double d = std::hypot(u[0] - q[0], u[1] - q[1]);
        g[0] = (u[0] - q[0]) / (d * d * d);
        g[1] = (u[1] - q[1]) / (d * d * d);
      });
  CHECK_THROWS_AS(check_H3(weak, StrongForceWitness::defaults(weak, 1.0, 0.1)),
                  HypothesisViolation);

  auto empty = w;
  empty.radius = 0.0;
  CHECK_THROWS_AS(check_H3(s, empty), PreconditionViolation);
}

TEST_CASE("check_H4 growth witness holds across the family") {
  for (double alpha : {2.0, 3.0, 4.0}) {
    const auto s = SingularPotentialSpec::example_family(2, {2.0, 0.0}, alpha);
    CHECK(check_H4(s, StrongForceWitness::defaults(s)).min_margin >= 0.0);
  }
}

TEST_CASE("check_A extremes and sign change") {
  const AReport r = check_A(CoefficientSpec{2.0, 1.0, 1.0});
  CHECK(r.min_a == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(r.max_a == doctest::Approx(3.0).epsilon(1e-4));
  const AReport flat = check_A(CoefficientSpec{2.0, 0.0, 1.0});
  CHECK(flat.min_a == 2.0);
  CHECK(flat.max_a == 2.0);
  CHECK_THROWS_AS(check_A(CoefficientSpec{1.0, 2.0, 1.0}), HypothesisViolation);
}
