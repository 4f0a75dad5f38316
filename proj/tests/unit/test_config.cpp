#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "homoclinic/config.hpp"
#include "homoclinic/errors.hpp"

using namespace homoclinic;

namespace {

std::string error_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("empty config resolves to the documented defaults") {
  const RunConfig c = parse_config("{}");
  CHECK(c.potential.dimension == 2);
  CHECK(c.potential.q == std::vector<double>{2.0, 0.0});
  CHECK(c.potential.alpha == 2.0);
  CHECK(c.potential.a_base == 4.0);
  CHECK(c.potential.a_amp == 2.5);
  CHECK(c.grid.T == 1.0);
  CHECK(c.grid.m == 40);
  CHECK(c.grid.M == 8);
  CHECK(c.refine.fine_m == 80);
  CHECK(c.seed == 1);
  CHECK(c.search.targets == 3);
  CHECK(c.solver.grad_tol == 1e-6);
  CHECK(c.make_grid().size() == 641);
}

TEST_CASE("fields override defaults and the echo reparses to itself") {
  const std::string text = R"({
    "potential": {"dimension": 3, "q": [0, 2, 0], "alpha": 3, "a_base": 5, "a_amp": -1},
    "grid": {"T": 2.0, "m": 16, "M": 4},
    "solver": {"grad_tol": 1e-7, "precondition": false, "seed": 9},
    "search": {"targets": 5, "k0s": [1.3], "jobs": 2},
    "output": "runs/x"
  })";
  const RunConfig c = parse_config(text);
  CHECK(c.potential.dimension == 3);
  CHECK(c.potential.alpha == 3.0);
  CHECK(c.grid.T == 2.0);
  CHECK(c.make_potential().period() == 2.0);
  CHECK_FALSE(c.solver.precondition);
  CHECK(c.seed == 9);
  CHECK(c.solver_config().seed == 9);
  CHECK(c.search.k0s == std::vector<double>{1.3});
  CHECK(c.refine.fine_m == 32);
  CHECK(c.output == "runs/x");

  const auto echo = to_json(c);
  const RunConfig again = parse_config(echo.dump());
  CHECK(to_json(again) == echo);
}

TEST_CASE("errors name the line or the field") {
  CHECK(error_of("{\n  \"grid\": {\"m\": 40,,}\n}").find("line 2") != std::string::npos);
  CHECK(error_of(R"({"grid": {"m": "x"}})").find("'grid.m'") != std::string::npos);
  CHECK(error_of(R"({"grid": {"m": 4}})").find("'grid.m'") != std::string::npos);
  CHECK(error_of(R"({"gird": {}})").find("'gird': unknown field") != std::string::npos);
  CHECK(error_of(R"({"solver": {"tol": 1}})").find("'solver.tol'") != std::string::npos);
  CHECK(error_of(R"({"potential": {"q": [1, "a"]}})").find("'potential.q[1]'") !=
        std::string::npos);
  CHECK(error_of(R"({"potential": {"q": [1, 0, 0]}})").find("'potential.q'") !=
        std::string::npos);
  CHECK(error_of(R"({"potential": {"alpha": 5}})").find("'potential.alpha'") != std::string::npos);
  CHECK(error_of(R"({"seed": -3})").find("'seed'") != std::string::npos);
  CHECK(error_of(R"({"refine": {"fine_m": 40}})").find("'refine.fine_m'") != std::string::npos);
  CHECK(error_of(R"({"potential": {"period": 2}, "grid": {"T": 1}})").find("'grid.T'") !=
        std::string::npos);
  CHECK(error_of("[1, 2]").find("expected an object") != std::string::npos);
  CHECK_THROWS_AS(load_config("/nonexistent/config.json"), ConfigError);
}

TEST_CASE("hypothesis failures are not config errors") {
  // a(t) changing sign parses; the check command reports it.
  CHECK_NOTHROW(parse_config(R"({"potential": {"a_base": 1, "a_amp": 2}})"));
}
