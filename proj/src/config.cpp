#include "homoclinic/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "homoclinic/errors.hpp"

namespace homoclinic {

using nlohmann::json;

namespace {

std::string type_name(const json& j) { return j.type_name(); }

// Walks one JSON object, rejecting unknown keys and ill-typed values with the
// dotted path of the field.
class Reader {
 public:
  Reader(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) fail("", "expected an object, got " + type_name(obj_));
  }

  ~Reader() = default;

  void finish() const {
    for (const auto& [key, value] : obj_.items()) {
      if (!seen_.count(key)) fail(key, "unknown field");
    }
  }

  bool has(const std::string& key) const { return obj_.contains(key); }

  Reader child(const std::string& key) {
    seen_.insert(key);
    return Reader(obj_.at(key), field(key));
  }

  void number(const std::string& key, double& out) {
    if (!take(key)) return;
    const json& v = obj_.at(key);
    if (!v.is_number()) fail(key, "expected a number, got " + type_name(v));
    out = v.get<double>();
    if (!std::isfinite(out)) fail(key, "must be finite");
  }

  void integer(const std::string& key, int& out) {
    if (!take(key)) return;
    const json& v = obj_.at(key);
    if (!v.is_number_integer()) fail(key, "expected an integer, got " + type_name(v));
    const auto x = v.get<long long>();
    if (x < -2147483647LL || x > 2147483647LL) fail(key, "integer out of range");
    out = static_cast<int>(x);
  }

  void unsigned64(const std::string& key, std::uint64_t& out) {
    if (!take(key)) return;
    const json& v = obj_.at(key);
    if (!v.is_number_unsigned()) fail(key, "expected a non-negative integer, got " + type_name(v));
    out = v.get<std::uint64_t>();
  }

  void boolean(const std::string& key, bool& out) {
    if (!take(key)) return;
    const json& v = obj_.at(key);
    if (!v.is_boolean()) fail(key, "expected true or false, got " + type_name(v));
    out = v.get<bool>();
  }

  void string(const std::string& key, std::string& out) {
    if (!take(key)) return;
    const json& v = obj_.at(key);
    if (!v.is_string()) fail(key, "expected a string, got " + type_name(v));
    out = v.get<std::string>();
  }

  void numbers(const std::string& key, std::vector<double>& out) {
    if (!take(key)) return;
    const json& v = obj_.at(key);
    if (!v.is_array()) fail(key, "expected an array of numbers, got " + type_name(v));
    std::vector<double> r;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) {
        fail(key + "[" + std::to_string(i) + "]", "expected a number, got " + type_name(v[i]));
      }
      r.push_back(v[i].get<double>());
      if (!std::isfinite(r.back())) fail(key + "[" + std::to_string(i) + "]", "must be finite");
    }
    out = std::move(r);
  }

  void strings(const std::string& key, std::vector<std::string>& out) {
    if (!take(key)) return;
    const json& v = obj_.at(key);
    if (!v.is_array()) fail(key, "expected an array of strings, got " + type_name(v));
    std::vector<std::string> r;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_string()) {
        fail(key + "[" + std::to_string(i) + "]", "expected a string, got " + type_name(v[i]));
      }
      r.push_back(v[i].get<std::string>());
    }
    out = std::move(r);
  }

  [[noreturn]] void fail(const std::string& key, const std::string& msg) const {
    throw ConfigError("config field '" + field(key) + "': " + msg);
  }

 private:
  bool take(const std::string& key) {
    seen_.insert(key);
    return obj_.contains(key);
  }
  std::string field(const std::string& key) const {
    if (key.empty()) return path_.empty() ? "<root>" : path_;
    return path_.empty() ? key : path_ + "." + key;
  }

  const json& obj_;
  std::string path_;
  std::set<std::string> seen_;
};

void require(bool ok, const std::string& field, const std::string& msg) {
  if (!ok) throw ConfigError("config field '" + field + "': " + msg);
}

void validate(const RunConfig& c) {
  const PotentialBlock& p = c.potential;
  require(p.dimension >= 2, "potential.dimension", "must be at least 2");
  require(static_cast<int>(p.q.size()) == p.dimension, "potential.q",
          "needs exactly `dimension` components");
  double qn = 0.0;
  for (double x : p.q) qn += x * x;
  require(qn > 0.0, "potential.q", "must be nonzero");
  require(p.alpha >= 2.0 && p.alpha <= 4.0, "potential.alpha", "must lie in [2, 4]");

  require(c.grid.T > 0.0, "grid.T", "must be positive");
  require(c.grid.m >= 8, "grid.m", "must be at least 8");
  require(c.grid.M >= 2, "grid.M", "must be at least 2");

  const SolverConfig& s = c.solver;
  require(s.grad_tol >= 0.0, "solver.grad_tol", "must be non-negative");
  require(s.max_iters > 0, "solver.max_iters", "must be positive");
  require(s.armijo_c1 > 0.0 && s.armijo_c1 < 1.0, "solver.armijo_c1", "must lie in (0, 1)");
  require(s.backtrack > 0.0 && s.backtrack < 1.0, "solver.backtrack", "must lie in (0, 1)");
  require(s.max_backtracks > 0, "solver.max_backtracks", "must be positive");
  require(s.eps_k > 0.0, "solver.eps_k", "must be positive");
  require(s.renormalize_every >= 0, "solver.renormalize_every", "must be non-negative");
  require(s.bump_width > 0.0, "solver.bump_width", "must be positive");
  require(s.k0 >= 1.0 + s.eps_k, "solver.k0", "must be at least 1 + eps_k");
  require(s.loop_offset > 0.0, "solver.loop_offset", "must be positive");
  require(s.orientation == 1 || s.orientation == -1, "solver.orientation", "must be 1 or -1");
  require(s.max_restarts >= 0, "solver.max_restarts", "must be non-negative");
  require(s.zero_threshold > 0.0, "solver.zero_threshold", "must be positive");
  require(s.constraint_active_window > 0, "solver.constraint_active_window", "must be positive");

  const SearchConfig& q = c.search;
  require(q.targets >= 0, "search.targets", "must be non-negative");
  require(q.epsilon_distinct > 0.0, "search.epsilon_distinct", "must be positive");
  require(!q.k0s.empty(), "search.k0s", "must not be empty");
  for (double k : q.k0s) require(k >= 1.0 + s.eps_k, "search.k0s", "entries must be >= 1 + eps_k");
  require(q.phases >= 1, "search.phases", "must be at least 1");
  require(!q.width_factors.empty(), "search.width_factors", "must not be empty");
  for (double w : q.width_factors) require(w > 0.0, "search.width_factors", "entries must be positive");
  require(q.jobs >= 1, "search.jobs", "must be at least 1");

  require(c.refine.fine_m == 0 || c.refine.fine_m >= 8, "refine.fine_m", "must be at least 8");
  require(c.refine.fine_m != c.grid.m, "refine.fine_m", "must differ from grid.m");
  require(c.diagnose.windows >= 0, "diagnose.windows", "must be non-negative");
}

std::string locate(const std::string& text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

}  // namespace

Potential RunConfig::make_potential() const {
  CoefficientSpec coeff;
  coeff.a_base = potential.a_base;
  coeff.a_amp = potential.a_amp;
  coeff.period = grid.T;
  return Potential(coeff, SingularPotentialSpec::example_family(potential.dimension, potential.q,
                                                                 potential.alpha));
}

Grid RunConfig::make_grid() const { return Grid(grid.T, grid.m, grid.M); }

SolverConfig RunConfig::solver_config() const {
  SolverConfig s = solver;
  s.seed = seed;
  return s;
}

RunConfig parse_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("config is not valid JSON at " + locate(text, e.byte > 0 ? e.byte - 1 : 0));
  }

  RunConfig c;
  double period = 0.0;
  bool have_period = false;
  std::uint64_t solver_seed = 0;
  bool have_solver_seed = false;
  Reader root(doc, "");
  if (root.has("potential")) {
    Reader r = root.child("potential");
    r.integer("dimension", c.potential.dimension);
    r.numbers("q", c.potential.q);
    r.number("alpha", c.potential.alpha);
    r.number("a_base", c.potential.a_base);
    r.number("a_amp", c.potential.a_amp);
    // The period of a(t) is the grid period; either block may set it.
    if (r.has("period")) {
      r.number("period", period);
      have_period = true;
    }
    r.finish();
  }
  if (root.has("grid")) {
    Reader r = root.child("grid");
    r.number("T", c.grid.T);
    if (have_period && r.has("T") && c.grid.T != period) {
      r.fail("T", "disagrees with potential.period");
    }
    r.integer("m", c.grid.m);
    r.integer("M", c.grid.M);
    r.finish();
  }
  if (root.has("solver")) {
    Reader r = root.child("solver");
    SolverConfig& s = c.solver;
    r.number("grad_tol", s.grad_tol);
    r.integer("max_iters", s.max_iters);
    r.number("armijo_c1", s.armijo_c1);
    r.number("backtrack", s.backtrack);
    r.integer("max_backtracks", s.max_backtracks);
    r.number("eps_k", s.eps_k);
    r.integer("renormalize_every", s.renormalize_every);
    r.number("bump_width", s.bump_width);
    r.number("k0", s.k0);
    r.number("loop_offset", s.loop_offset);
    r.integer("orientation", s.orientation);
    r.number("phase", s.phase);
    r.boolean("precondition", s.precondition);
    r.integer("max_restarts", s.max_restarts);
    r.number("zero_threshold", s.zero_threshold);
    r.integer("constraint_active_window", s.constraint_active_window);
    if (r.has("seed")) {
      r.unsigned64("seed", solver_seed);
      have_solver_seed = true;
    }
    r.finish();
  }
  if (root.has("search")) {
    Reader r = root.child("search");
    SearchConfig& s = c.search;
    r.integer("targets", s.targets);
    r.number("epsilon_distinct", s.epsilon_distinct);
    r.numbers("k0s", s.k0s);
    r.integer("phases", s.phases);
    r.numbers("width_factors", s.width_factors);
    r.boolean("multibump", s.multibump);
    r.integer("jobs", s.jobs);
    r.finish();
  }
  if (root.has("refine")) {
    Reader r = root.child("refine");
    r.integer("fine_m", c.refine.fine_m);
    r.finish();
  }
  if (root.has("diagnose")) {
    Reader r = root.child("diagnose");
    r.strings("library", c.diagnose.library);
    r.integer("windows", c.diagnose.windows);
    r.finish();
  }
  root.string("output", c.output);
  if (root.has("seed") && have_solver_seed) {
    std::uint64_t top = 0;
    root.unsigned64("seed", top);
    if (top != solver_seed) root.fail("seed", "disagrees with solver.seed");
  }
  root.unsigned64("seed", c.seed);
  if (have_solver_seed) c.seed = solver_seed;
  root.finish();
  if (have_period) c.grid.T = period;

  if (c.refine.fine_m == 0) c.refine.fine_m = 2 * c.grid.m;
  validate(c);
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_config(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

nlohmann::ordered_json to_json(const RunConfig& c) {
  nlohmann::ordered_json j;
  j["potential"] = {{"dimension", c.potential.dimension},
                    {"q", c.potential.q},
                    {"alpha", c.potential.alpha},
                    {"a_base", c.potential.a_base},
                    {"a_amp", c.potential.a_amp},
                    {"period", c.grid.T}};
  j["grid"] = {{"T", c.grid.T}, {"m", c.grid.m}, {"M", c.grid.M}};
  const SolverConfig& s = c.solver;
  j["solver"] = {{"grad_tol", s.grad_tol},
                 {"max_iters", s.max_iters},
                 {"armijo_c1", s.armijo_c1},
                 {"backtrack", s.backtrack},
                 {"max_backtracks", s.max_backtracks},
                 {"eps_k", s.eps_k},
                 {"renormalize_every", s.renormalize_every},
                 {"bump_width", s.bump_width},
                 {"k0", s.k0},
                 {"loop_offset", s.loop_offset},
                 {"orientation", s.orientation},
                 {"phase", s.phase},
                 {"precondition", s.precondition},
                 {"max_restarts", s.max_restarts},
                 {"zero_threshold", s.zero_threshold},
                 {"constraint_active_window", s.constraint_active_window}};
  const SearchConfig& q = c.search;
  j["search"] = {{"targets", q.targets},
                 {"epsilon_distinct", q.epsilon_distinct},
                 {"k0s", q.k0s},
                 {"phases", q.phases},
                 {"width_factors", q.width_factors},
                 {"multibump", q.multibump},
                 {"jobs", q.jobs}};
  j["refine"] = {{"fine_m", c.refine.fine_m == 0 ? 2 * c.grid.m : c.refine.fine_m}};
  j["diagnose"] = {{"library", c.diagnose.library}, {"windows", c.diagnose.windows}};
  j["output"] = c.output;
  j["seed"] = c.seed;
  return j;
}

}  // namespace homoclinic
