#include "homoclinic/commands.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <random>
#include <sstream>

#include "homoclinic/action.hpp"
#include "homoclinic/errors.hpp"

namespace homoclinic {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

class Stopwatch {
 public:
  double lap() {
    const auto now = std::chrono::steady_clock::now();
    const double s = std::chrono::duration<double>(now - last_).count();
    last_ = now;
    return s;
  }

 private:
  std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

void write_json(const ojson& j, const fs::path& path) {
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot write " + path.string());
  f << j.dump(2) << '\n';
}

fs::path prepare_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory " + dir.string() + ": " + ec.message());
  return dir;
}

ojson residual_json(const ResidualReport& r) {
  return {{"sup_residual", r.sup_residual},
          {"consistency_residual", r.consistency_residual},
          {"tail_sup_u", r.tail_sup_u},
          {"tail_sup_du", r.tail_sup_du}};
}

ojson candidate_json(const HomoclinicCandidate& c) {
  ojson j;
  j["action"] = c.action;
  j["grad_norm"] = c.grad_norm;
  j["residual"] = residual_json(c.residual);
  j["clearance"] = c.clearance;
  if (c.crossing) {
    j["crossing"] = {{"node", c.crossing->node}, {"k", c.crossing->k}};
  } else {
    j["crossing"] = nullptr;
  }
  j["iterations"] = c.iterations;
  j["e_value"] = c.e_value ? ojson(*c.e_value) : ojson(nullptr);
  j["e_k"] = c.e_k ? ojson(*c.e_k) : ojson(nullptr);
  j["constraint_active"] = c.constraint_active;
  j["normalized"] = c.normalized;
  int applied = 0;
  for (const auto& r : c.renormalizations) applied += r.applied ? 1 : 0;
  j["renormalizations"] = {{"attempted", c.renormalizations.size()}, {"applied", applied}};
  return j;
}

ojson checks_json(const std::vector<CheckRow>& rows) {
  ojson j = ojson::array();
  for (const CheckRow& r : rows) {
    j.push_back({{"name", r.name}, {"passed", r.passed}, {"margin", r.margin}, {"detail", r.detail}});
  }
  return j;
}

bool all_passed(const std::vector<CheckRow>& rows) {
  for (const CheckRow& r : rows) {
    if (!r.passed) return false;
  }
  return true;
}

void print_checks(const std::vector<CheckRow>& rows, std::ostream& out) {
  out << std::left << std::setw(12) << "hypothesis" << std::setw(8) << "status" << std::setw(16)
      << "margin" << "detail\n";
  for (const CheckRow& r : rows) {
    out << std::left << std::setw(12) << r.name << std::setw(8) << (r.passed ? "PASS" : "FAIL")
        << std::setw(16) << std::setprecision(6) << r.margin << r.detail << '\n';
  }
}

void print_candidate(const HomoclinicCandidate& c, std::ostream& out) {
  out << std::setprecision(10) << "action " << c.action << "\ngrad_norm " << c.grad_norm
      << "\nclearance " << c.clearance << "\ntail_sup_u " << c.residual.tail_sup_u
      << "\ntail_sup_du " << c.residual.tail_sup_du << '\n';
}

// Candidate invariants a solve has to meet before it counts as found.
std::string candidate_problem(const HomoclinicCandidate& c, const Potential& pot,
                              const SolverConfig& s) {
  if (!(c.grad_norm <= s.grad_tol)) return "gradient norm above tolerance";
  if (!(c.action > 0.0)) return "non-positive action";
  if (c.clearance < default_clearance(pot)) return "singularity clearance violated";
  return "";
}

// Runs `body` and maps library errors onto exit codes.
template <class F>
int guarded(std::ostream& out, F&& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    out << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const fs::filesystem_error& e) {
    out << "io error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const HypothesisViolation& e) {
    out << "hypothesis violated: " << e.what() << " (margin " << e.margin() << ")\n";
    return kExitHypothesis;
  } catch (const Error& e) {
    out << "no solution: " << e.what() << '\n';
    return kExitNoSolution;
  }
}

}  // namespace

std::vector<CheckRow> run_checks(const RunConfig& cfg) {
  std::vector<CheckRow> rows;
  auto attempt = [&](const std::string& name, auto&& fn) {
    try {
      rows.push_back(fn());
      rows.back().name = name;
    } catch (const HypothesisViolation& e) {
      rows.push_back({name, false, e.margin(), e.what()});
    } catch (const Error& e) {
      rows.push_back({name, false, std::nan(""), e.what()});
    }
  };

  CoefficientSpec coeff;
  coeff.a_base = cfg.potential.a_base;
  coeff.a_amp = cfg.potential.a_amp;
  coeff.period = cfg.grid.T;
  const SingularPotentialSpec spec = SingularPotentialSpec::example_family(
      cfg.potential.dimension, cfg.potential.q, cfg.potential.alpha);
  double qn = 0.0;
  for (double x : spec.q) qn += x * x;
  qn = std::sqrt(qn);

  attempt("A", [&] {
    const AReport r = check_A(coeff);
    std::ostringstream os;
    os << "a in [" << r.min_a << ", " << r.max_a << "]";
    return CheckRow{"", true, r.min_a, os.str()};
  });
  attempt("H1", [&] {
    const SignReport r = check_negativity(spec, 4.0 * qn);
    std::ostringstream os;
    os << "max W " << r.max_W << " over " << r.samples << " samples";
    return CheckRow{"", true, -r.max_W, os.str()};
  });
  attempt("H2", [&] {
    const H2Report r = check_H2(spec);
    std::ostringstream os;
    os << "Hessian eigenvalues in [" << r.eigen_min << ", " << r.eigen_max << "]";
    return CheckRow{"", true, -r.eigen_max, os.str()};
  });
  const StrongForceWitness witness = StrongForceWitness::defaults(spec);
  attempt("H3", [&] {
    const H3Report r = check_H3(spec, witness);
    std::ostringstream os;
    os << "-W - |grad U|^2 >= margin within r = " << witness.radius << " (" << r.samples
       << " samples)";
    return CheckRow{"", true, r.min_margin, os.str()};
  });
  attempt("H4", [&] {
    const H4Report r = check_H4(spec, witness);
    std::ostringstream os;
    os << "-W - |grad U_inf|^2 >= margin beyond R0 = " << witness.R0 << " (" << r.samples
       << " samples)";
    return CheckRow{"", true, r.min_margin, os.str()};
  });
  return rows;
}

int cmd_check(const RunConfig& cfg, std::ostream& out) {
  return guarded(out, [&] {
    const auto rows = run_checks(cfg);
    print_checks(rows, out);
    return all_passed(rows) ? kExitOk : kExitHypothesis;
  });
}

int cmd_solve(const RunConfig& cfg, const fs::path& out_dir, std::ostream& out) {
  return guarded(out, [&] {
    Stopwatch clock;
    ojson timing;
    const auto rows = run_checks(cfg);
    timing["hypotheses"] = clock.lap();
    if (!all_passed(rows)) {
      print_checks(rows, out);
      return kExitHypothesis;
    }

    const Potential pot = cfg.make_potential();
    const Grid grid = cfg.make_grid();
    const SolverConfig s = cfg.solver_config();
    prepare_dir(out_dir);

    ojson report;
    report["command"] = "solve";
    report["config"] = to_json(cfg);
    report["hypotheses"] = checks_json(rows);
    int code = kExitOk;
    try {
      const HomoclinicCandidate c = solve_homoclinic(pot, grid, s);
      timing["solve"] = clock.lap();
      report["candidate"] = candidate_json(c);
      const std::string problem = candidate_problem(c, pot, s);
      if (!problem.empty()) {
        report["status"] = "rejected: " + problem;
        code = kExitNoSolution;
      } else {
        report["status"] = "found";
      }
      write_trajectory_csv(c.trajectory, out_dir / "solution.csv");
      std::ofstream hist(out_dir / "action_history.csv");
      hist << "iteration,action\n" << std::setprecision(17);
      for (std::size_t i = 0; i < c.action_history.size(); ++i) {
        hist << i << ',' << c.action_history[i] << '\n';
      }
      out << "status " << report["status"].get<std::string>() << '\n';
      print_candidate(c, out);
    } catch (const HypothesisViolation&) {
      throw;
    } catch (const Error& e) {
      timing["solve"] = clock.lap();
      report["status"] = std::string("no solution: ") + e.what();
      out << "no solution: " << e.what() << '\n';
      code = kExitNoSolution;
    }
    report["timing"] = timing;
    write_json(report, out_dir / "report.json");
    return code;
  });
}

int cmd_search(const RunConfig& cfg, const fs::path& out_dir, std::ostream& out) {
  return guarded(out, [&] {
    Stopwatch clock;
    const Potential pot = cfg.make_potential();
    const Grid grid = cfg.make_grid();
    prepare_dir(out_dir);

    const SearchResult r = search_distinct(pot, grid, cfg.solver_config(), cfg.search);
    const double elapsed = clock.lap();

    ojson manifest = ojson::array();
    for (const LibraryEntry& e : r.library.entries()) {
      const std::string name = "entry_" + std::to_string(e.id) + ".csv";
      write_trajectory_csv(e.candidate.trajectory, out_dir / name);
      manifest.push_back({{"id", e.id},
                          {"action", e.candidate.action},
                          {"grad_norm", e.candidate.grad_norm},
                          {"clearance", e.candidate.clearance},
                          {"trajectory_csv_path", name},
                          {"seed", e.seed},
                          {"schedule_item", e.schedule_item}});
    }
    write_json(manifest, out_dir / "manifest.json");

    ojson report;
    report["command"] = "search";
    report["config"] = to_json(cfg);
    report["entries"] = r.library.size();
    const double min_dist = r.library.min_pairwise_distance();
    report["min_pairwise_distance"] = std::isfinite(min_dist) ? ojson(min_dist) : ojson(nullptr);
    ojson log = ojson::array();
    for (const ScheduleRecord& rec : r.log) {
      log.push_back({{"item", rec.item},
                     {"seed", rec.seed},
                     {"outcome", rec.outcome},
                     {"detail", rec.detail},
                     {"action", rec.action ? ojson(*rec.action) : ojson(nullptr)}});
    }
    report["log"] = log;
    report["timing"] = {{"search", elapsed}};
    write_json(report, out_dir / "report.json");

    std::ofstream dist(out_dir / "distances.csv");
    const auto matrix = r.library.distance_matrix();
    dist << "id";
    for (std::size_t j = 0; j < matrix.size(); ++j) dist << ',' << j;
    dist << '\n' << std::setprecision(17);
    for (std::size_t i = 0; i < matrix.size(); ++i) {
      dist << i;
      for (double x : matrix[i]) dist << ',' << x;
      dist << '\n';
    }

    out << "found " << r.library.size() << " of " << cfg.search.targets << " targets\n";
    for (const LibraryEntry& e : r.library.entries()) {
      out << std::setprecision(10) << "entry " << e.id << " action " << e.candidate.action
          << " grad_norm " << e.candidate.grad_norm << " (" << e.schedule_item << ")\n";
    }
    if (r.library.size() >= 2) out << "min pairwise distance " << min_dist << '\n';
    return static_cast<int>(r.library.size()) >= cfg.search.targets ? kExitOk : kExitNoSolution;
  });
}

int cmd_refine(const RunConfig& cfg, const fs::path& out_dir, std::ostream& out) {
  return guarded(out, [&] {
    Stopwatch clock;
    const Potential pot = cfg.make_potential();
    const SolverConfig s = cfg.solver_config();
    const int fine_m = cfg.refine.fine_m == 0 ? 2 * cfg.grid.m : cfg.refine.fine_m;
    if (fine_m == cfg.grid.m) throw ConfigError("refinement needs two different values of m");
    prepare_dir(out_dir);

    ojson report;
    report["command"] = "refine";
    report["config"] = to_json(cfg);
    ojson timing;
    ojson levels = ojson::array();
    std::vector<HomoclinicCandidate> found;
    for (int m : {cfg.grid.m, fine_m}) {
      const Grid grid(cfg.grid.T, m, cfg.grid.M);
      try {
        HomoclinicCandidate c = solve_homoclinic(pot, grid, s);
        write_trajectory_csv(c.trajectory, out_dir / ("solution_m" + std::to_string(m) + ".csv"));
        ojson level = candidate_json(c);
        level["m"] = m;
        levels.push_back(level);
        found.push_back(std::move(c));
      } catch (const HypothesisViolation&) {
        throw;
      } catch (const Error& e) {
        levels.push_back({{"m", m}, {"error", e.what()}});
      }
      timing["m" + std::to_string(m)] = clock.lap();
    }
    report["levels"] = levels;

    int code = kExitNoSolution;
    if (found.size() == 2) {
      const double ratio =
          found[0].residual.consistency_residual / found[1].residual.consistency_residual;
      const double drift = std::abs(found[1].action - found[0].action) / std::abs(found[1].action);
      const bool ok = ratio >= 3.5 && ratio <= 4.5 && drift <= 0.05;
      report["residual_ratio"] = ratio;
      report["action_drift"] = drift;
      if (found[0].e_value && found[1].e_value) {
        report["e_value_drift"] =
            std::abs(*found[1].e_value - *found[0].e_value) / std::abs(*found[1].e_value);
      }
      report["passed"] = ok;
      out << std::setprecision(6) << "residual ratio " << ratio << "\naction drift " << drift
          << '\n'
          << (ok ? "PASS" : "FAIL") << '\n';
      code = ok ? kExitOk : kExitNoSolution;
    } else {
      report["passed"] = false;
      out << "a refinement level failed to converge\nFAIL\n";
    }
    report["timing"] = timing;
    write_json(report, out_dir / "refine.json");
    return code;
  });
}

std::vector<std::string> library_from_manifest(const fs::path& manifest) {
  std::ifstream in(manifest);
  if (!in) throw ConfigError("cannot open manifest " + manifest.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("manifest " + manifest.string() + " is not valid JSON");
  }
  if (!j.is_array()) throw ConfigError("manifest " + manifest.string() + " is not a JSON array");
  std::vector<std::string> paths;
  for (const auto& e : j) {
    if (!e.contains("trajectory_csv_path") || !e["trajectory_csv_path"].is_string()) {
      throw ConfigError("manifest entry without trajectory_csv_path");
    }
    fs::path p = e["trajectory_csv_path"].get<std::string>();
    if (p.is_relative()) p = manifest.parent_path() / p;
    paths.push_back(p.string());
  }
  return paths;
}

int cmd_diagnose(const RunConfig& cfg, const fs::path& trajectory, const fs::path& out_dir,
                 std::ostream& out) {
  try {
    const Potential pot = cfg.make_potential();
    const Grid grid = cfg.make_grid();
    const GridFunction u = read_trajectory_csv(trajectory, grid);
    std::vector<GridFunction> library;
    for (const std::string& p : cfg.diagnose.library) library.push_back(read_trajectory_csv(p, grid));

    ojson report;
    report["command"] = "diagnose";
    report["trajectory"] = trajectory.string();
    report["config"] = to_json(cfg);

    try {
      const ActionEval ev = eval_action(u, pot);
      report["action"] = ev.value;
      report["grad_norm"] = gradient_norm(ev.gradient, grid.h());
      report["residual"] = residual_json(ode_residual(u, pot));
    } catch (const Error& e) {
      report["action"] = nullptr;
      report["action_error"] = e.what();
    }
    const double cl = singularity_clearance(u, pot);
    report["clearance"] = cl;
    report["clearance_ok"] = cl >= default_clearance(pot);
    if (const auto cr = find_crossing(u, pot)) {
      report["crossing"] = {{"node", cr->node}, {"k", cr->k}};
    } else {
      report["crossing"] = nullptr;
    }

    const BumpDecomposition split = ps_split(u, library);
    ojson bumps = ojson::array();
    for (const Bump& b : split.bumps) {
      ojson jb = {{"first", b.first},
                  {"last", b.last},
                  {"t_first", grid.time(b.first)},
                  {"t_last", grid.time(b.last)},
                  {"norm", h1_norm(b.extracted)}};
      if (b.library_index) {
        jb["library_index"] = *b.library_index;
        jb["shift"] = b.shift;
        jb["match_distance"] = b.match_distance;
      } else {
        jb["library_index"] = nullptr;
      }
      bumps.push_back(jb);
    }
    report["bumps"] = bumps;
    report["split_residual"] = library.empty() ? ojson(nullptr) : ojson(split.residual_norm);
    report["tail_mass"] = tail_mass(u);

    std::mt19937_64 rng(cfg.seed);
    const double L = grid.half_length();
    std::uniform_real_distribution<double> where(-L + 1.0, L - 1.0);
    int checked = 0;
    int passed = 0;
    double worst = std::numeric_limits<double>::infinity();
    for (int w = 0; w < cfg.diagnose.windows && L > 1.0; ++w) {
      try {
        const SobolevReport r = sobolev_bound_check(u, where(rng));
        ++checked;
        passed += r.passed ? 1 : 0;
        worst = std::min(worst, r.rhs - r.lhs);
      } catch (const WindowOutOfDomain&) {
      }
    }
    report["sobolev"] = {{"windows", checked},
                         {"passed", passed},
                         {"min_slack", checked > 0 ? ojson(worst) : ojson(nullptr)}};

    if (!out_dir.empty()) write_json(report, prepare_dir(out_dir) / "diagnose.json");
    ojson shown = report;
    shown.erase("config");
    out << shown.dump(2) << '\n';
    return kExitOk;
  } catch (const Error& e) {
    out << "diagnose failed: " << e.what() << '\n';
    return kExitConfig;
  } catch (const fs::filesystem_error& e) {
    out << "io error: " << e.what() << '\n';
    return kExitConfig;
  }
}

}  // namespace homoclinic
