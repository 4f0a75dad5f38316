#include "homoclinic/multiplicity.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <limits>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "homoclinic/errors.hpp"

namespace homoclinic {

namespace {

void require_same_grid(const GridFunction& u, const GridFunction& v) {
  if (!(u.grid() == v.grid()) || u.dimension() != v.dimension()) {
    throw PreconditionViolation("functions live on different grids");
  }
}

// |u - tau_k v|_{H^1} with both functions extended by zero beyond the grid,
// so mass shifted past the boundary still counts.
double shifted_distance(const GridFunction& u, const GridFunction& v, int k) {
  const int n = u.size();
  const int d = u.dimension();
  const long offset = static_cast<long>(k) * u.grid().nodes_per_period();
  const double h = u.grid().h();
  const long lo = std::min(0L, offset);
  const long hi = std::max(static_cast<long>(n - 1), n - 1 + offset);
  auto diff = [&](long i, int c) {
    const double a = (i >= 0 && i < n) ? u(static_cast<int>(i), c) : 0.0;
    const long src = i - offset;
    const double b = (src >= 0 && src < n) ? v(static_cast<int>(src), c) : 0.0;
    return a - b;
  };
  // Boundary nodes are zero, so plain node sums equal the trapezoid rule.
  double mass = 0.0;
  double kinetic = 0.0;
  for (long i = lo; i <= hi; ++i) {
    for (int c = 0; c < d; ++c) {
      const double e = diff(i, c);
      mass += h * e * e;
      if (i < hi) {
        const double de = diff(i + 1, c) - e;
        kinetic += de * de;
      }
    }
  }
  return std::sqrt(mass + kinetic / h);
}

}  // namespace

ShiftMatch best_shift(const GridFunction& u, const GridFunction& v) {
  require_same_grid(u, v);
  const int M = u.grid().half_periods();
  ShiftMatch best{0, std::numeric_limits<double>::infinity()};
  for (int k = -M; k <= M; ++k) {
    const double dist = shifted_distance(u, v, k);
    if (dist < best.distance) best = {k, dist};
  }
  return best;
}

double geometric_distance(const GridFunction& u, const GridFunction& v) {
  return std::min(best_shift(u, v).distance, best_shift(v, u).distance);
}

bool is_distinct(const GridFunction& u, const GridFunction& v, double epsilon_distinct) {
  return geometric_distance(u, v) >= epsilon_distinct;
}

SolutionLibrary::Insertion SolutionLibrary::insert(HomoclinicCandidate candidate,
                                                   std::uint64_t seed, std::string item) {
  if (!candidate.normalized) throw PreconditionViolation("library entries must be normalized");
  Renormalized r = renormalize_translation(candidate.trajectory);
  if (r.shift != 0) {
    const double before = h1_norm(candidate.trajectory);
    if (std::abs(h1_norm(r.function) - before) > 1e-12 * before) {
      throw PreconditionViolation("normalizing the entry would push mass off the grid");
    }
    candidate.trajectory = std::move(r.function);
  }
  std::vector<double> row;
  Insertion result{true, static_cast<int>(entries_.size()),
                   std::numeric_limits<double>::infinity()};
  for (const LibraryEntry& e : entries_) {
    const double dist = geometric_distance(candidate.trajectory, e.candidate.trajectory);
    row.push_back(dist);
    if (dist < result.nearest) {
      result.nearest = dist;
      if (dist < epsilon_) {
        result.inserted = false;
        result.id = e.id;
      }
    }
  }
  if (!result.inserted) return result;

  for (std::size_t i = 0; i < distances_.size(); ++i) distances_[i].push_back(row[i]);
  row.push_back(0.0);
  distances_.push_back(std::move(row));
  entries_.push_back({result.id, std::move(candidate), seed, std::move(item)});
  return result;
}

std::vector<std::vector<double>> SolutionLibrary::distance_matrix() const { return distances_; }

double SolutionLibrary::min_pairwise_distance() const {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < distances_.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) best = std::min(best, distances_[i][j]);
  }
  return best;
}

std::optional<std::pair<int, int>> support_range(const GridFunction& v, double threshold) {
  int first = -1;
  int last = -1;
  for (int i = 0; i < v.size(); ++i) {
    if (v.norm_at(i) > threshold) {
      if (first < 0) first = i;
      last = i;
    }
  }
  if (first < 0) return std::nullopt;
  return std::make_pair(first, last);
}

GridFunction multibump_guess(const std::vector<GridFunction>& entries,
                             const std::vector<int>& shifts, const Potential& pot) {
  if (entries.empty() || entries.size() != shifts.size()) {
    throw PreconditionViolation("multibump guess needs one shift per entry");
  }
  const Grid& grid = entries.front().grid();
  const int m = grid.nodes_per_period();
  std::vector<std::pair<long, long>> supports;
  GridFunction sum(grid, entries.front().dimension());
  for (std::size_t b = 0; b < entries.size(); ++b) {
    require_same_grid(sum, entries[b]);
    const auto range = support_range(entries[b], kMultibumpSupportThreshold);
    if (!range) continue;
    const long lo = range->first + static_cast<long>(shifts[b]) * m;
    const long hi = range->second + static_cast<long>(shifts[b]) * m;
    if (lo < 1 || hi > grid.size() - 2) {
      throw ShiftOutOfRange("shifted bump support leaves the grid");
    }
    supports.emplace_back(lo, hi);
    sum += shift_periods(entries[b], shifts[b]);
  }
  std::sort(supports.begin(), supports.end());
  for (std::size_t b = 1; b < supports.size(); ++b) {
    if (supports[b].first - supports[b - 1].second < 2L * m) {
      throw OverlappingBumps("shifted bump supports are closer than two periods");
    }
  }
  const double cl = singularity_clearance(sum, pot);
  if (cl < default_clearance(pot)) {
    throw InfeasibleGuess("multibump guess passes too close to the singularity");
  }
  return sum;
}

BumpDecomposition ps_split(const GridFunction& u, const std::vector<GridFunction>& library,
                           double delta_bump, double delta_gap) {
  if (!(delta_gap < delta_bump)) throw PreconditionViolation("need delta_gap < delta_bump");
  const int n = u.size();
  std::vector<double> mag(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) mag[i] = u.norm_at(i);

  // Windows around runs above delta_bump, widened through everything above
  // delta_gap plus the first node below it on each side.
  std::vector<std::pair<int, int>> windows;
  for (int i = 0; i < n;) {
    if (mag[i] < delta_bump) {
      ++i;
      continue;
    }
    int lo = i;
    int hi = i;
    while (hi + 1 < n && mag[hi + 1] >= delta_bump) ++hi;
    i = hi + 1;
    while (lo > 0 && mag[lo] >= delta_gap) --lo;
    while (hi < n - 1 && mag[hi] >= delta_gap) ++hi;
    if (!windows.empty() && lo <= windows.back().second) {
      windows.back().second = std::max(windows.back().second, hi);
    } else {
      windows.emplace_back(lo, hi);
    }
  }

  BumpDecomposition out;
  GridFunction model(u.grid(), u.dimension());
  for (const auto& [lo, hi] : windows) {
    GridFunction piece(u.grid(), u.dimension());
    for (int i = std::max(lo, 1); i <= std::min(hi, n - 2); ++i) {
      std::copy_n(u.point(i).begin(), u.dimension(), piece.point(i).begin());
    }
    Bump bump{lo, hi, std::move(piece), std::nullopt, 0, 0.0};
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t e = 0; e < library.size(); ++e) {
      const ShiftMatch match = best_shift(bump.extracted, library[e]);
      if (match.distance < best) {
        best = match.distance;
        bump.library_index = static_cast<int>(e);
        bump.shift = match.shift;
        bump.match_distance = match.distance;
      }
    }
    if (bump.library_index) model += shift_periods(library[*bump.library_index], bump.shift);
    out.bumps.push_back(std::move(bump));
  }
  out.residual_norm = h1_norm(u - model);
  return out;
}

double tail_mass(const GridFunction& v, double delta_bump, double delta_gap) {
  const BumpDecomposition split = ps_split(v, {}, delta_bump, delta_gap);
  GridFunction rest = v;
  for (const Bump& b : split.bumps) rest -= b.extracted;
  return h1_norm(rest);
}

namespace {

struct Item {
  std::string label;
  std::uint64_t seed;
  SolverConfig cfg;
  std::vector<int> entry_ids;  // multibump items only
  std::vector<int> shifts;
};

std::string format_single(const SolverConfig& c) {
  std::ostringstream os;
  os << "single orientation=" << (c.orientation > 0 ? "+1" : "-1") << " k0=" << c.k0
     << " width=" << c.bump_width << " phase=" << c.phase;
  return os.str();
}

// Smallest s >= 1 putting tau_s(right) two periods clear of left.
std::optional<int> clearing_shift(const GridFunction& left, const GridFunction& right) {
  const auto a = support_range(left, kMultibumpSupportThreshold);
  const auto b = support_range(right, kMultibumpSupportThreshold);
  if (!a || !b) return std::nullopt;
  const int m = left.grid().nodes_per_period();
  const int needed = a->second + 2 * m - b->first;
  const int s = std::max(1, (needed + m - 1) / m);
  if (b->second + static_cast<long>(s) * m > left.size() - 2) return std::nullopt;
  return s;
}

}  // namespace

SearchResult search_distinct(const Potential& pot, const Grid& grid, const SolverConfig& cfg,
                             const SearchConfig& search) {
  check_A(pot.coefficient());
  check_H2(pot.singular());

  SearchResult result{SolutionLibrary(search.epsilon_distinct), {}};
  if (search.targets <= 0) return result;

  std::uint64_t next_seed = cfg.seed;
  std::mutex lock;
  std::set<std::pair<int, int>> tried_pairs;

  auto done = [&] {
    return static_cast<int>(result.library.size()) >= search.targets;
  };

  // Runs one item and records it; insertion is serialized through `lock`.
  auto run_item = [&](const Item& item) {
    ScheduleRecord rec{item.label, item.seed, "failed", "", std::nullopt};
    std::optional<HomoclinicCandidate> cand;
    try {
      if (item.entry_ids.empty()) {
        cand = solve_homoclinic(pot, grid, item.cfg);
      } else {
        std::vector<GridFunction> parts;
        {
          std::lock_guard<std::mutex> g(lock);
          for (int id : item.entry_ids) {
            parts.push_back(result.library.entries()[static_cast<std::size_t>(id)]
                                .candidate.trajectory);
          }
        }
        const GridFunction guess = multibump_guess(parts, item.shifts, pot);
        cand = descend_to_critical(guess, pot, item.cfg);
      }
    } catch (const OverlappingBumps& e) {
      rec.outcome = "rejected";
      rec.detail = e.what();
    } catch (const ShiftOutOfRange& e) {
      rec.outcome = "rejected";
      rec.detail = e.what();
    } catch (const Error& e) {
      rec.detail = e.what();
    }

    std::lock_guard<std::mutex> g(lock);
    if (cand) {
      rec.action = cand->action;
      if (!cand->normalized) {
        rec.outcome = "rejected";
        rec.detail = "converged trajectory cannot be normalized on this grid";
      } else if (done()) {
        rec.outcome = "skipped";
        rec.detail = "target count already reached";
      } else {
        const auto ins = result.library.insert(std::move(*cand), item.seed, item.label);
        std::ostringstream os;
        if (ins.inserted) {
          rec.outcome = "inserted";
          os << "entry " << ins.id;
        } else {
          rec.outcome = "duplicate";
          os << "of entry " << ins.id;
        }
        if (std::isfinite(ins.nearest)) os << ", nearest distance " << ins.nearest;
        rec.detail = os.str();
      }
    }
    result.log.push_back(std::move(rec));
  };

  auto run_round = [&](const std::vector<Item>& items) {
    const int jobs = std::max(1, search.jobs);
    if (jobs == 1) {
      for (const Item& item : items) {
        if (done()) return;
        run_item(item);
      }
      return;
    }
    std::atomic<std::size_t> cursor{0};
    auto worker = [&] {
      for (;;) {
        {
          std::lock_guard<std::mutex> g(lock);
          if (done()) return;
        }
        const std::size_t i = cursor.fetch_add(1);
        if (i >= items.size()) return;
        run_item(items[i]);
      }
    };
    std::vector<std::thread> pool;
    for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  };

  auto singles = [&](bool peak_phase) {
    std::vector<Item> items;
    for (int p = 0; p < std::max(1, search.phases); ++p) {
      if ((p == 0) != peak_phase) continue;
      for (int orientation : {1, -1}) {
        for (double k0 : search.k0s) {
          for (double wf : search.width_factors) {
            SolverConfig c = cfg;
            c.orientation = orientation;
            c.k0 = k0;
            c.bump_width = cfg.bump_width * wf;
            c.phase = static_cast<double>(p) / std::max(1, search.phases);
            c.max_restarts = 0;
            c.seed = next_seed++;
            items.push_back({format_single(c), c.seed, c, {}, {}});
          }
        }
      }
    }
    return items;
  };

  auto multibumps = [&] {
    std::vector<Item> items;
    if (!search.multibump) return items;
    const int count = static_cast<int>(result.library.size());
    for (int a = 0; a < count; ++a) {
      for (int b = 0; b < count; ++b) {
        if (!tried_pairs.insert({a, b}).second) continue;
        const auto& ea = result.library.entries()[static_cast<std::size_t>(a)];
        const auto& eb = result.library.entries()[static_cast<std::size_t>(b)];
        // Only glue single-bump entries; longer chains come from their own pairs.
        if (ps_split(ea.candidate.trajectory, {}).bumps.size() != 1 ||
            ps_split(eb.candidate.trajectory, {}).bumps.size() != 1) {
          continue;
        }
        SolverConfig c = cfg;
        c.seed = next_seed++;
        std::ostringstream os;
        os << "multibump entries=" << a << "," << b;
        const auto s = clearing_shift(ea.candidate.trajectory, eb.candidate.trajectory);
        if (!s) {
          result.log.push_back({os.str(), c.seed, "rejected",
                                "bumps do not fit on the grid two periods apart", std::nullopt});
          continue;
        }
        os << " shifts=0," << *s;
        items.push_back({os.str(), c.seed, c, {a, b}, {0, *s}});
      }
    }
    return items;
  };

  run_round(singles(true));
  if (!done()) run_round(multibumps());
  if (!done()) run_round(singles(false));
  if (!done()) run_round(multibumps());
  return result;
}

}  // namespace homoclinic
