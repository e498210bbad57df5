#include "convoy/assignment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <set>
#include <limits>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

namespace convoy {

namespace {

constexpr double kSelfDeviation = 1.0;
constexpr double kInf = std::numeric_limits<double>::infinity();

// The solver's time limit is enforced as a node budget at this assumed rate,
// which keeps the cutoff deterministic (identical input, identical solution)
// while the wall time stays far below the configured limit.
constexpr double kAssumedNodesPerSecond = 50000.0;

double entry_sort_key_less(const CandidateEntry& a, const CandidateEntry& b) {
  if (a.searcher != b.searcher) return a.searcher < b.searcher;
  return a.target < b.target;
}

// Canonical objective: sum in ascending-searcher order so that independent
// routes to the same assignment produce bit-identical totals.
double objective_of(const ExactModel& model,
                    const std::map<VehicleId, VehicleId>& assignments) {
  std::unordered_map<VehicleId, std::unordered_map<VehicleId, double>> f;
  for (const auto& v : model.variables) f[v.searcher][v.target] = v.deviation;
  double total = 0.0;
  for (const VehicleId s : model.searchers) {
    total += f.at(s).at(assignments.at(s));
  }
  return total;
}

struct SearcherOptions {
  VehicleId searcher = kNoVehicle;
  // Sorted by (deviation, target id); always contains the self option.
  std::vector<ExactModel::Variable> options;
};

std::vector<SearcherOptions> options_by_searcher(const ExactModel& model) {
  std::vector<SearcherOptions> out(model.searchers.size());
  std::unordered_map<VehicleId, std::size_t> slot;
  for (std::size_t i = 0; i < model.searchers.size(); ++i) {
    out[i].searcher = model.searchers[i];
    slot[model.searchers[i]] = i;
  }
  for (const auto& v : model.variables) {
    out[slot.at(v.searcher)].options.push_back(v);
  }
  for (auto& s : out) {
    std::sort(s.options.begin(), s.options.end(),
              [](const auto& a, const auto& b) {
                if (a.deviation != b.deviation) return a.deviation < b.deviation;
                return a.target < b.target;
              });
  }
  return out;
}

// Shared feasibility state for the exact searches. Assigning s -> t (non-self)
// requires that s has no inbound joiner, that t is untaken, and that t has not
// itself joined somebody; it marks t as receiving, which later forces t's own
// assignment to self.
struct SearchState {
  std::unordered_map<VehicleId, std::size_t> searcher_slot;
  std::vector<char> joined;    // searcher slot -> assigned to non-self
  std::vector<char> receives;  // searcher slot -> has an inbound joiner
  std::unordered_set<VehicleId> taken_targets;

  explicit SearchState(const ExactModel& model)
      : joined(model.searchers.size(), 0),
        receives(model.searchers.size(), 0) {
    for (std::size_t i = 0; i < model.searchers.size(); ++i) {
      searcher_slot[model.searchers[i]] = i;
    }
  }

  bool feasible(std::size_t s_slot, VehicleId s, VehicleId t) const {
    if (s == t) return true;
    if (receives[s_slot]) return false;  // must self-assign
    if (taken_targets.count(t)) return false;
    if (const auto it = searcher_slot.find(t); it != searcher_slot.end()) {
      if (joined[it->second]) return false;
    }
    return true;
  }

  // Returns the searcher slot of t if t is itself a searcher, else npos.
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);
  std::size_t apply(std::size_t s_slot, VehicleId s, VehicleId t) {
    if (s == t) return npos;
    joined[s_slot] = 1;
    taken_targets.insert(t);
    if (const auto it = searcher_slot.find(t); it != searcher_slot.end()) {
      receives[it->second] = 1;
      return it->second;
    }
    return npos;
  }

  void undo(std::size_t s_slot, VehicleId s, VehicleId t,
            std::size_t receiver_slot) {
    if (s == t) return;
    joined[s_slot] = 0;
    taken_targets.erase(t);
    if (receiver_slot != npos) receives[receiver_slot] = 0;
  }
};


// Shortest-augmenting-path assignment (Jonker-Volgenant style) used for the
// bipartite relaxation bound: every searcher takes a distinct target column
// or its own self column, ignoring only the joiner/target exclusion. The
// result is a valid lower bound on the constrained optimum.
double jv_assignment_cost(int rows, int cols,
                          const std::function<double(int, int)>& cost) {
  constexpr double big = 1e18;
  std::vector<double> u(rows + 1, 0.0), v(cols + 1, 0.0);
  std::vector<int> match(cols + 1, 0), way(cols + 1, 0);
  for (int i = 1; i <= rows; ++i) {
    match[0] = i;
    int j0 = 0;
    std::vector<double> minv(cols + 1, big);
    std::vector<char> used(cols + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = match[j0];
      int j1 = -1;
      double delta = big;
      for (int j = 1; j <= cols; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= cols; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const int j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0);
  }
  double total = 0.0;
  for (int j = 1; j <= cols; ++j) {
    if (match[j]) total += cost(match[j] - 1, j - 1);
  }
  return total;
}

// Depth-first branch and bound. Each unassigned searcher keeps a cursor on
// its cheapest still-feasible option; blocking a target advances the cursors
// pointing at it, which keeps the lower bound tight as the tree deepens.
struct BranchAndBound {
  struct Option {
    double f = 0.0;
    VehicleId target = kNoVehicle;
  };

  const ExactModel& model;
  std::vector<VehicleId> searchers;
  std::vector<std::vector<Option>> options;  // per slot, sorted (f, target)
  std::unordered_map<VehicleId, std::size_t> slot_of;

  std::vector<char> assigned;
  std::vector<double> self_cost;  // deviation of each searcher's self option
  std::vector<char> receives;  // forced to self by an inbound joiner
  std::unordered_set<VehicleId> blocked;  // cannot receive a joiner anymore
  std::vector<std::size_t> cursor;
  std::vector<double> contrib;  // bound contribution of unassigned searchers
  double sum_min = 0.0;
  std::unordered_map<VehicleId, std::set<std::size_t>> pointing;

  long node_budget = 0;
  long nodes = 0;
  bool aborted = false;

  std::vector<VehicleId> current;
  std::vector<VehicleId> incumbent;
  double incumbent_cost = kInf;
  std::vector<double> open_bound;  // per level, over untried siblings

  explicit BranchAndBound(const ExactModel& m)
      : model(m), searchers(m.searchers) {
    const std::size_t n = searchers.size();
    options.resize(n);
    for (std::size_t i = 0; i < n; ++i) slot_of[searchers[i]] = i;
    for (const auto& v : m.variables) {
      options[slot_of.at(v.searcher)].push_back({v.deviation, v.target});
    }
    for (auto& opts : options) {
      std::sort(opts.begin(), opts.end(), [](const Option& a, const Option& b) {
        if (a.f != b.f) return a.f < b.f;
        return a.target < b.target;
      });
    }
    assigned.assign(n, 0);
    self_cost.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (const auto& o : options[i]) {
        if (o.target == searchers[i]) self_cost[i] = o.f;
      }
    }
    receives.assign(n, 0);
    cursor.assign(n, 0);
    contrib.assign(n, 0.0);
    current.assign(n, kNoVehicle);
    open_bound.assign(n, kInf);
    for (std::size_t i = 0; i < n; ++i) {
      contrib[i] = options[i].front().f;
      pointing[options[i].front().target].insert(i);
      sum_min += contrib[i];
    }
  }

  bool option_available(std::size_t slot, const Option& o) const {
    if (o.target == searchers[slot]) return true;  // self is never blocked
    return !blocked.count(o.target);
  }

  // One undo unit: every mutation done while assigning one searcher.
  struct Undo {
    std::size_t slot = 0;
    double old_contrib = 0.0;
    VehicleId old_pointing = kNoVehicle;
    std::vector<std::pair<std::size_t, std::size_t>> moved_cursors;
    std::vector<std::size_t> forced;  // slots whose receives flag was set
    std::vector<VehicleId> blocked_added;
  };

  void refresh_cursor(std::size_t slot, Undo& undo) {
    const std::size_t old = cursor[slot];
    std::size_t c = old;
    while (!option_available(slot, options[slot][c])) ++c;  // self terminates
    if (c == old) return;
    undo.moved_cursors.push_back({slot, old});
    pointing[options[slot][old].target].erase(slot);
    pointing[options[slot][c].target].insert(slot);
    cursor[slot] = c;
    if (!receives[slot]) {
      sum_min += options[slot][c].f - contrib[slot];
      contrib[slot] = options[slot][c].f;
    } else {
      contrib[slot] = options[slot][c].f;  // masked by the forced self below
    }
  }

  void block_target(VehicleId t, Undo& undo) {
    if (!blocked.insert(t).second) return;
    undo.blocked_added.push_back(t);
    const auto pit = pointing.find(t);
    if (pit == pointing.end()) return;
    const std::set<std::size_t> affected = pit->second;  // copy: we mutate it
    for (const std::size_t u : affected) {
      if (!assigned[u]) refresh_cursor(u, undo);
    }
  }

  void force_self(std::size_t slot, Undo& undo) {
    if (receives[slot]) return;
    receives[slot] = 1;
    undo.forced.push_back(slot);
    sum_min += self_cost[slot] - contrib[slot];  // pinned at the self option
  }

  Undo apply(std::size_t slot, const Option& o) {
    Undo undo;
    undo.slot = slot;
    undo.old_contrib = contrib[slot];
    undo.old_pointing = options[slot][cursor[slot]].target;
    assigned[slot] = 1;
    pointing[undo.old_pointing].erase(slot);
    sum_min -= receives[slot] ? self_cost[slot] : contrib[slot];
    if (o.target != searchers[slot]) {
      block_target(o.target, undo);       // target capacity used up
      block_target(searchers[slot], undo);  // a joiner cannot receive
      if (const auto it = slot_of.find(o.target); it != slot_of.end()) {
        if (!assigned[it->second]) force_self(it->second, undo);
      }
    }
    return undo;
  }

  void revert(const Undo& undo) {
    for (auto it = undo.forced.rbegin(); it != undo.forced.rend(); ++it) {
      receives[*it] = 0;
      sum_min += contrib[*it] - self_cost[*it];
    }
    for (auto it = undo.moved_cursors.rbegin(); it != undo.moved_cursors.rend();
         ++it) {
      const auto [u, old] = *it;
      pointing[options[u][cursor[u]].target].erase(u);
      pointing[options[u][old].target].insert(u);
      cursor[u] = old;
      if (!receives[u]) {
        sum_min += options[u][old].f - contrib[u];
      }
      contrib[u] = options[u][old].f;
    }
    for (const VehicleId t : undo.blocked_added) blocked.erase(t);
    assigned[undo.slot] = 0;
    pointing[undo.old_pointing].insert(undo.slot);
    contrib[undo.slot] = undo.old_contrib;
    sum_min += receives[undo.slot] ? self_cost[undo.slot] : contrib[undo.slot];
  }

  bool feasible(std::size_t slot, const Option& o) const {
    const VehicleId s = searchers[slot];
    if (o.target == s) return true;
    if (receives[slot]) return false;
    return !blocked.count(o.target);
  }

  void seed_incumbent(const std::vector<CandidateEntry>& pairs) {
    incumbent.assign(searchers.size(), kNoVehicle);
    std::unordered_map<VehicleId, VehicleId> chosen;
    for (const auto& e : pairs) chosen[e.searcher] = e.target;
    std::map<VehicleId, VehicleId> full;
    for (const VehicleId s : searchers) {
      const auto it = chosen.find(s);
      full[s] = it == chosen.end() ? s : it->second;
    }
    for (std::size_t i = 0; i < searchers.size(); ++i) {
      incumbent[i] = full.at(searchers[i]);
    }
    incumbent_cost = objective_of_subset(full);
  }

  double objective_of_subset(const std::map<VehicleId, VehicleId>& a) const {
    double total = 0.0;
    for (std::size_t i = 0; i < searchers.size(); ++i) {
      const VehicleId t = a.at(searchers[i]);
      for (const auto& o : options[i]) {
        if (o.target == t) {
          total += o.f;
          break;
        }
      }
    }
    return total;
  }

  void search(std::size_t level, double cost) {
    if (aborted) return;
    if (level == options.size()) {
      if (cost < incumbent_cost) {
        incumbent_cost = cost;
        incumbent = current;
      }
      return;
    }
    // sum_min still includes this searcher's own contribution.
    if (cost + sum_min >= incumbent_cost) {
      open_bound[level] = kInf;
      return;
    }
    const double others =
        sum_min - (receives[level] ? self_cost[level] : contrib[level]);
    const auto& opts = options[level];
    const VehicleId s = searchers[level];
    for (std::size_t i = 0; i < opts.size(); ++i) {
      const Option& o = opts[i];
      if (receives[level] && o.target != s) continue;
      if (cost + o.f + others >= incumbent_cost) break;  // sorted by f
      if (!feasible(level, o)) continue;
      if (++nodes > node_budget) {
        aborted = true;
        open_bound[level] =
            std::min(open_bound[level], cost + o.f + others);
        return;
      }
      open_bound[level] = kInf;
      if (!receives[level]) {
        for (std::size_t j = i + 1; j < opts.size(); ++j) {
          if (feasible(level, opts[j])) {
            open_bound[level] = cost + opts[j].f + others;
            break;
          }
        }
      }
      const Undo undo = apply(level, o);
      current[level] = o.target;
      search(level + 1, cost + o.f);
      revert(undo);
      if (aborted) return;
    }
    open_bound[level] = kInf;
  }

  double frontier_bound() const {
    double b = kInf;
    for (const double v : open_bound) b = std::min(b, v);
    return b;
  }

  // Root bound, the max of two valid relaxations.
  //
  // Conflict correction: when k searchers share the same cheapest target, at
  // least k-1 of them must pay the step up to their next option.
  //
  // Matching cardinality: every join consumes both the joiner and the
  // target, so a component of V vehicles admits at most floor(V/2) joins;
  // all remaining searchers pay the self deviation of 1.0.
  double root_bound() const {
    double base = 0.0;
    std::map<VehicleId, std::vector<double>> extras;
    std::unordered_set<VehicleId> vehicles;
    std::unordered_set<VehicleId> distinct_targets;
    std::vector<double> lows;  // cheapest non-self option per searcher
    for (std::size_t i = 0; i < options.size(); ++i) {
      const Option& first = options[i].front();
      base += first.f;
      vehicles.insert(searchers[i]);
      for (const auto& o : options[i]) {
        if (o.target != searchers[i]) {
          vehicles.insert(o.target);
          distinct_targets.insert(o.target);
        }
      }
      if (first.target == searchers[i]) continue;
      lows.push_back(first.f);
      double second = self_cost[i];  // self at worst
      for (std::size_t j = 1; j < options[i].size(); ++j) {
        if (options[i][j].target != first.target) {
          second = options[i][j].f;
          break;
        }
      }
      extras[first.target].push_back(second - first.f);
    }
    double correction = 0.0;
    for (auto& [t, xs] : extras) {
      if (xs.size() < 2) continue;
      std::sort(xs.begin(), xs.end());
      for (std::size_t i = 0; i + 1 < xs.size(); ++i) correction += xs[i];
    }

    std::sort(lows.begin(), lows.end());
    const std::size_t max_joins =
        std::min({lows.size(), vehicles.size() / 2, distinct_targets.size()});
    double matching = 0.0;
    for (std::size_t i = 0; i < max_joins; ++i) matching += lows[i];
    // Everyone else pays a self assignment; undercount with the cheapest.
    std::vector<double> selfs = self_cost;
    std::sort(selfs.begin(), selfs.end());
    for (std::size_t i = 0; i + max_joins < selfs.size(); ++i) {
      matching += selfs[i];
    }

    double best = std::max(base + correction, matching);

    // Bipartite relaxation, exact in the target-capacity dimension. The
    // cubic-ish cost is fine for the sizes one solver round sees on a desk
    // scenario; larger instances keep the cheaper bounds.
    if (!searchers.empty() && searchers.size() <= 400) {
      std::vector<VehicleId> target_ids(distinct_targets.begin(),
                                        distinct_targets.end());
      std::sort(target_ids.begin(), target_ids.end());
      std::unordered_map<VehicleId, int> column;
      for (std::size_t j = 0; j < target_ids.size(); ++j) {
        column[target_ids[j]] = static_cast<int>(j);
      }
      const int n = static_cast<int>(searchers.size());
      const int m = static_cast<int>(target_ids.size());
      constexpr double forbidden = 1e9;
      std::vector<std::vector<double>> cost(
          n, std::vector<double>(m + n, forbidden));
      for (int i = 0; i < n; ++i) {
        cost[i][m + i] = self_cost[i];
        for (const auto& o : options[i]) {
          if (o.target == searchers[i]) continue;
          cost[i][column.at(o.target)] = o.f;
        }
      }
      const double relaxed = jv_assignment_cost(
          n, m + n, [&cost](int i, int j) { return cost[i][j]; });
      best = std::max(best, relaxed);
    }
    return best;
  }
};

// Options at brute-force time are explored in ascending target id so that the
// first minimum found is the lexicographically smallest assignment vector.
struct BruteForce {
  const ExactModel& model;
  std::vector<SearcherOptions> options;
  SearchState state;
  std::vector<VehicleId> current;
  std::vector<VehicleId> best;
  double best_cost = kInf;

  explicit BruteForce(const ExactModel& m)
      : model(m), options(options_by_searcher(m)), state(m) {
    for (auto& s : options) {
      std::sort(s.options.begin(), s.options.end(),
                [](const auto& a, const auto& b) { return a.target < b.target; });
    }
    current.assign(m.searchers.size(), kNoVehicle);
  }

  void search(std::size_t level, double cost) {
    if (level == options.size()) {
      if (cost < best_cost) {
        best_cost = cost;
        best = current;
      }
      return;
    }
    const VehicleId s = options[level].searcher;
    const bool forced_self = state.receives[level];
    for (const auto& o : options[level].options) {
      if (forced_self && o.target != s) continue;
      if (!state.feasible(level, s, o.target)) continue;
      const std::size_t receiver = state.apply(level, s, o.target);
      current[level] = o.target;
      search(level + 1, cost + o.deviation);
      state.undo(level, s, o.target, receiver);
    }
  }
};

AssignmentSolution solution_from_vector(const ExactModel& model,
                                        const std::vector<VehicleId>& chosen) {
  AssignmentSolution sol;
  for (std::size_t i = 0; i < model.searchers.size(); ++i) {
    sol.assignments[model.searchers[i]] = chosen[i];
  }
  sol.objective = objective_of(model, sol.assignments);
  return sol;
}

}  // namespace

ExactModel model_from_candidates(std::span<const VehicleId> searchers,
                                 std::span<const CandidateEntry> entries) {
  ExactModel model;
  model.searchers.assign(searchers.begin(), searchers.end());
  std::sort(model.searchers.begin(), model.searchers.end());
  model.searchers.erase(
      std::unique(model.searchers.begin(), model.searchers.end()),
      model.searchers.end());

  std::vector<CandidateEntry> sorted(entries.begin(), entries.end());
  std::sort(sorted.begin(), sorted.end(), entry_sort_key_less);

  auto it = sorted.begin();
  for (const VehicleId s : model.searchers) {
    std::vector<ExactModel::Variable> vars;
    vars.push_back({s, s, kSelfDeviation});
    for (; it != sorted.end() && it->searcher == s; ++it) {
      vars.push_back({s, it->target, it->deviation.total});
    }
    std::sort(vars.begin(), vars.end(),
              [](const auto& a, const auto& b) { return a.target < b.target; });
    model.variables.insert(model.variables.end(), vars.begin(), vars.end());
  }
  return model;
}

ExactModel build_exact_model(const WorldState& world,
                             const FormationParams& params) {
  const CandidateScan scan = collect_candidates_centralized(world, params);
  return model_from_candidates(scan.searcher_ids, scan.entries);
}

namespace {

// The eligibility graph splits along the position windows: vehicles that
// share no candidate pair can never constrain each other, so the model
// separates into independent components solved to optimality one by one.
std::vector<ExactModel> split_components(const ExactModel& model) {
  std::unordered_map<VehicleId, VehicleId> parent;
  std::function<VehicleId(VehicleId)> find = [&](VehicleId x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  auto unite = [&](VehicleId a, VehicleId b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  };
  for (const auto& v : model.variables) {
    parent.try_emplace(v.searcher, v.searcher);
    parent.try_emplace(v.target, v.target);
  }
  for (const auto& v : model.variables) unite(v.searcher, v.target);

  std::map<VehicleId, ExactModel> components;  // keyed by component root
  for (const VehicleId s : model.searchers) {
    components[find(s)].searchers.push_back(s);
  }
  for (const auto& v : model.variables) {
    components[find(v.searcher)].variables.push_back(v);
  }
  std::vector<ExactModel> out;
  out.reserve(components.size());
  for (auto& [root, m] : components) out.push_back(std::move(m));
  return out;
}

}  // namespace

AssignmentSolution solve_exact(const ExactModel& model, double time_limit_s) {
  const auto start = std::chrono::steady_clock::now();
  AssignmentSolution sol;
  if (model.searchers.empty()) return sol;

  const long total_budget = std::max<long>(
      1, static_cast<long>(time_limit_s * kAssumedNodesPerSecond));
  long nodes_used = 0;
  double bound_total = 0.0;
  bool any_aborted = false;

  for (const ExactModel& component : split_components(model)) {
    BranchAndBound bb(component);
    bb.node_budget = std::max<long>(1, total_budget - nodes_used);

    std::vector<CandidateEntry> pair_entries;
    for (const auto& v : component.variables) {
      if (v.searcher != v.target) {
        pair_entries.push_back(
            {v.searcher, v.target, Deviation{0.0, 0.0, v.deviation}});
      }
    }
    bb.seed_incumbent(greedy_select(pair_entries));
    bb.search(0, 0.0);
    nodes_used += bb.nodes;

    for (std::size_t i = 0; i < component.searchers.size(); ++i) {
      sol.assignments[component.searchers[i]] = bb.incumbent[i];
    }
    if (bb.aborted) {
      any_aborted = true;
      const double bound = std::max(
          std::min(bb.frontier_bound(), bb.incumbent_cost), bb.root_bound());
      bound_total += std::min(bound, bb.incumbent_cost);
    } else {
      bound_total += bb.incumbent_cost;
    }
  }

  sol.objective = objective_of(model, sol.assignments);
  sol.nodes_explored = nodes_used;
  if (any_aborted && sol.objective > 0.0) {
    sol.gap =
        std::max(0.0, (sol.objective - bound_total) / sol.objective);
  }
  sol.solve_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return sol;
}

AssignmentSolution brute_force_solve(const ExactModel& model) {
  if (model.searchers.size() > 10) {
    throw std::invalid_argument(
        "brute_force_solve: instance too large (" +
        std::to_string(model.searchers.size()) + " searchers)");
  }
  AssignmentSolution sol;
  if (model.searchers.empty()) return sol;
  BruteForce bf(model);
  bf.search(0, 0.0);
  return solution_from_vector(model, bf.best);
}

std::vector<CandidateEntry> greedy_select(
    std::span<const CandidateEntry> candidates) {
  std::vector<const CandidateEntry*> sorted;
  sorted.reserve(candidates.size());
  for (const auto& e : candidates) sorted.push_back(&e);
  std::sort(sorted.begin(), sorted.end(), [](const auto* a, const auto* b) {
    return entry_sort_key_less(*a, *b);
  });

  std::unordered_set<VehicleId> blocked;
  std::vector<CandidateEntry> chosen;
  for (std::size_t i = 0; i < sorted.size();) {
    const VehicleId searcher = sorted[i]->searcher;
    std::size_t end = i;
    while (end < sorted.size() && sorted[end]->searcher == searcher) ++end;
    if (!blocked.count(searcher)) {
      const CandidateEntry* best = nullptr;
      for (std::size_t j = i; j < end; ++j) {
        const CandidateEntry* e = sorted[j];
        if (blocked.count(e->target)) continue;
        if (best == nullptr || e->deviation.total < best->deviation.total ||
            (e->deviation.total == best->deviation.total &&
             e->target < best->target)) {
          best = e;
        }
      }
      if (best != nullptr) {
        chosen.push_back(*best);
        blocked.insert(best->searcher);
        blocked.insert(best->target);
      }
    }
    i = end;
  }
  return chosen;
}

std::string validate_solution(const ExactModel& model,
                              const AssignmentSolution& solution) {
  std::unordered_map<VehicleId, std::unordered_set<VehicleId>> allowed;
  for (const auto& v : model.variables) allowed[v.searcher].insert(v.target);

  if (solution.assignments.size() != model.searchers.size()) {
    return "assignment count does not match searcher count";
  }
  std::unordered_map<VehicleId, VehicleId> incoming;  // target -> searcher
  for (const VehicleId s : model.searchers) {
    const auto it = solution.assignments.find(s);
    if (it == solution.assignments.end()) {
      return "searcher " + std::to_string(s) + " has no assignment";
    }
    const VehicleId t = it->second;
    if (!allowed.count(s) || !allowed.at(s).count(t)) {
      return "assignment " + std::to_string(s) + "->" + std::to_string(t) +
             " has no decision variable";
    }
    if (s == t) continue;
    if (const auto [pos, inserted] = incoming.emplace(t, s); !inserted) {
      return "target " + std::to_string(t) + " receives more than one joiner";
    }
  }
  for (const auto& [t, s] : incoming) {
    const auto it = solution.assignments.find(t);
    if (it != solution.assignments.end() && it->second != t) {
      return "vehicle " + std::to_string(t) +
             " is both joiner and join target";
    }
  }
  return {};
}

ObjectiveBreakdown assignment_objectives(
    std::span<const VehicleId> searchers,
    std::span<const CandidateEntry> all_entries,
    std::span<const CandidateEntry> selected) {
  std::unordered_set<VehicleId> has_candidates;
  for (const auto& e : all_entries) has_candidates.insert(e.searcher);

  std::unordered_set<VehicleId> paired;
  std::unordered_set<VehicleId> join_targets;
  double pair_sum = 0.0;
  for (const auto& e : selected) {
    paired.insert(e.searcher);
    join_targets.insert(e.target);
    pair_sum += e.deviation.total;
  }

  ObjectiveBreakdown out;
  out.full = pair_sum;
  out.paper_convention = pair_sum;
  for (const VehicleId s : searchers) {
    if (paired.count(s)) continue;
    out.full += kSelfDeviation;
    const bool forced = join_targets.count(s) && has_candidates.count(s);
    if (!forced) out.paper_convention += kSelfDeviation;
  }
  return out;
}

std::vector<CandidateEntry> selected_pairs(
    const ExactModel& model, const AssignmentSolution& solution) {
  std::unordered_map<VehicleId, std::unordered_map<VehicleId, double>> f;
  for (const auto& v : model.variables) f[v.searcher][v.target] = v.deviation;
  std::vector<CandidateEntry> pairs;
  for (const auto& [s, t] : solution.assignments) {
    if (s == t) continue;
    pairs.push_back({s, t, Deviation{0.0, 0.0, f.at(s).at(t)}});
  }
  return pairs;
}

int apply_solution(WorldState& world,
                   std::span<const CandidateEntry> pairs) {
  int triggered = 0;
  const CfParams& cf = world.config.cf;
  for (const auto& e : pairs) {
    if (e.searcher == e.target) continue;
    const auto si = world.vehicles.find(e.searcher);
    const auto ti = world.vehicles.find(e.target);
    if (si == world.vehicles.end() || ti == world.vehicles.end()) continue;
    VehicleState& searcher = si->second;
    VehicleState& target = ti->second;
    if (!is_available_searcher(searcher) || !is_available_target(target)) {
      continue;  // became unavailable in the meantime; skip the pair
    }
    const PlatoonableEntity view = entity_view(world, e.target);
    const double slot_front =
        view.rear_position - cf.vehicle_length - cf.cacc_gap;
    const double approach = std::max(0.0, slot_front - searcher.position);
    const double overspeed =
        world.config.formation.speed_window * searcher.desired_speed;
    const double catch_up =
        std::max(0.1, std::min(overspeed, cf.max_speed - target.speed));
    const double duration = std::max(1.0, approach / catch_up);
    const double dt = world.config.step_length;
    const double completion =
        world.clock + std::ceil(duration / dt) * dt;
    searcher.maneuver = JoinManeuver{e.target, completion};
    target.inbound_joiner = e.searcher;
    ++triggered;
  }
  return triggered;
}

}  // namespace convoy
