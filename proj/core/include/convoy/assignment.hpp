#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "convoy/candidates.hpp"

namespace convoy {

/// Decision-variable model for the exact solver: one variable per eligible
/// (searcher, target) pair plus one self variable (deviation 1.0) per
/// searcher.
struct ExactModel {
  struct Variable {
    VehicleId searcher = kNoVehicle;
    VehicleId target = kNoVehicle;
    double deviation = 0.0;
  };
  std::vector<Variable> variables;   // searchers asc, targets asc within
  std::vector<VehicleId> searchers;  // ascending
};

/// A complete assignment: every searcher maps to a target or to itself.
/// `objective` is the full sum over all searchers (forced self-assignments
/// included); the selected-pairs reporting convention is computed separately
/// via assignment_objectives().
struct AssignmentSolution {
  std::map<VehicleId, VehicleId> assignments;
  double objective = 0.0;
  double gap = 0.0;  // 0 when proven optimal
  double solve_time = 0.0;
  long nodes_explored = 0;
};

ExactModel model_from_candidates(std::span<const VehicleId> searchers,
                                 std::span<const CandidateEntry> entries);

ExactModel build_exact_model(const WorldState& world,
                             const FormationParams& params);

/// Depth-first branch-and-bound, searchers in ascending id, targets
/// best-deviation-first, incumbent seeded with the greedy solution. The time
/// limit is enforced as a deterministic node budget so that identical inputs
/// give identical solutions; wall time stays well below the limit.
AssignmentSolution solve_exact(const ExactModel& model, double time_limit_s);

/// Exhaustive oracle; refuses instances with more than 10 searchers. Ties
/// break to the lexicographically smallest assignment vector.
AssignmentSolution brute_force_solve(const ExactModel& model);

/// Iterates unique searchers in ascending id, picks the remaining entry with
/// minimum deviation (ties: lowest target id) and removes everything
/// mentioning either chosen vehicle.
std::vector<CandidateEntry> greedy_select(
    std::span<const CandidateEntry> candidates);

/// Structural check of the exactly-one / at-most-one-incoming /
/// no-joiner-as-target constraints, independent of solver internals.
/// Returns an empty string when valid, else a description of the violation.
std::string validate_solution(const ExactModel& model,
                              const AssignmentSolution& solution);

struct ObjectiveBreakdown {
  double full = 0.0;              // every searcher accounted, selfs at 1.0
  double paper_convention = 0.0;  // selected pairs plus uncounted-self rule
};

/// Computes both accounting conventions for a set of selected join pairs.
/// In the selected-pairs convention a self-assignment still counts 1.0
/// unless the vehicle both receives a joiner and had at least one non-self
/// candidate of its own (its self-assignment was forced, not chosen).
ObjectiveBreakdown assignment_objectives(
    std::span<const VehicleId> searchers,
    std::span<const CandidateEntry> all_entries,
    std::span<const CandidateEntry> selected);

/// Selected non-self pairs of a complete solution, with deviations looked up
/// from the model.
std::vector<CandidateEntry> selected_pairs(const ExactModel& model,
                                           const AssignmentSolution& solution);

/// Triggers join maneuvers for the given pairs. Pairs whose parties are no
/// longer available are skipped (distributed asynchrony); self pairs trigger
/// nothing. Returns the number of maneuvers started.
int apply_solution(WorldState& world,
                   std::span<const CandidateEntry> pairs);

}  // namespace convoy
