#include "convoy/candidates.hpp"

#include <cmath>
#include <stdexcept>

namespace convoy {

namespace {

// Shared inner loop of the candidate scans: rates every vehicle in the world
// as a potential target for `searcher`. Followers and entities locked by a
// maneuver count as filtered; position/deviation rejections do not.
void scan_targets(const WorldState& world, const PlatoonableEntity& searcher,
                  const FormationParams& params, bool limit_to_comm_range,
                  CandidateScan& out) {
  long found = 0;
  long filtered = 0;
  for (const auto& [tid, tv] : world.vehicles) {
    if (tid == searcher.id) continue;
    if (limit_to_comm_range &&
        std::abs(tv.position - searcher.front_position) > params.comm_range) {
      continue;
    }
    if (!is_available_target(tv)) {
      ++filtered;
      continue;
    }
    const PlatoonableEntity target = entity_view(world, tid);
    if (!is_eligible(searcher, target, params)) continue;
    out.entries.push_back(
        CandidateEntry{searcher.id, tid, deviation(searcher, target, params)});
    ++found;
  }
  out.found_per_searcher.push_back(found);
  out.filtered_per_searcher.push_back(filtered);
  out.found += found;
  out.filtered += filtered;
}

}  // namespace

CandidateScan collect_candidates_centralized(const WorldState& world,
                                             const FormationParams& params) {
  CandidateScan scan;
  for (const auto& [cid, cv] : world.vehicles) {
    if (!is_available_searcher(cv)) continue;
    scan.searcher_ids.push_back(cid);
    scan_targets(world, entity_view(world, cid), params,
                 /*limit_to_comm_range=*/false, scan);
  }
  return scan;
}

CandidateScan collect_candidates_distributed(const WorldState& world,
                                             VehicleId ego,
                                             const FormationParams& params) {
  const auto it = world.vehicles.find(ego);
  if (it == world.vehicles.end() || !is_available_searcher(it->second)) {
    throw std::invalid_argument(
        "collect_candidates_distributed: ego " + std::to_string(ego) +
        " is not an available searcher");
  }
  CandidateScan scan;
  scan.searcher_ids.push_back(ego);
  scan_targets(world, entity_view(world, ego), params,
               /*limit_to_comm_range=*/true, scan);
  return scan;
}

}  // namespace convoy
