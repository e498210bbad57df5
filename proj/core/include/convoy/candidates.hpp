#pragma once

#include <vector>

#include "convoy/similarity.hpp"
#include "convoy/world.hpp"

namespace convoy {

/// One feasible (searcher, target) option with its deviation.
struct CandidateEntry {
  VehicleId searcher = kNoVehicle;
  VehicleId target = kNoVehicle;
  Deviation deviation;
};

/// Result of one candidate scan. `found` counts eligible non-self pairs;
/// `filtered` counts targets discarded solely for platoon or maneuver
/// status (not for position, deviation, or communication range).
struct CandidateScan {
  std::vector<CandidateEntry> entries;  // searchers asc, targets asc
  std::vector<VehicleId> searcher_ids;  // all available searchers scanned
  std::vector<long> found_per_searcher;     // parallel to searcher_ids
  std::vector<long> filtered_per_searcher;  // parallel to searcher_ids
  long found = 0;
  long filtered = 0;
};

/// Scans every available searcher against every entity in the world.
CandidateScan collect_candidates_centralized(const WorldState& world,
                                             const FormationParams& params);

/// Scans a single searching vehicle against entities whose front position
/// lies within communication range. Throws if `ego` is not an available
/// searcher.
CandidateScan collect_candidates_distributed(const WorldState& world,
                                             VehicleId ego,
                                             const FormationParams& params);

}  // namespace convoy
