#include "convoy/traffic.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "convoy/car_following.hpp"
#include "convoy/csv.hpp"

namespace convoy {

namespace {

constexpr double kEps = 1e-9;

// Base car-following mode of a vehicle driving on its own.
CfMode base_cf_mode(Approach approach) {
  return approach == Approach::Human ? CfMode::Krauss : CfMode::Acc;
}

double krauss_safe_speed(double ego_speed, double leader_speed,
                         double net_gap, const CfParams& cf) {
  const double tau = cf.krauss_headway;
  return leader_speed + (net_gap - leader_speed * tau) /
                            (ego_speed / cf.max_decel + tau);
}

}  // namespace

double departure_rate(const ScenarioConfig& config) {
  if (config.target_density <= 0.0 || config.speed_mean <= 0.0) return 0.0;
  const double t_expected =
      std::llround(config.trip_length / config.speed_mean);
  if (t_expected <= 0.0) return 0.0;
  const double arrival_probability = 1.0 / t_expected;
  const double target_vehicles = config.target_density *
                                 static_cast<double>(config.lanes) *
                                 config.road_length_km();
  return static_cast<double>(
      std::llround(arrival_probability * target_vehicles * 3600.0));
}

double sample_desired_speed(Rng& rng, const ScenarioConfig& config) {
  const double draw = rng.normal(
      config.speed_mean, config.speed_mean * config.speed_rel_stddev);
  return std::clamp(draw, config.speed_min, config.speed_max);
}

Simulation::Simulation(const ScenarioConfig& config) : world_(config) {
  if (!config.fuel_coeffs_file.empty()) {
    fuel_ = load_fuel_coefficients(config.fuel_coeffs_file);
  }
  if (!config.trace_file.empty()) {
    trace_ = std::make_unique<std::ofstream>(config.trace_file,
                                             std::ios::binary);
    *trace_ << "time,id,lane,position,speed,acceleration,role,platoon_id\n";
  }
  prefill();
}

void Simulation::prefill() {
  const ScenarioConfig& cfg = world_.config;
  const CfParams& cf = cfg.cf;
  const long target = std::llround(cfg.target_density *
                                   static_cast<double>(cfg.lanes) *
                                   cfg.road_length_km());
  long placed = 0;
  long attempts = 0;
  const long max_attempts = 50 * std::max<long>(target, 1);
  // Sorted positions per lane keep the rejection sampling O(n log n).
  std::vector<std::vector<double>> occupied(cfg.lanes);
  const double spacing = cf.vehicle_length + cf.min_gap + 1.0;
  while (placed < target && attempts < max_attempts) {
    ++attempts;
    const int lane = static_cast<int>(world_.rng.uniform_int(cfg.lanes));
    const double pos = world_.rng.uniform(cf.vehicle_length, cfg.road_length);
    const double desired = sample_desired_speed(world_.rng, cfg);

    auto& lane_pos = occupied[lane];
    const auto next = std::lower_bound(lane_pos.begin(), lane_pos.end(), pos);
    const bool fits =
        (next == lane_pos.end() || *next - pos >= spacing) &&
        (next == lane_pos.begin() || pos - *(next - 1) >= spacing);
    if (!fits) continue;
    lane_pos.insert(next, pos);

    const VehicleId id = world_.allocate_id();
    VehicleState v;
    v.id = id;
    v.desired_speed = desired;
    v.position = pos;
    v.lane = lane;
    v.speed = desired;
    v.cf_mode = base_cf_mode(cfg.approach);
    const double remaining =
        cfg.trip_length * (1.0 - world_.rng.uniform());  // (0, trip]
    const double arrival = std::min(
        cfg.road_length,
        std::ceil((pos + remaining) / cfg.ramp_interval) * cfg.ramp_interval);
    v.arrival_ramp = arrival;
    v.depart_ramp = arrival - cfg.trip_length;
    v.depart_time = 0.0;
    world_.vehicles.emplace(id, v);
    accum_[id].tracked = cfg.warmup <= 0.0;
    ++placed;
  }
  world_.spawned_total += placed;

  // Cap initial speeds to what the gap ahead allows.
  lanes_ = build_lane_lists();
  for (const auto& lane : lanes_) {
    for (std::size_t i = 1; i < lane.size(); ++i) {
      VehicleState& v = world_.vehicles.at(lane[i]);
      const VehicleState& ahead = world_.vehicles.at(lane[i - 1]);
      const double net =
          (ahead.position - cf.vehicle_length) - v.position - cf.min_gap;
      const double safe = krauss_safe_speed(v.speed, ahead.speed, net, cf);
      v.speed = std::clamp(std::min(v.speed, safe), 0.0, cf.max_speed);
    }
  }
}

Simulation::LaneLists Simulation::build_lane_lists() const {
  LaneLists lanes(world_.config.lanes);
  for (const auto& [id, v] : world_.vehicles) {
    lanes[v.lane].push_back(id);
  }
  for (auto& lane : lanes) {
    std::sort(lane.begin(), lane.end(), [this](VehicleId a, VehicleId b) {
      const double pa = world_.vehicles.at(a).position;
      const double pb = world_.vehicles.at(b).position;
      if (pa != pb) return pa > pb;  // front first
      return a < b;
    });
  }
  return lanes;
}

VehicleId Simulation::ahead_in_lane(
    int lane, double position,
    const std::unordered_set<VehicleId>& exclude) const {
  VehicleId best = kNoVehicle;
  double best_pos = 0.0;
  for (const auto& [id, v] : world_.vehicles) {
    if (v.lane != lane || v.position <= position || exclude.count(id)) {
      continue;
    }
    if (best == kNoVehicle || v.position < best_pos) {
      best = id;
      best_pos = v.position;
    }
  }
  return best;
}

VehicleId Simulation::behind_in_lane(
    int lane, double position,
    const std::unordered_set<VehicleId>& exclude) const {
  VehicleId best = kNoVehicle;
  double best_pos = 0.0;
  for (const auto& [id, v] : world_.vehicles) {
    if (v.lane != lane || v.position >= position || exclude.count(id)) {
      continue;
    }
    if (best == kNoVehicle || v.position > best_pos) {
      best = id;
      best_pos = v.position;
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Phase 1: formation

int Simulation::run_formation_if_due() {
  const ScenarioConfig& cfg = world_.config;
  if (!is_platooning(cfg.approach)) return 0;
  const FormationParams& fp = cfg.formation;
  int joins = 0;

  if (cfg.approach == Approach::CentralizedGreedy ||
      cfg.approach == Approach::CentralizedSolver) {
    if (world_.clock <= 0.0 ||
        std::fmod(world_.clock, fp.execution_interval) != 0.0) {
      return 0;
    }
    const CandidateScan scan = collect_candidates_centralized(world_, fp);
    if (cfg.approach == Approach::CentralizedSolver) {
      const ExactModel model =
          model_from_candidates(scan.searcher_ids, scan.entries);
      const AssignmentSolution sol =
          solve_exact(model, fp.solver_time_limit);
      const std::vector<CandidateEntry> pairs = selected_pairs(model, sol);
      joins = apply_solution(world_, pairs);
      record_execution(cfg.approach, scan, pairs, joins, sol.solve_time,
                       sol.gap);
    } else {
      const std::vector<CandidateEntry> pairs = greedy_select(scan.entries);
      joins = apply_solution(world_, pairs);
      record_execution(cfg.approach, scan, pairs, joins, 0.0, 0.0);
    }
    return joins;
  }

  // Distributed: every vehicle runs its own scan at depart_time + k * interval,
  // in ascending id order; later egos see the locks taken by earlier ones.
  std::vector<VehicleId> due;
  for (const auto& [id, v] : world_.vehicles) {
    if (!is_available_searcher(v)) continue;
    const double rel = world_.clock - v.depart_time;
    if (rel > 0.0 && std::fmod(rel, fp.execution_interval) == 0.0) {
      due.push_back(id);
    }
  }
  for (const VehicleId ego : due) {
    const auto it = world_.vehicles.find(ego);
    if (it == world_.vehicles.end() || !is_available_searcher(it->second)) {
      continue;  // locked by an earlier ego this step
    }
    const CandidateScan scan = collect_candidates_distributed(world_, ego, fp);
    const std::vector<CandidateEntry> pairs = greedy_select(scan.entries);
    const int triggered = apply_solution(world_, pairs);
    joins += triggered;
    record_execution(cfg.approach, scan, pairs, triggered, 0.0, 0.0);
  }
  return joins;
}

void Simulation::record_execution(Approach strategy,
                                  const CandidateScan& scan,
                                  std::span<const CandidateEntry> selected,
                                  int joins, double solve_time, double gap) {
  const ObjectiveBreakdown obj =
      assignment_objectives(scan.searcher_ids, scan.entries, selected);
  FormationExecutionRecord rec;
  rec.time = world_.clock;
  rec.strategy = strategy;
  rec.n_searchers = static_cast<int>(scan.searcher_ids.size());
  rec.candidates_found = scan.found;
  rec.candidates_filtered = scan.filtered;
  rec.joins_triggered = joins;
  rec.objective_full = obj.full;
  rec.objective_paper_convention = obj.paper_convention;
  rec.solve_time = solve_time;
  rec.gap = gap;
  ledger_.add_execution(rec);
  if (world_.clock >= world_.config.warmup) {
    for (std::size_t i = 0; i < scan.searcher_ids.size(); ++i) {
      ledger_.add_scan(scan.found_per_searcher[i],
                       scan.filtered_per_searcher[i]);
    }
  }
}

// ---------------------------------------------------------------------------
// Phase 2: maneuver completion

int Simulation::maneuver_step() {
  const CfParams& cf = world_.config.cf;
  int completed = 0;
  std::vector<VehicleId> joining;
  for (const auto& [id, v] : world_.vehicles) {
    if (v.maneuver && v.maneuver->completion_time <= world_.clock + kEps) {
      joining.push_back(id);
    }
  }
  for (const VehicleId id : joining) {
    VehicleState& searcher = world_.vehicles.at(id);
    const VehicleId target = searcher.maneuver->target;
    const auto ti = world_.vehicles.find(target);
    if (ti == world_.vehicles.end() ||
        ti->second.inbound_joiner != searcher.id) {
      abort_join(searcher);
      continue;
    }

    const auto pit = world_.platoons.find(target);
    const VehicleId tail_id =
        pit != world_.platoons.end() ? pit->second.members.back() : target;
    const VehicleState& tail = world_.vehicles.at(tail_id);
    const int lane = tail.lane;
    const double slot_front =
        tail.position - cf.vehicle_length - cf.cacc_gap;

    bool safe = slot_front - cf.vehicle_length >= 0.0;
    if (safe) {
      const VehicleId ahead =
          ahead_in_lane(lane, slot_front, {searcher.id});
      safe = ahead == tail_id;  // nobody drifted into the approach slot
    }
    if (safe) {
      for (const auto& [oid, ov] : world_.vehicles) {
        if (oid == searcher.id || oid == tail_id || ov.lane != lane) continue;
        if (std::abs(ov.position - slot_front) <
            cf.vehicle_length + cf.min_gap) {
          safe = false;
          break;
        }
      }
    }
    if (safe) {
      const VehicleId behind =
          behind_in_lane(lane, slot_front, {searcher.id});
      if (behind != kNoVehicle) {
        const VehicleState& b = world_.vehicles.at(behind);
        const double raw =
            (slot_front - cf.vehicle_length) - b.position;
        safe = raw >= cf.min_gap + 0.5 * b.speed;
      }
    }
    if (!safe) {  // hold the maneuver until the slot clears
      searcher.maneuver->completion_time =
          world_.clock + world_.config.step_length;
      continue;
    }

    searcher.position = slot_front;
    searcher.lane = lane;
    searcher.speed = tail.speed;
    searcher.acceleration = tail.acceleration;
    searcher.role = VehicleRole::Follower;
    searcher.cf_mode = CfMode::Cacc;
    searcher.maneuver.reset();
    searcher.platoon_id = target;

    VehicleState& leader = world_.vehicles.at(target);
    leader.inbound_joiner = kNoVehicle;
    if (pit != world_.platoons.end()) {
      pit->second.members.push_back(searcher.id);
      stamp_platoon_change(pit->second);
    } else {
      Platoon p;
      p.leader = target;
      p.members = {target, searcher.id};
      world_.platoons.emplace(target, p);
      leader.role = VehicleRole::Leader;
      leader.platoon_id = target;
      stamp_platoon_change(world_.platoons.at(target));
      auto& leader_accum = accum_[target];
      if (!leader_accum.time_to_platoon) {
        leader_accum.time_to_platoon = world_.clock - leader.depart_time;
      }
    }
    auto& searcher_accum = accum_[searcher.id];
    if (!searcher_accum.time_to_platoon) {
      searcher_accum.time_to_platoon = world_.clock - searcher.depart_time;
    }
    ++completed;
  }
  return completed;
}

void Simulation::abort_join(VehicleState& searcher) {
  searcher.maneuver.reset();
}

void Simulation::stamp_platoon_change(const Platoon& platoon) {
  for (const VehicleId m : platoon.members) {
    accum_[m].last_platoon_change = world_.clock;
  }
}

// ---------------------------------------------------------------------------
// Phase 3: lane changes

Simulation::LaneIndex Simulation::build_lane_index() const {
  LaneIndex index(world_.config.lanes);
  for (const auto& [id, v] : world_.vehicles) {
    index[v.lane].push_back({v.position, id});
  }
  for (auto& lane : index) std::sort(lane.begin(), lane.end());
  return index;
}

VehicleId Simulation::indexed_ahead(
    const LaneIndex& index, int lane, double position,
    const std::unordered_set<VehicleId>& exclude) const {
  const auto& l = index[lane];
  auto it = std::upper_bound(l.begin(), l.end(),
                             std::make_pair(position, ~VehicleId{0}));
  for (; it != l.end(); ++it) {
    if (!exclude.count(it->second)) return it->second;
  }
  return kNoVehicle;
}

VehicleId Simulation::indexed_behind(
    const LaneIndex& index, int lane, double position,
    const std::unordered_set<VehicleId>& exclude) const {
  const auto& l = index[lane];
  auto it = std::lower_bound(l.begin(), l.end(),
                             std::make_pair(position, VehicleId{0}));
  while (it != l.begin()) {
    --it;
    if (!exclude.count(it->second)) return it->second;
  }
  return kNoVehicle;
}

int Simulation::lane_change_step() {
  const ScenarioConfig& cfg = world_.config;
  const CfParams& cf = cfg.cf;
  int moves = 0;

  std::vector<VehicleId> order;
  order.reserve(world_.vehicles.size());
  for (const auto& [id, v] : world_.vehicles) order.push_back(id);
  std::sort(order.begin(), order.end(), [this](VehicleId a, VehicleId b) {
    const double pa = world_.vehicles.at(a).position;
    const double pb = world_.vehicles.at(b).position;
    if (pa != pb) return pa > pb;
    return a < b;
  });

  LaneIndex index = build_lane_index();
  auto reindex = [&index](int from, int to, double pos, VehicleId id) {
    auto& src = index[from];
    src.erase(std::find(src.begin(), src.end(), std::make_pair(pos, id)));
    auto& dst = index[to];
    dst.insert(std::lower_bound(dst.begin(), dst.end(),
                                std::make_pair(pos, id)),
               {pos, id});
  };

  for (const VehicleId id : order) {
    VehicleState& v = world_.vehicles.at(id);
    if (v.role == VehicleRole::Follower) continue;  // moves with its platoon

    std::unordered_set<VehicleId> exclude{id};
    std::vector<VehicleId> members{id};
    if (v.role == VehicleRole::Leader) {
      const Platoon& p = world_.platoons.at(v.platoon_id);
      members = p.members;
      exclude.insert(p.members.begin(), p.members.end());
    }

    const double want = std::min(v.desired_speed, cf.max_speed);
    const double att_cur = attainable_speed(index, v.lane, v.position,
                                            v.speed, v.desired_speed, exclude);

    auto unit_safe = [&](int lane) {
      for (const VehicleId m : members) {
        const VehicleState& mv = world_.vehicles.at(m);
        if (!lane_safe(index, lane, mv.position, mv.speed, exclude)) {
          return false;
        }
      }
      return true;
    };
    auto move_to = [&](int lane) {
      for (const VehicleId m : members) {
        VehicleState& mv = world_.vehicles.at(m);
        reindex(mv.lane, lane, mv.position, m);
        mv.lane = lane;
      }
      ++moves;
    };

    if (att_cur < want - 1.0 && v.lane + 1 < cfg.lanes) {
      const int left = v.lane + 1;
      if (attainable_speed(index, left, v.position, v.speed, v.desired_speed,
                           exclude) > att_cur + 0.5 &&
          unit_safe(left)) {
        move_to(left);
        continue;
      }
    }
    if (v.lane > 0) {
      const int right = v.lane - 1;
      if (attainable_speed(index, right, v.position, v.speed, v.desired_speed,
                           exclude) >= want - 0.5 &&
          unit_safe(right)) {
        move_to(right);
      }
    }
  }
  return moves;
}

double Simulation::attainable_speed(
    const LaneIndex& index, int lane, double position, double speed,
    double desired, const std::unordered_set<VehicleId>& exclude) const {
  const CfParams& cf = world_.config.cf;
  const double cap = std::min(desired, cf.max_speed);
  const VehicleId ahead = indexed_ahead(index, lane, position, exclude);
  if (ahead == kNoVehicle) return cap;
  const VehicleState& a = world_.vehicles.at(ahead);
  const double net =
      (a.position - cf.vehicle_length) - position - cf.min_gap;
  const double safe = krauss_safe_speed(speed, a.speed, net, cf);
  return std::clamp(safe, 0.0, cap);
}

bool Simulation::lane_safe(
    const LaneIndex& index, int lane, double position, double speed,
    const std::unordered_set<VehicleId>& exclude) const {
  const CfParams& cf = world_.config.cf;
  const VehicleId ahead = indexed_ahead(index, lane, position, exclude);
  if (ahead != kNoVehicle) {
    const VehicleState& a = world_.vehicles.at(ahead);
    const double net =
        (a.position - cf.vehicle_length) - position - cf.min_gap;
    if (net < 0.0) return false;
    if (speed > krauss_safe_speed(speed, a.speed, net, cf) + 0.1) {
      return false;
    }
  }
  const VehicleId behind = indexed_behind(index, lane, position, exclude);
  if (behind != kNoVehicle) {
    const VehicleState& b = world_.vehicles.at(behind);
    const double net =
        (position - cf.vehicle_length) - b.position - cf.min_gap;
    if (net < 0.0) return false;
    if (b.speed > krauss_safe_speed(b.speed, speed, net, cf) + 0.1) {
      return false;
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// Phases 4 and 5: car following and integration

void Simulation::apply_car_following() {
  const ScenarioConfig& cfg = world_.config;
  const CfParams& cf = cfg.cf;
  const double dt = cfg.step_length;
  lanes_ = build_lane_lists();
  staged_accel_.clear();

  for (const auto& lane : lanes_) {
    for (std::size_t i = 0; i < lane.size(); ++i) {
      const VehicleState& v = world_.vehicles.at(lane[i]);
      std::optional<LeaderInfo> leader;
      if (i > 0) {
        const VehicleState& a = world_.vehicles.at(lane[i - 1]);
        LeaderInfo info;
        info.speed = a.speed;
        info.net_gap =
            (a.position - cf.vehicle_length) - v.position - cf.min_gap;
        const auto sit = staged_accel_.find(a.id);
        info.accel = sit != staged_accel_.end() ? sit->second : a.acceleration;
        leader = info;
      }

      double a_cmd = 0.0;
      switch (v.cf_mode) {
        case CfMode::Krauss: {
          const double vn =
              krauss_next_speed(v.speed, v.desired_speed, leader, cf, dt);
          a_cmd = (vn - v.speed) / dt;
          break;
        }
        case CfMode::Acc:
          a_cmd = acc_acceleration(v.speed, v.desired_speed, leader, cf);
          break;
        case CfMode::Cacc: {
          const Platoon& p = world_.platoons.at(v.platoon_id);
          const auto mit =
              std::find(p.members.begin(), p.members.end(), v.id);
          const VehicleId pred_id = *(mit - 1);
          const VehicleState& pred = world_.vehicles.at(pred_id);
          const VehicleState& lead = world_.vehicles.at(p.leader);
          PlatoonContext ctx;
          ctx.gap = (pred.position - cf.vehicle_length) - v.position;
          ctx.predecessor_speed = pred.speed;
          ctx.predecessor_accel = staged_accel_.at(pred_id);
          ctx.leader_speed = lead.speed;
          ctx.leader_accel = staged_accel_.at(p.leader);
          a_cmd = cacc_acceleration(v.speed, ctx, cf);
          break;
        }
      }
      staged_accel_[v.id] = a_cmd;
    }
  }
}

void Simulation::integrate_and_check() {
  const ScenarioConfig& cfg = world_.config;
  const CfParams& cf = cfg.cf;
  const double dt = cfg.step_length;
  const double detector = cfg.road_length / 2.0;

  for (const auto& lane : lanes_) {
    double prev_new_pos = 0.0;
    bool has_prev = false;
    for (const VehicleId id : lane) {
      VehicleState& v = world_.vehicles.at(id);
      const double a =
          std::clamp(staged_accel_.at(id), -cf.max_decel, cf.max_accel);
      double v_new = std::clamp(v.speed + a * dt, 0.0, cf.max_speed);
      double p_new = v.position + v_new * dt;
      if (has_prev) {
        const double bound = prev_new_pos - cf.vehicle_length - cf.min_gap;
        if (p_new > bound) {
          p_new = std::max(v.position, bound);
          v_new = (p_new - v.position) / dt;
        }
      }
      if (world_.clock >= cfg.warmup && v.position < detector &&
          p_new >= detector) {
        ++detector_window_;
      }
      auto ait = accum_.find(id);
      if (ait != accum_.end()) ait->second.distance += p_new - v.position;

      v.acceleration = (v_new - v.speed) / dt;
      v.speed = v_new;
      v.position = p_new;

      if (has_prev &&
          prev_new_pos - cf.vehicle_length - p_new < cf.min_gap - 0.01) {
        std::ostringstream msg;
        msg << "min-gap violation at t=" << world_.clock << ", lane "
            << v.lane << ": vehicle " << id << " (pos " << p_new << ", v "
            << v_new << ", a " << v.acceleration << ", role "
            << static_cast<int>(v.role) << ", platoon " << v.platoon_id
            << ") behind front-bumper " << prev_new_pos << "; "
            << world_.vehicles.size() << " vehicles on road, "
            << world_.platoons.size() << " platoons, "
            << world_.deferred.size() << " queued";
        throw InvariantViolation(msg.str());
      }
      prev_new_pos = p_new;
      has_prev = true;
    }
  }
}

// ---------------------------------------------------------------------------
// Phase 6: arrivals

void Simulation::process_arrivals() {
  const ScenarioConfig& cfg = world_.config;
  const double dt = cfg.step_length;
  std::vector<VehicleId> arrived;
  for (const auto& [id, v] : world_.vehicles) {
    if (v.position >= v.arrival_ramp - kEps) arrived.push_back(id);
  }

  for (const VehicleId id : arrived) {
    VehicleState& v = world_.vehicles.at(id);
    auto& ac = accum_[id];
    if (ac.tracked) {
      VehicleTripRecord rec;
      rec.id = id;
      rec.desired_speed = v.desired_speed;
      rec.depart_time = v.depart_time;
      rec.arrival_time = world_.clock + dt;
      rec.expected_travel_time = cfg.trip_length / v.desired_speed;
      rec.real_travel_time = rec.arrival_time - rec.depart_time;
      rec.time_to_platoon = ac.time_to_platoon;
      rec.time_in_platoon = ac.time_in_platoon;
      rec.distance = ac.distance;
      rec.fuel_liters = ac.fuel_liters;
      rec.mean_speed = ac.samples > 0
                           ? ac.sum_speed / static_cast<double>(ac.samples)
                           : rec.distance / rec.real_travel_time;
      rec.mean_speed_deviation_ratio =
          ac.samples > 0 ? ac.sum_dev / static_cast<double>(ac.samples) : 0.0;
      rec.mean_abs_speed_deviation_ratio =
          ac.samples > 0 ? ac.sum_abs_dev / static_cast<double>(ac.samples)
                         : 0.0;
      ledger_.add_trip(rec);
    }

    switch (v.role) {
      case VehicleRole::Follower: {
        const VehicleId pid = v.platoon_id;
        Platoon& p = world_.platoons.at(pid);
        p.members.erase(std::find(p.members.begin(), p.members.end(), id));
        stamp_platoon_change(p);
        dissolve_platoon_if_single(pid);
        break;
      }
      case VehicleRole::Leader: {
        if (v.inbound_joiner != kNoVehicle) {
          const auto sit = world_.vehicles.find(v.inbound_joiner);
          if (sit != world_.vehicles.end()) abort_join(sit->second);
        }
        Platoon p = world_.platoons.at(id);
        world_.platoons.erase(id);
        p.members.erase(p.members.begin());
        if (p.members.size() == 1) {
          VehicleState& rest = world_.vehicles.at(p.members.front());
          rest.role = VehicleRole::Individual;
          rest.platoon_id = kNoVehicle;
          rest.cf_mode = base_cf_mode(cfg.approach);
          accum_[rest.id].last_platoon_change = world_.clock;
        } else {
          p.leader = p.members.front();
          for (const VehicleId m : p.members) {
            world_.vehicles.at(m).platoon_id = p.leader;
          }
          VehicleState& nl = world_.vehicles.at(p.leader);
          nl.role = VehicleRole::Leader;
          nl.cf_mode = base_cf_mode(cfg.approach);
          stamp_platoon_change(p);
          world_.platoons.emplace(p.leader, std::move(p));
        }
        break;
      }
      case VehicleRole::Individual: {
        if (v.inbound_joiner != kNoVehicle) {
          const auto sit = world_.vehicles.find(v.inbound_joiner);
          if (sit != world_.vehicles.end()) abort_join(sit->second);
        }
        if (v.maneuver) {
          const auto tit = world_.vehicles.find(v.maneuver->target);
          if (tit != world_.vehicles.end() &&
              tit->second.inbound_joiner == id) {
            tit->second.inbound_joiner = kNoVehicle;
          }
        }
        break;
      }
    }
    world_.vehicles.erase(id);
    accum_.erase(id);
    ++world_.arrived_total;
  }
}

void Simulation::dissolve_platoon_if_single(VehicleId platoon_id) {
  const auto pit = world_.platoons.find(platoon_id);
  if (pit == world_.platoons.end() || pit->second.members.size() > 1) return;
  VehicleState& v = world_.vehicles.at(pit->second.members.front());
  v.role = VehicleRole::Individual;
  v.platoon_id = kNoVehicle;
  v.cf_mode = base_cf_mode(world_.config.approach);
  accum_[v.id].last_platoon_change = world_.clock;
  world_.platoons.erase(pit);
}

// ---------------------------------------------------------------------------
// Phase 7: demand

int Simulation::spawn_step() {
  const ScenarioConfig& cfg = world_.config;
  int inserted = 0;

  // Deferred insertions first, oldest first. Only the head of each ramp's
  // queue merges per step; once a ramp refuses, the rest of its queue waits.
  std::unordered_set<double> blocked_ramps;
  for (auto it = world_.deferred.begin(); it != world_.deferred.end();) {
    if (!blocked_ramps.count(it->depart_ramp) &&
        try_insert(it->id, it->desired_speed, it->depart_ramp)) {
      it = world_.deferred.erase(it);
      ++inserted;
    } else {
      blocked_ramps.insert(it->depart_ramp);
      ++it;
    }
  }

  const double rate = departure_rate(cfg);
  const double expected = rate * cfg.step_length / 3600.0;
  long attempts = static_cast<long>(expected);
  const double fraction = expected - static_cast<double>(attempts);
  if (world_.rng.bernoulli(fraction)) ++attempts;

  std::vector<double> ramps;
  for (double r = 0.0; r + cfg.trip_length <= cfg.road_length + kEps;
       r += cfg.ramp_interval) {
    ramps.push_back(r);
  }

  for (long i = 0; i < attempts; ++i) {
    const VehicleId id = world_.allocate_id();
    const double desired = sample_desired_speed(world_.rng, cfg);
    const double ramp =
        ramps[world_.rng.uniform_int(static_cast<std::uint64_t>(ramps.size()))];
    ++world_.spawned_total;
    if (!blocked_ramps.count(ramp) && try_insert(id, desired, ramp)) {
      ++inserted;
    } else {
      world_.deferred.push_back({id, desired, ramp});
    }
  }
  return inserted;
}

bool Simulation::try_insert(VehicleId id, double desired_speed, double ramp) {
  const ScenarioConfig& cfg = world_.config;
  const CfParams& cf = cfg.cf;
  for (int lane = 0; lane < cfg.lanes; ++lane) {
    double v_ins = std::min(desired_speed, cf.max_speed);

    // The strict ahead/behind queries miss a vehicle sitting exactly on the
    // ramp, so reject any overlap with the insertion footprint first.
    bool occupied = false;
    for (const auto& [oid, ov] : world_.vehicles) {
      if (ov.lane == lane &&
          std::abs(ov.position - ramp) < cf.vehicle_length + cf.min_gap) {
        occupied = true;
        break;
      }
    }
    if (occupied) continue;

    const VehicleId ahead = ahead_in_lane(lane, ramp, {});
    if (ahead != kNoVehicle) {
      const VehicleState& a = world_.vehicles.at(ahead);
      const double net =
          (a.position - cf.vehicle_length) - ramp - cf.min_gap;
      if (net < 0.0) continue;
      const double safe = krauss_safe_speed(v_ins, a.speed, net, cf);
      v_ins = std::min(v_ins, safe);
      if (v_ins <= 0.0 || net < v_ins * cf.krauss_headway) continue;
    }
    const VehicleId behind = behind_in_lane(lane, ramp, {});
    if (behind != kNoVehicle) {
      const VehicleState& b = world_.vehicles.at(behind);
      const double net = (ramp - cf.vehicle_length) - b.position - cf.min_gap;
      if (net < 0.0 || net < b.speed * cf.krauss_headway) continue;
    }

    VehicleState v;
    v.id = id;
    v.desired_speed = desired_speed;
    v.position = ramp;
    v.lane = lane;
    v.speed = v_ins;
    v.cf_mode = base_cf_mode(cfg.approach);
    v.depart_time = world_.clock;
    v.depart_ramp = ramp;
    v.arrival_ramp = ramp + cfg.trip_length;
    world_.vehicles.emplace(id, v);
    auto& ac = accum_[id];
    ac.tracked = world_.clock >= cfg.warmup;
    ac.last_platoon_change = world_.clock;
    if (world_.clock >= cfg.warmup) ++departures_window_;
    return true;
  }
  return false;
}

// ---------------------------------------------------------------------------
// Phase 8: metrics

PlatoonPosition Simulation::platoon_position(const VehicleState& v) const {
  switch (v.role) {
    case VehicleRole::Individual:
      return PlatoonPosition::Solo;
    case VehicleRole::Leader:
      return PlatoonPosition::Lead;
    case VehicleRole::Follower: {
      const Platoon& p = world_.platoons.at(v.platoon_id);
      return p.members.back() == v.id ? PlatoonPosition::Last
                                      : PlatoonPosition::Middle;
    }
  }
  return PlatoonPosition::Solo;
}

double Simulation::gap_to_predecessor(VehicleId follower) const {
  const VehicleState& v = world_.vehicles.at(follower);
  const Platoon& p = world_.platoons.at(v.platoon_id);
  const auto mit = std::find(p.members.begin(), p.members.end(), follower);
  const VehicleState& pred = world_.vehicles.at(*(mit - 1));
  return (pred.position - world_.config.cf.vehicle_length) - v.position;
}

void Simulation::sample_metrics() {
  const ScenarioConfig& cfg = world_.config;
  const double dt = cfg.step_length;

  for (const auto& [id, v] : world_.vehicles) {
    auto& ac = accum_[id];
    if (ac.tracked) {
      const double dev = speed_deviation_ratio(v.speed, v.desired_speed);
      ac.sum_dev += dev;
      ac.sum_abs_dev += std::abs(dev);
      ac.sum_speed += v.speed;
      ++ac.samples;
      ac.fuel_liters += fuel_step_liters(v.speed, v.acceleration, dt,
                                         platoon_position(v), fuel_);
      const bool in_platoon =
          v.role == VehicleRole::Follower ||
          (v.role == VehicleRole::Leader &&
           world_.platoons.at(v.platoon_id).size() >= 2);
      if (in_platoon) ac.time_in_platoon += dt;
    }
    if (v.role == VehicleRole::Follower &&
        world_.clock - ac.last_platoon_change >= 60.0) {
      if (std::abs(gap_to_predecessor(id) - cfg.cf.cacc_gap) > 0.1) {
        ledger_.note_cacc_gap_violation();
      }
    }
  }

  const double t_end = world_.clock + dt;
  if (t_end >= cfg.warmup + cfg.sample_interval &&
      std::fmod(t_end - cfg.warmup, cfg.sample_interval) == 0.0) {
    WorldSample s;
    s.time = t_end;
    s.vehicle_count = static_cast<long>(world_.vehicles.size());
    s.density = static_cast<double>(s.vehicle_count) /
                (static_cast<double>(cfg.lanes) * cfg.road_length_km());
    const double scale = 3600.0 / cfg.sample_interval;
    s.departure_flow_vph = static_cast<double>(departures_window_) * scale;
    s.detector_flow_vph = static_cast<double>(detector_window_) * scale;
    double speed_sum = 0.0;
    for (const auto& [id, v] : world_.vehicles) {
      speed_sum += v.speed;
      const int size =
          v.platoon_id != kNoVehicle
              ? static_cast<int>(world_.platoons.at(v.platoon_id).size())
              : 1;
      ++s.platoon_size_hist[size];
    }
    s.mean_speed = s.vehicle_count > 0
                       ? speed_sum / static_cast<double>(s.vehicle_count)
                       : 0.0;
    ledger_.add_sample(s);
    departures_window_ = 0;
    detector_window_ = 0;
  }

  if (trace_) {
    for (const auto& [id, v] : world_.vehicles) write_trace_row(v);
  }
}

void Simulation::write_trace_row(const VehicleState& v) {
  static const char* role_names[] = {"individual", "leader", "follower"};
  *trace_ << csv_format(world_.clock + world_.config.step_length) << ','
          << v.id << ',' << v.lane << ',' << csv_format(v.position) << ','
          << csv_format(v.speed) << ',' << csv_format(v.acceleration) << ','
          << role_names[static_cast<int>(v.role)] << ',' << v.platoon_id
          << '\n';
}

// ---------------------------------------------------------------------------

void Simulation::check_conservation() const {
  const long on_road = static_cast<long>(world_.vehicles.size());
  const long queued = static_cast<long>(world_.deferred.size());
  if (world_.spawned_total != world_.arrived_total + on_road + queued) {
    std::ostringstream msg;
    msg << "vehicle conservation broken at t=" << world_.clock
        << ": spawned " << world_.spawned_total << " != arrived "
        << world_.arrived_total << " + on-road " << on_road << " + queued "
        << queued;
    throw InvariantViolation(msg.str());
  }
}

void Simulation::step() {
  run_formation_if_due();
  maneuver_step();
  lane_change_step();
  apply_car_following();
  integrate_and_check();
  process_arrivals();
  spawn_step();
  sample_metrics();
  world_.clock += world_.config.step_length;
  check_conservation();
}

void Simulation::run() {
  while (world_.clock < world_.config.sim_duration - kEps) {
    step();
  }
}

}  // namespace convoy
