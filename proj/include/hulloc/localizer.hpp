#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "hulloc/geometry.hpp"
#include "hulloc/world.hpp"

// The opportunistic update itself: enumerate triangulation sets from measured
// distances only, gate them (admissible volumes, relative inclusion error,
// minimum beacon weight), and apply the convex estimate update.

namespace hulloc::localizer {

enum class UpdateMode { FirstSet, AllSets };

struct AlgorithmConfig {
  // minimum barycentric weight a beacon must carry for its set to be accepted
  double alpha = 0.01;
  // self-weight used whenever at least one set is accepted (alpha_k = beta)
  double beta = 0.01;
  // relative inclusion-error gate in noisy mode
  double epsilon = 0.20;
  // inclusion tolerance in noiseless mode
  double noiseless_tolerance = 1e-9;
  double interior_floor = 1e-12;
  UpdateMode update_mode = UpdateMode::AllSets;
  // restrict updates to the lowest-id robot that found a set this iteration
  bool max_one_robot_per_iteration = false;
  // the three robustness modifications: admissible-sign screen, relative
  // inclusion-error gate, weight renormalization
  bool m1_sign_screen = true;
  bool m2_error_gate = true;
  bool m3_normalize = true;
  // optional alpha_k schedule; default is the constant beta
  std::function<double(int)> alpha_schedule;

  double alpha_k(int iteration) const {
    return alpha_schedule ? alpha_schedule(iteration) : beta;
  }
};

struct TriangulationCandidate {
  std::vector<int> members;   // node ids, ascending, size m+1
  std::vector<double> weights;  // barycentric weights, parallel to members
  std::vector<int> beacon_members;
  double relative_error = 0.0;
};

// One committed convex update. robot_weights/beacon_weights carry the raw
// barycentric weights (the update scales them by 1 - alpha_k), so
// alpha_k + (1 - alpha_k) * (sum p + sum b) == 1.
struct UpdateRecord {
  int robot_id = 0;
  int iteration = 0;
  double alpha_k = 0.0;
  std::vector<std::pair<int, double>> robot_weights;
  std::vector<std::pair<int, double>> beacon_weights;
  TriangulationCandidate candidate;
  Vec3 applied_motion = Vec3::Zero();  // measured motion added after the blend
};

struct EstimateState {
  std::vector<Vec3> estimates;  // indexed by robot id
  int iteration = 0;
};

struct DiscoveryStats {
  int subsets_considered = 0;
  int missing_pair_data = 0;   // subsets skipped: some member pair unmeasured
  int degenerate = 0;          // inadmissible or zero volumes
  int failed_inclusion = 0;
  int failed_beacon_gate = 0;  // a beacon's weight fell below alpha
};

// Enumerate the (m+1)-subsets of neighbor_ids in lexicographic id order and
// return those passing the inclusion and beacon-weight gates. Uses measured
// distances only: robot->member from the robot's own measurements, member
// pairs from the lower-id member's measurement.
// max_sets > 0 stops the enumeration once that many sets were accepted.
std::vector<TriangulationCandidate> find_triangulation_sets(
    int robot_id, const std::vector<int>& neighbor_ids, const World& world,
    const RangingTable& table, const AlgorithmConfig& cfg,
    DiscoveryStats* stats = nullptr, int max_sets = 0);

// Convex part of the update: alpha_k * current + (1 - alpha_k) * sum of
// weighted member positions (estimates for robots, true positions for
// beacons). Beacon ids index beacon_positions at id - n_robots.
Vec3 convex_blend(const Vec3& current, const TriangulationCandidate& cand,
                  const std::vector<Vec3>& robot_estimates,
                  const std::vector<Vec3>& beacon_positions, int n_robots,
                  double alpha_k);

// Full single-set update: convex blend plus the measured motion.
Vec3 update_estimate(const Vec3& current, const TriangulationCandidate& cand,
                     const std::vector<Vec3>& robot_estimates,
                     const std::vector<Vec3>& beacon_positions, int n_robots,
                     double alpha_k, const Vec3& measured_motion);

struct IterationResult {
  std::vector<UpdateRecord> records;  // commit order
  std::vector<int> neighbor_counts;   // per robot, at discovery time
  std::vector<MotionSample> motions;  // per robot
  DiscoveryStats discovery;           // aggregated over robots
};

// One algorithm iteration: discover candidates at the current (time-k)
// configuration, advance the world one motion step, then commit updates in
// robot-id order (chained sets within a robot apply in discovery order) and
// add each robot's measured motion. Estimates read during commits are live,
// so the committed state equals the per-record system matrices applied in
// order.
IterationResult run_iteration(World& world, EstimateState& est,
                              const AlgorithmConfig& cfg, RangingTable& table);

}  // namespace hulloc::localizer
