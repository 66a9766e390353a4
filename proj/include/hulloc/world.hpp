#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "hulloc/rng.hpp"

// Ground-truth world: node placement, the random waypoint-style motion model,
// and noisy odometry/ranging measurements. Trailing coordinates beyond the
// working dimension stay zero, so a single 3-vector type serves m in {1,2,3}.

namespace hulloc {

using Vec3 = Eigen::Vector3d;

enum class Role { Robot, Beacon };

struct NodeState {
  int id = 0;
  Role role = Role::Robot;
  Vec3 true_position = Vec3::Zero();
  double cumulative_distance = 0.0;  // total true distance travelled
  // Distance travelled since the last successful location update; drives the
  // odometry noise variance and is cleared by reset_odometry_trip. Equals
  // cumulative_distance until the first update.
  double trip_distance = 0.0;
  int motion_dim = 0;  // dimension of this node's motion subspace
};

enum class NoiseModel { None, Model1, Model2 };

struct NoiseConfig {
  NoiseModel model = NoiseModel::None;
  // Model1 gains: odometry distance / heading noise grows with travelled
  // distance (sigma^2 = k^2 * D), ranging noise with the iteration count
  // (sigma^2 = kr^2 * iter).
  double kd = 0.0;
  double ktheta = 0.0;
  double kr = 0.0;
  // Model2: each measured component is scaled by (1 + U(-f, f)).
  double proportional_fraction = 0.0;
};

struct Box {
  Vec3 lo = Vec3::Zero();
  Vec3 hi = Vec3::Zero();

  bool contains(const Vec3& p, int dim) const {
    for (int c = 0; c < dim; ++c)
      if (p[c] < lo[c] || p[c] > hi[c]) return false;
    return true;
  }
  Vec3 center() const { return 0.5 * (lo + hi); }
  double max_extent(int dim) const {
    double e = 0.0;
    for (int c = 0; c < dim; ++c) e = std::max(e, hi[c] - lo[c]);
    return e;
  }
  static Box square(double side, int dim) {
    Box b;
    for (int c = 0; c < dim; ++c) b.hi[c] = side;
    return b;
  }
};

enum class BeaconMotion { Static, Scripted };

struct WorldConfig {
  int dim = 2;  // m
  Box region = Box::square(20.0, 2);
  double comm_radius = 2.0;
  double d_max = 5.0;
  int n_robots = 5;
  int n_beacons = 1;
  // Pair measurements (member-to-member distances exchanged through a common
  // neighbor) are available up to pair_range_factor * comm_radius. Two nodes
  // jointly in some robot's radius are at most 2r apart, so the default covers
  // every triangulation-set pair; 1.0 restricts ranging to one hop.
  double pair_range_factor = 2.0;
  // Motion subspace for robots: dim (free) by default; 1 restricts every robot
  // to a line through its start point along line_axis (parallel lines).
  int robot_motion_dim = -1;
  Vec3 line_axis = Vec3(1.0, 0.0, 0.0);
  BeaconMotion beacon_motion = BeaconMotion::Static;
  int beacon_motion_dim = 0;  // declared dimension when scripted
  // position of beacon b at iteration k; must stay inside the region
  std::function<Vec3(int, int)> beacon_script;
  double drop_probability = 0.0;  // per robot per iteration comm dropout
  std::uint64_t rng_seed = 0;
};

// Polar parameters of one motion step. azimuth is used for motion in 2+
// dimensions, polar (angle from the +z axis) only for free 3-D motion,
// line_sign only for 1-D motion along line_axis.
struct PolarMotion {
  double distance = 0.0;
  double azimuth = 0.0;
  double polar = 1.5707963267948966;  // pi/2 keeps z = 0
  double line_sign = 1.0;
};

Vec3 polar_to_vec(const PolarMotion& p, int dim, int motion_dim, const Vec3& line_axis);

struct MotionSample {
  Vec3 true_motion = Vec3::Zero();
  Vec3 measured_motion = Vec3::Zero();  // what odometry reports
};

// Odometry measurement of a true step: Model1 perturbs the polar parameters
// (distance and angles) with travelled-distance-scaled Gaussians, Model2
// scales each Cartesian component. cumulative_distance is the value *before*
// this step.
MotionSample measure_motion(const PolarMotion& true_polar, int dim, int motion_dim,
                            const Vec3& line_axis, double cumulative_distance,
                            const NoiseConfig& noise, RngStream& stream);

struct DistanceMeasurement {
  int from = 0;
  int to = 0;
  double true_distance = 0.0;
  double measured = 0.0;  // clamped at zero
};

// All pairwise range measurements taken at one iteration. Presence is limited
// to pairs within the pair ranging reach (pair_range_factor * comm_radius when
// filled by the world). reported(i, j) resolves the measurement the lower-id
// endpoint took of the pair, the convention used when an updating robot needs
// a distance between two other nodes.
class RangingTable {
 public:
  void reset(int n_nodes);
  void put(int from, int to, double measured);
  std::optional<double> measured(int from, int to) const;
  std::optional<double> reported(int i, int j) const;

 private:
  int n_ = 0;
  std::vector<double> values_;
  std::vector<char> present_;
};

class World {
 public:
  World(const WorldConfig& cfg, const NoiseConfig& noise);

  int dim() const { return cfg_.dim; }
  int iteration() const { return iteration_; }
  int node_count() const { return static_cast<int>(nodes_.size()); }
  int robot_count() const { return cfg_.n_robots; }
  int beacon_count() const { return cfg_.n_beacons; }
  bool is_beacon(int id) const { return id >= cfg_.n_robots; }
  const WorldConfig& config() const { return cfg_; }
  const NoiseConfig& noise_config() const { return noise_; }

  const NodeState& node(int id) const { return nodes_.at(id); }
  const Vec3& true_position(int id) const { return nodes_.at(id).true_position; }
  double true_distance(int i, int j) const;

  // ids of every node within the comm radius of i (closed ball), excluding i
  std::vector<int> neighbors(int i) const;

  // One ranging measurement i -> j at the current iteration. Throws
  // std::out_of_range if j is outside i's comm radius.
  DistanceMeasurement measure_distance(int from, int to);

  // Fill table with every directed measurement up to pair_range_factor *
  // comm_radius, (from, to) ascending. The wider cutoff serves member-pair
  // distances; single measurements and neighbor discovery stay at comm_radius.
  void fill_ranging_table(RangingTable& table);

  // Advance every node one motion step (rejection-resampled to stay in the
  // region); returns one sample per robot, indexed by robot id.
  std::vector<MotionSample> step();

  // True when robot i's communications drop this iteration (draws only if the
  // configured probability is positive).
  bool sample_drop(int robot_id);

  // Clears robot i's odometry trip counter; called when a location update
  // anchors the estimate, so dead-reckoning noise accrues from the fix.
  void reset_odometry_trip(int robot_id);

  // Scenario hook: pin a node to an exact position (must lie in the region).
  void set_true_position(int id, const Vec3& p);

  RngStream& stream(int node_id, StreamPurpose purpose);

 private:
  int robot_motion_dim() const;
  double noisy_range(int from, double true_d);

  WorldConfig cfg_;
  NoiseConfig noise_;
  std::vector<NodeState> nodes_;
  std::vector<RngStream> streams_;  // node-major, one per purpose
  int iteration_ = 0;
};

}  // namespace hulloc
