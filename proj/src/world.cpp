#include "hulloc/world.hpp"

#include <cmath>
#include <stdexcept>

namespace hulloc {

namespace {

constexpr double kTwoPi = 6.283185307179586;
constexpr int kPurposeCount = 6;  // StreamPurpose values 1..6

int purpose_slot(StreamPurpose p) { return static_cast<int>(p) - 1; }

}  // namespace

Vec3 polar_to_vec(const PolarMotion& p, int dim, int motion_dim, const Vec3& line_axis) {
  if (motion_dim <= 0 || p.distance == 0.0) return Vec3::Zero();
  if (motion_dim == 1) return p.line_sign * p.distance * line_axis;
  if (motion_dim == 2 || dim == 2)
    return Vec3(p.distance * std::cos(p.azimuth), p.distance * std::sin(p.azimuth), 0.0);
  // free motion in space
  const double sp = std::sin(p.polar);
  return p.distance * Vec3(sp * std::cos(p.azimuth), sp * std::sin(p.azimuth), std::cos(p.polar));
}

MotionSample measure_motion(const PolarMotion& true_polar, int dim, int motion_dim,
                            const Vec3& line_axis, double cumulative_distance,
                            const NoiseConfig& noise, RngStream& stream) {
  MotionSample s;
  s.true_motion = polar_to_vec(true_polar, dim, motion_dim, line_axis);
  switch (noise.model) {
    case NoiseModel::None:
      s.measured_motion = s.true_motion;
      break;
    case NoiseModel::Model1: {
      const double scale = std::sqrt(std::max(0.0, cumulative_distance));
      PolarMotion m = true_polar;
      m.distance = std::max(0.0, true_polar.distance + stream.normal(0.0, noise.kd * scale));
      if (motion_dim >= 2) m.azimuth = true_polar.azimuth + stream.normal(0.0, noise.ktheta * scale);
      if (motion_dim >= 3 && dim == 3)
        m.polar = true_polar.polar + stream.normal(0.0, noise.ktheta * scale);
      s.measured_motion = polar_to_vec(m, dim, motion_dim, line_axis);
      break;
    }
    case NoiseModel::Model2: {
      s.measured_motion = s.true_motion;
      const double f = noise.proportional_fraction;
      for (int c = 0; c < dim; ++c)
        s.measured_motion[c] = s.true_motion[c] * (1.0 + stream.uniform(-f, f));
      break;
    }
  }
  return s;
}

void RangingTable::reset(int n_nodes) {
  n_ = n_nodes;
  values_.assign(static_cast<size_t>(n_) * n_, 0.0);
  present_.assign(static_cast<size_t>(n_) * n_, 0);
}

void RangingTable::put(int from, int to, double measured) {
  values_[static_cast<size_t>(from) * n_ + to] = measured;
  present_[static_cast<size_t>(from) * n_ + to] = 1;
}

std::optional<double> RangingTable::measured(int from, int to) const {
  const size_t k = static_cast<size_t>(from) * n_ + to;
  if (from < 0 || to < 0 || from >= n_ || to >= n_ || !present_[k]) return std::nullopt;
  return values_[k];
}

std::optional<double> RangingTable::reported(int i, int j) const {
  return measured(std::min(i, j), std::max(i, j));
}

World::World(const WorldConfig& cfg, const NoiseConfig& noise) : cfg_(cfg), noise_(noise) {
  if (cfg_.dim < 1 || cfg_.dim > 3) throw std::domain_error("world dimension must be 1, 2 or 3");
  if (cfg_.n_robots < 1) throw std::domain_error("need at least one robot");
  if (cfg_.n_beacons < 0) throw std::domain_error("negative beacon count");

  const int n = cfg_.n_robots + cfg_.n_beacons;
  streams_.reserve(static_cast<size_t>(n) * kPurposeCount);
  for (int id = 0; id < n; ++id)
    for (int p = 1; p <= kPurposeCount; ++p)
      streams_.emplace_back(derive_seed(cfg_.rng_seed, static_cast<std::uint64_t>(p), id));

  nodes_.resize(n);
  for (int id = 0; id < n; ++id) {
    NodeState& node = nodes_[id];
    node.id = id;
    node.role = id < cfg_.n_robots ? Role::Robot : Role::Beacon;
    if (node.role == Role::Robot) {
      node.motion_dim = robot_motion_dim();
      RngStream& s = stream(id, StreamPurpose::Placement);
      for (int c = 0; c < cfg_.dim; ++c)
        node.true_position[c] = s.uniform(cfg_.region.lo[c], cfg_.region.hi[c]);
    } else {
      node.motion_dim = cfg_.beacon_motion == BeaconMotion::Static ? 0 : cfg_.beacon_motion_dim;
      if (id == cfg_.n_robots) {
        node.true_position = cfg_.region.center();
      } else {
        // extra beacons beyond the first are placed uniformly at random
        RngStream& s = stream(id, StreamPurpose::Placement);
        for (int c = 0; c < cfg_.dim; ++c)
          node.true_position[c] = s.uniform(cfg_.region.lo[c], cfg_.region.hi[c]);
      }
      if (cfg_.beacon_motion == BeaconMotion::Scripted && cfg_.beacon_script)
        node.true_position = cfg_.beacon_script(id - cfg_.n_robots, 0);
    }
  }
}

int World::robot_motion_dim() const {
  return cfg_.robot_motion_dim < 0 ? cfg_.dim : cfg_.robot_motion_dim;
}

RngStream& World::stream(int node_id, StreamPurpose purpose) {
  return streams_[static_cast<size_t>(node_id) * kPurposeCount + purpose_slot(purpose)];
}

double World::true_distance(int i, int j) const {
  return (nodes_.at(i).true_position - nodes_.at(j).true_position).norm();
}

std::vector<int> World::neighbors(int i) const {
  std::vector<int> out;
  for (int j = 0; j < node_count(); ++j)
    if (j != i && true_distance(i, j) <= cfg_.comm_radius) out.push_back(j);
  return out;
}

double World::noisy_range(int from, double true_d) {
  RngStream& s = stream(from, StreamPurpose::Ranging);
  double measured = true_d;
  switch (noise_.model) {
    case NoiseModel::None:
      break;
    case NoiseModel::Model1:
      measured = true_d + s.normal(0.0, noise_.kr * std::sqrt(double(iteration_)));
      break;
    case NoiseModel::Model2:
      measured = true_d * (1.0 + s.uniform(-noise_.proportional_fraction,
                                           noise_.proportional_fraction));
      break;
  }
  return std::max(0.0, measured);
}

DistanceMeasurement World::measure_distance(int from, int to) {
  DistanceMeasurement m;
  m.from = from;
  m.to = to;
  m.true_distance = true_distance(from, to);
  if (m.true_distance > cfg_.comm_radius)
    throw std::out_of_range("ranging target outside comm radius");
  m.measured = noisy_range(from, m.true_distance);
  return m;
}

void World::fill_ranging_table(RangingTable& table) {
  const double pair_range = cfg_.comm_radius * cfg_.pair_range_factor;
  table.reset(node_count());
  for (int from = 0; from < node_count(); ++from) {
    for (int to = 0; to < node_count(); ++to) {
      if (to == from || true_distance(from, to) > pair_range) continue;
      table.put(from, to, noisy_range(from, true_distance(from, to)));
    }
  }
}

std::vector<MotionSample> World::step() {
  std::vector<MotionSample> samples(cfg_.n_robots);
  for (int id = 0; id < node_count(); ++id) {
    NodeState& node = nodes_[id];
    if (node.role == Role::Beacon) {
      if (cfg_.beacon_motion == BeaconMotion::Scripted && cfg_.beacon_script) {
        const Vec3 next = cfg_.beacon_script(id - cfg_.n_robots, iteration_ + 1);
        node.cumulative_distance += (next - node.true_position).norm();
        node.true_position = next;
      }
      continue;
    }

    if (node.motion_dim == 0) continue;  // static robot, nothing to draw

    RngStream& motion = stream(id, StreamPurpose::Motion);
    PolarMotion polar;
    Vec3 displacement = Vec3::Zero();
    // rejection-resample until the step stays inside the region; terminates
    // with probability one since arbitrarily short steps are always drawn
    do {
      polar.distance = motion.uniform(0.0, cfg_.d_max);
      if (node.motion_dim == 1) {
        polar.line_sign = motion.uniform(0.0, 1.0) < 0.5 ? -1.0 : 1.0;
      } else if (node.motion_dim >= 2) {
        polar.azimuth = motion.uniform(0.0, kTwoPi);
        if (node.motion_dim >= 3 && cfg_.dim == 3)
          polar.polar = std::acos(motion.uniform(-1.0, 1.0));
      }
      displacement = polar_to_vec(polar, cfg_.dim, node.motion_dim, cfg_.line_axis);
    } while (!cfg_.region.contains(node.true_position + displacement, cfg_.dim));

    samples[id] = measure_motion(polar, cfg_.dim, node.motion_dim, cfg_.line_axis,
                                 node.trip_distance, noise_,
                                 stream(id, StreamPurpose::Odometry));
    node.true_position += displacement;
    node.cumulative_distance += polar.distance;
    node.trip_distance += polar.distance;
  }
  ++iteration_;
  return samples;
}

bool World::sample_drop(int robot_id) {
  if (cfg_.drop_probability <= 0.0) return false;
  return stream(robot_id, StreamPurpose::Drop).bernoulli(cfg_.drop_probability);
}

void World::reset_odometry_trip(int robot_id) {
  nodes_.at(robot_id).trip_distance = 0.0;
}

void World::set_true_position(int id, const Vec3& p) {
  if (!cfg_.region.contains(p, cfg_.dim))
    throw std::invalid_argument("position outside the region");
  nodes_.at(id).true_position = p;
}

}  // namespace hulloc
