#include "hulloc/localizer.hpp"

#include <algorithm>
#include <stdexcept>

namespace hulloc::localizer {

namespace {

// visit k-subsets of {0..n-1} in lexicographic order until fn returns false
template <typename Fn>
void for_each_combination(int n, int k, Fn&& fn) {
  std::vector<int> idx(k);
  for (int i = 0; i < k; ++i) idx[i] = i;
  while (true) {
    if (!fn(idx)) return;
    int i = k - 1;
    while (i >= 0 && idx[i] == n - k + i) --i;
    if (i < 0) return;
    ++idx[i];
    for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

}  // namespace

std::vector<TriangulationCandidate> find_triangulation_sets(
    int robot_id, const std::vector<int>& neighbor_ids, const World& world,
    const RangingTable& table, const AlgorithmConfig& cfg, DiscoveryStats* stats,
    int max_sets) {
  std::vector<TriangulationCandidate> out;
  const int m = world.dim();
  const int set_size = m + 1;
  const int n = static_cast<int>(neighbor_ids.size());
  if (n < set_size) return out;  // not enough neighbors, case (i)

  DiscoveryStats local;
  DiscoveryStats& st = stats ? *stats : local;

  const bool noisy = world.noise_config().model != NoiseModel::None;
  geometry::InclusionOptions opt;
  opt.tolerance = (noisy && cfg.m2_error_gate) ? cfg.epsilon : cfg.noiseless_tolerance;
  opt.interior_floor = cfg.interior_floor;
  opt.sign_screen = cfg.m1_sign_screen;

  geometry::SquaredDistanceMatrix dm(m);
  std::vector<double> cand_sq(set_size);

  for_each_combination(n, set_size, [&](const std::vector<int>& idx) {
    ++st.subsets_considered;

    // member pair distances, reported by the lower-id member
    for (int a = 0; a < set_size; ++a) {
      for (int b = a + 1; b < set_size; ++b) {
        const auto d = table.reported(neighbor_ids[idx[a]], neighbor_ids[idx[b]]);
        if (!d) {
          ++st.missing_pair_data;
          return true;
        }
        dm.set(a, b, *d * *d);
      }
    }
    for (int a = 0; a < set_size; ++a) {
      const auto d = table.measured(robot_id, neighbor_ids[idx[a]]);
      if (!d) {
        ++st.missing_pair_data;
        return true;
      }
      cand_sq[a] = *d * *d;
    }

    const geometry::InclusionResult incl = geometry::inclusion_test(dm, cand_sq, opt);
    if (incl.verdict == geometry::Verdict::Degenerate) {
      ++st.degenerate;
      return true;
    }
    if (incl.verdict != geometry::Verdict::Inside) {
      ++st.failed_inclusion;
      return true;
    }

    TriangulationCandidate cand;
    cand.relative_error = incl.relative_error;
    cand.weights = geometry::barycentric_coordinates(incl, cfg.m3_normalize).weights;
    cand.members.resize(set_size);
    for (int a = 0; a < set_size; ++a) {
      cand.members[a] = neighbor_ids[idx[a]];
      if (world.is_beacon(cand.members[a])) cand.beacon_members.push_back(cand.members[a]);
    }

    for (int b : cand.beacon_members) {
      const auto pos = std::find(cand.members.begin(), cand.members.end(), b);
      if (cand.weights[pos - cand.members.begin()] < cfg.alpha) {
        ++st.failed_beacon_gate;
        return true;
      }
    }
    out.push_back(std::move(cand));
    return max_sets <= 0 || static_cast<int>(out.size()) < max_sets;
  });
  return out;
}

Vec3 convex_blend(const Vec3& current, const TriangulationCandidate& cand,
                  const std::vector<Vec3>& robot_estimates,
                  const std::vector<Vec3>& beacon_positions, int n_robots,
                  double alpha_k) {
  Vec3 mix = Vec3::Zero();
  for (size_t a = 0; a < cand.members.size(); ++a) {
    const int id = cand.members[a];
    const Vec3& p = id < n_robots ? robot_estimates[id] : beacon_positions[id - n_robots];
    mix += cand.weights[a] * p;
  }
  return alpha_k * current + (1.0 - alpha_k) * mix;
}

Vec3 update_estimate(const Vec3& current, const TriangulationCandidate& cand,
                     const std::vector<Vec3>& robot_estimates,
                     const std::vector<Vec3>& beacon_positions, int n_robots,
                     double alpha_k, const Vec3& measured_motion) {
  return convex_blend(current, cand, robot_estimates, beacon_positions, n_robots, alpha_k) +
         measured_motion;
}

IterationResult run_iteration(World& world, EstimateState& est,
                              const AlgorithmConfig& cfg, RangingTable& table) {
  const int n_robots = world.robot_count();
  if (static_cast<int>(est.estimates.size()) != n_robots)
    throw std::invalid_argument("estimate vector size does not match robot count");

  IterationResult res;
  res.neighbor_counts.assign(n_robots, 0);
  const int k = world.iteration();
  const double alpha_k = cfg.alpha_k(k);

  // discovery at the time-k configuration
  world.fill_ranging_table(table);
  std::vector<std::vector<TriangulationCandidate>> accepted(n_robots);
  for (int i = 0; i < n_robots; ++i) {
    std::vector<int> nbrs = world.neighbors(i);
    res.neighbor_counts[i] = static_cast<int>(nbrs.size());
    if (world.sample_drop(i)) continue;
    const int cap = cfg.update_mode == UpdateMode::FirstSet ? 1 : 0;
    accepted[i] = find_triangulation_sets(i, nbrs, world, table, cfg, &res.discovery, cap);
  }
  if (cfg.max_one_robot_per_iteration) {
    bool found = false;
    for (int i = 0; i < n_robots; ++i) {
      if (found)
        accepted[i].clear();
      else if (!accepted[i].empty())
        found = true;
    }
  }

  std::vector<Vec3> beacon_positions(world.beacon_count());
  for (int b = 0; b < world.beacon_count(); ++b)
    beacon_positions[b] = world.true_position(n_robots + b);

  // an update anchors the estimate at the time-k position, so dead-reckoning
  // noise restarts from here
  for (int i = 0; i < n_robots; ++i)
    if (!accepted[i].empty()) world.reset_odometry_trip(i);

  // motion happens after measurement
  res.motions = world.step();

  // Commit convex blends in robot-id order against the live estimate vector,
  // then add measured motion once per robot. This matches applying the
  // per-record system matrices left to right followed by the motion input.
  for (int i = 0; i < n_robots; ++i) {
    for (TriangulationCandidate& cand : accepted[i]) {
      est.estimates[i] = convex_blend(est.estimates[i], cand, est.estimates,
                                      beacon_positions, n_robots, alpha_k);
      UpdateRecord rec;
      rec.robot_id = i;
      rec.iteration = k;
      rec.alpha_k = alpha_k;
      for (size_t a = 0; a < cand.members.size(); ++a) {
        if (cand.members[a] < n_robots)
          rec.robot_weights.emplace_back(cand.members[a], cand.weights[a]);
        else
          rec.beacon_weights.emplace_back(cand.members[a], cand.weights[a]);
      }
      rec.applied_motion = res.motions[i].measured_motion;
      rec.candidate = std::move(cand);
      res.records.push_back(std::move(rec));
    }
  }
  for (int i = 0; i < n_robots; ++i)
    est.estimates[i] += res.motions[i].measured_motion;
  est.iteration = k + 1;
  return res;
}

}  // namespace hulloc::localizer
