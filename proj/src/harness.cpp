#include "hulloc/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <numeric>

namespace hulloc::harness {

namespace {

std::string refusal_message(const ltv::FeasibilityReport& r) {
  std::string msg = "experiment configuration is infeasible:";
  for (ltv::FeasibilityCondition c : r.violated) {
    msg += ' ';
    msg += ltv::feasibility_condition_name(c);
  }
  return msg;
}

std::vector<Vec3> initial_estimates(World& world, const InitialEstimateConfig& init) {
  const WorldConfig& cfg = world.config();
  std::vector<Vec3> est(cfg.n_robots, Vec3::Zero());
  for (int i = 0; i < cfg.n_robots; ++i) {
    RngStream& s = world.stream(i, StreamPurpose::EstimateInit);
    for (int c = 0; c < cfg.dim; ++c)
      est[i][c] = s.uniform(cfg.region.lo[c], cfg.region.hi[c]);
    if (init.mode == InitialEstimateConfig::Mode::AdverseOffset) {
      Vec3 dir = Vec3::Zero();
      if (cfg.dim == 1) {
        dir[0] = s.uniform(0.0, 1.0) < 0.5 ? -1.0 : 1.0;
      } else if (cfg.dim == 2) {
        const double a = s.uniform(0.0, 2.0 * M_PI);
        dir = Vec3(std::cos(a), std::sin(a), 0.0);
      } else {
        const double z = s.uniform(-1.0, 1.0);
        const double a = s.uniform(0.0, 2.0 * M_PI);
        const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
        dir = Vec3(r * std::cos(a), r * std::sin(a), z);
      }
      est[i] += init.offset_scale * cfg.region.max_extent(cfg.dim) * dir;
    }
  }
  return est;
}

Eigen::MatrixXd error_matrix(const World& world, const std::vector<Vec3>& est) {
  Eigen::MatrixXd e(world.robot_count(), world.dim());
  for (int i = 0; i < world.robot_count(); ++i)
    for (int c = 0; c < world.dim(); ++c)
      e(i, c) = world.true_position(i)[c] - est[i][c];
  return e;
}

void accumulate(localizer::DiscoveryStats& into, const localizer::DiscoveryStats& from) {
  into.subsets_considered += from.subsets_considered;
  into.missing_pair_data += from.missing_pair_data;
  into.degenerate += from.degenerate;
  into.failed_inclusion += from.failed_inclusion;
  into.failed_beacon_gate += from.failed_beacon_gate;
}

}  // namespace

InfeasibleError::InfeasibleError(ltv::FeasibilityReport r)
    : std::runtime_error(refusal_message(r)), report(std::move(r)) {}

ltv::FeasibilityInput feasibility_input(const ExperimentConfig& cfg) {
  ltv::FeasibilityInput in;
  in.beacon_count = cfg.world.n_beacons;
  in.robot_count = cfg.world.n_robots;
  in.dim = cfg.world.dim;
  in.robot_motion_dim_union =
      cfg.world.robot_motion_dim < 0 ? cfg.world.dim
                                     : std::min(cfg.world.robot_motion_dim, cfg.world.dim);
  in.beacon_motion_dim_union =
      cfg.world.beacon_motion == BeaconMotion::Static ? 0 : cfg.world.beacon_motion_dim;
  return in;
}

std::vector<double> error_norm(const localizer::EstimateState& est, const World& world) {
  std::vector<double> errs(world.robot_count());
  for (int i = 0; i < world.robot_count(); ++i)
    errs[i] = (world.true_position(i) - est.estimates[i]).norm();
  return errs;
}

std::optional<int> iterations_to_threshold(const std::vector<double>& curve,
                                           double threshold) {
  for (size_t t = 0; t < curve.size(); ++t)
    if (curve[t] < threshold) return static_cast<int>(t);
  return std::nullopt;
}

ReplicateResult run_experiment(const ExperimentConfig& cfg) {
  ReplicateResult res;
  res.seed = cfg.world.rng_seed;
  res.feasibility = ltv::check_feasibility(feasibility_input(cfg));
  if (!res.feasibility.feasible && !cfg.allow_infeasible)
    throw InfeasibleError(res.feasibility);

  World world(cfg.world, cfg.noise);
  const int n = world.robot_count();
  const bool noiseless = cfg.noise.model == NoiseModel::None;
  const bool track = cfg.track_ltv.value_or(noiseless);

  localizer::EstimateState est;
  est.estimates = initial_estimates(world, cfg.initial_estimate);

  res.update_counts.assign(n, 0);
  res.substochastic_update_counts.assign(n, 0);

  ltv::SliceTracker tracker(n, cfg.algorithm.beta,
                            (1.0 - cfg.algorithm.beta) * cfg.algorithm.alpha);

  auto robot_errors = [&] { return error_norm(est, world); };
  auto record_metrics = [&](int t, const std::vector<int>& neighbor_counts) {
    const std::vector<double> errs = robot_errors();
    const double mean = std::accumulate(errs.begin(), errs.end(), 0.0) / n;
    res.mean_error_curve.push_back(mean);
    if (!cfg.keep_records) return;
    MetricsRecord rec;
    rec.iteration = t;
    rec.mean_err = mean;
    rec.robots.resize(n);
    for (int i = 0; i < n; ++i)
      rec.robots[i] = {errs[i], res.update_counts[i], neighbor_counts[i]};
    res.records.push_back(std::move(rec));
  };

  std::vector<int> initial_neighbors(n);
  for (int i = 0; i < n; ++i)
    initial_neighbors[i] = static_cast<int>(world.neighbors(i).size());
  record_metrics(0, initial_neighbors);

  RangingTable table;
  Eigen::MatrixXd e_k;
  for (int k = 0; k < cfg.iterations; ++k) {
    if (track) e_k = error_matrix(world, est.estimates);

    localizer::IterationResult iter =
        localizer::run_iteration(world, est, cfg.algorithm, table);

    for (const localizer::UpdateRecord& rec : iter.records) {
      ++res.update_counts[rec.robot_id];
      if (!rec.beacon_weights.empty()) ++res.substochastic_update_counts[rec.robot_id];
    }
    accumulate(res.discovery, iter.discovery);

    if (track) {
      const std::vector<ltv::SystemMatrices> mats =
          ltv::assemble_matrices(iter.records, n, world.beacon_count());
      for (const ltv::SystemMatrices& m : mats) tracker.absorb(m);
      if (noiseless) {
        const Eigen::MatrixXd e_next = error_matrix(world, est.estimates);
        const double residual = ltv::verify_error_dynamics(e_k, mats, e_next);
        const double scale = 1.0 + e_k.cwiseAbs().rowwise().sum().maxCoeff();
        res.max_normalized_residual = std::max(res.max_normalized_residual, residual / scale);
        res.error_dynamics_checked = true;
      }
    }

    record_metrics(k + 1, iter.neighbor_counts);
  }

  res.converged_at = iterations_to_threshold(res.mean_error_curve, cfg.convergence_threshold);
  res.final_errors = robot_errors();
  res.ltv_tracked = track;
  if (track) {
    res.slices = tracker.completed();
    res.slice_open_at_end = tracker.slice_open();
    res.final_cumulative_norm = tracker.cumulative_inf_norm();
    ltv::TheoremOneMode mode;
    mode.kind = ltv::TheoremOneMode::Kind::BoundedLength;
    for (const ltv::SliceSummary& s : res.slices)
      mode.length_bound = std::max(mode.length_bound, s.length);
    res.theorem1 = ltv::check_theorem1(res.slices, mode, cfg.algorithm.beta,
                                       (1.0 - cfg.algorithm.beta) * cfg.algorithm.alpha);
  }
  return res;
}

MonteCarloResult monte_carlo(const ExperimentConfig& cfg, int n_replicates) {
  if (n_replicates < 1) throw std::invalid_argument("need at least one replicate");
  MonteCarloResult mc;
  mc.master_seed = cfg.world.rng_seed;
  mc.replicates.reserve(n_replicates);
  for (int r = 0; r < n_replicates; ++r) {
    ExperimentConfig sub = cfg;
    sub.world.rng_seed = derive_seed(cfg.world.rng_seed, kReplicatePurpose, r);
    sub.keep_records = cfg.keep_records && r == 0;
    mc.replicates.push_back(run_experiment(sub));
  }
  mc.mean_curve.assign(mc.replicates[0].mean_error_curve.size(), 0.0);
  for (const ReplicateResult& rep : mc.replicates)
    for (size_t t = 0; t < mc.mean_curve.size(); ++t)
      mc.mean_curve[t] += rep.mean_error_curve[t];
  for (double& v : mc.mean_curve) v /= n_replicates;
  mc.std_curve.assign(mc.mean_curve.size(), 0.0);
  if (n_replicates > 1) {
    for (const ReplicateResult& rep : mc.replicates)
      for (size_t t = 0; t < mc.std_curve.size(); ++t) {
        const double d = rep.mean_error_curve[t] - mc.mean_curve[t];
        mc.std_curve[t] += d * d;
      }
    for (double& v : mc.std_curve) v = std::sqrt(v / (n_replicates - 1));
  }
  return mc;
}

void emit_csv(const std::vector<MetricsRecord>& records, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << "iter,robot_id,err,mean_err,updates_cum,neighbors\n";
  char buf[64];
  for (const MetricsRecord& rec : records) {
    // the initial state is emitted only when it is the sole record
    if (rec.iteration == 0 && records.size() > 1) continue;
    for (size_t i = 0; i < rec.robots.size(); ++i) {
      const RobotMetrics& r = rec.robots[i];
      std::snprintf(buf, sizeof buf, "%.9g", r.err);
      out << rec.iteration << ',' << i << ',' << buf << ',';
      std::snprintf(buf, sizeof buf, "%.9g", rec.mean_err);
      out << buf << ',' << r.updates_cum << ',' << r.neighbors << '\n';
    }
  }
}

void write_summary_json(const ExperimentConfig& cfg, const MonteCarloResult& mc,
                        const std::string& path) {
  using nlohmann::json;
  json j;
  j["config"] = {
      {"robots", cfg.world.n_robots},
      {"beacons", cfg.world.n_beacons},
      {"dim", cfg.world.dim},
      {"comm_radius", cfg.world.comm_radius},
      {"d_max", cfg.world.d_max},
      {"iterations", cfg.iterations},
      {"seed", mc.master_seed},
      {"alpha", cfg.algorithm.alpha},
      {"beta", cfg.algorithm.beta},
      {"epsilon", cfg.algorithm.epsilon},
      {"update_mode",
       cfg.algorithm.update_mode == localizer::UpdateMode::AllSets ? "all" : "first"},
      {"noise", cfg.noise.model == NoiseModel::None
                    ? "none"
                    : (cfg.noise.model == NoiseModel::Model1 ? "model1" : "model2")},
      {"convergence_threshold", cfg.convergence_threshold},
  };

  const ltv::FeasibilityReport& feas = mc.replicates[0].feasibility;
  json violated = json::array();
  for (ltv::FeasibilityCondition c : feas.violated)
    violated.push_back(ltv::feasibility_condition_name(c));
  j["feasibility"] = {{"feasible", feas.feasible}, {"violated", violated}};

  json reps = json::array();
  for (const ReplicateResult& rep : mc.replicates) {
    json r;
    r["seed"] = rep.seed;
    r["final_mean_error"] = rep.mean_error_curve.back();
    r["converged_at"] = rep.converged_at ? json(*rep.converged_at) : json(nullptr);
    r["final_errors"] = rep.final_errors;
    r["update_counts"] = rep.update_counts;
    r["substochastic_update_counts"] = rep.substochastic_update_counts;
    r["discovery"] = {
        {"subsets_considered", rep.discovery.subsets_considered},
        {"missing_pair_data", rep.discovery.missing_pair_data},
        {"degenerate", rep.discovery.degenerate},
        {"failed_inclusion", rep.discovery.failed_inclusion},
        {"failed_beacon_gate", rep.discovery.failed_beacon_gate},
    };
    if (rep.ltv_tracked) {
      int max_len = 0;
      bool norms_ok = true, bounds_ok = true;
      for (const ltv::SliceSummary& s : rep.slices) {
        max_len = std::max(max_len, s.length);
        norms_ok = norms_ok && s.product_inf_norm < 1.0;
        bounds_ok = bounds_ok && s.product_inf_norm <= s.norm_bound + 1e-12;
      }
      r["slices"] = {
          {"count", static_cast<int>(rep.slices.size())},
          {"max_length", max_len},
          {"open_at_end", rep.slice_open_at_end},
          {"norms_below_one", norms_ok},
          {"norm_bounds_satisfied", bounds_ok},
          {"final_cumulative_norm", rep.final_cumulative_norm},
      };
      r["theorem1"] = {
          {"mode", "bounded_length"},
          {"length_bound", rep.theorem1.mode.length_bound},
          {"satisfied", rep.theorem1.satisfied},
          {"indeterminate", rep.theorem1.indeterminate},
      };
      if (rep.error_dynamics_checked)
        r["max_normalized_residual"] = rep.max_normalized_residual;
    }
    reps.push_back(std::move(r));
  }
  j["replicates"] = std::move(reps);

  if (mc.replicates.size() > 1) {
    int converged = 0;
    double final_sum = 0.0;
    for (const ReplicateResult& rep : mc.replicates) {
      if (rep.converged_at) ++converged;
      final_sum += rep.mean_error_curve.back();
    }
    j["aggregate"] = {
        {"replicates", static_cast<int>(mc.replicates.size())},
        {"converged_count", converged},
        {"mean_final_error", final_sum / mc.replicates.size()},
        {"mean_error_curve", mc.mean_curve},
        {"std_error_curve", mc.std_curve},
    };
  }

  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << j.dump(2) << '\n';
}

}  // namespace hulloc::harness
