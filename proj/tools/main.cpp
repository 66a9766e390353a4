// Command-line front end: configure an experiment (flags or a key=value config
// file), run it (optionally Monte Carlo replicated), and write the per-robot
// CSV plus a JSON summary.

#include <CLI11.hpp>
#include <cstdio>
#include <string>

#include "hulloc/harness.hpp"

int main(int argc, char** argv) {
  CLI::App app{"opportunistic convex-hull localization simulator"};
  app.set_config("--config", "", "key=value config file; flags override");

  hulloc::harness::ExperimentConfig cfg;
  int robots = 5, beacons = 1, dim = 2, iters = 3000, mc = 1, motion_dim = -1;
  double region = 20.0, radius = 2.0, dmax = 5.0;
  std::uint64_t seed = 1;
  double alpha = 0.01, beta = 0.01, epsilon = 0.20;
  double pair_factor = 2.0;
  double kd = 0.0, ktheta = 0.0, kr = 0.0, prop_frac = 0.0, drop_prob = 0.0;
  double threshold = 1e-3, adverse_scale = 1.5;
  std::string noise = "none", update_mode = "all", out = "results.csv";
  bool adverse_init = false, allow_infeasible = false, mods_off = false;

  app.add_option("--robots", robots, "number of robots")->check(CLI::PositiveNumber);
  app.add_option("--beacons", beacons, "number of beacons")->check(CLI::NonNegativeNumber);
  app.add_option("--dim", dim, "working dimension m")->check(CLI::Range(1, 3));
  app.add_option("--region", region, "side length of the square/cubic region");
  app.add_option("--radius", radius, "communication radius");
  app.add_option("--pair-factor", pair_factor,
                 "member-pair ranging reach, in comm radii");
  app.add_option("--dmax", dmax, "maximum step length per iteration");
  app.add_option("--iters", iters, "iterations to run")->check(CLI::NonNegativeNumber);
  app.add_option("--seed", seed, "master RNG seed");
  app.add_option("--mc", mc, "Monte Carlo replicates")->check(CLI::PositiveNumber);
  app.add_option("--alpha", alpha, "minimum beacon weight");
  app.add_option("--beta", beta, "self-weight when updating");
  app.add_option("--epsilon", epsilon, "relative inclusion-error gate (noisy mode)");
  app.add_option("--noise", noise, "noise model: none, model1, model2")
      ->check(CLI::IsMember({"none", "model1", "model2"}));
  app.add_option("--kd", kd, "model1 odometry distance gain");
  app.add_option("--ktheta", ktheta, "model1 odometry heading gain");
  app.add_option("--kr", kr, "model1 ranging gain");
  app.add_option("--prop-frac", prop_frac, "model2 proportional fraction");
  app.add_option("--update-mode", update_mode, "first or all sets per iteration")
      ->check(CLI::IsMember({"first", "all"}));
  app.add_option("--out", out, "CSV output path (summary JSON written alongside)");
  app.add_option("--motion-dim", motion_dim,
                 "robot motion subspace dim (-1 = full dimension)");
  app.add_option("--drop-prob", drop_prob, "per-iteration comm dropout probability");
  app.add_option("--threshold", threshold, "mean-error convergence threshold");
  app.add_option("--adverse-scale", adverse_scale, "adverse init offset, in region extents");
  app.add_flag("--adverse-init", adverse_init, "offset initial estimates far outside the region");
  app.add_flag("--allow-infeasible", allow_infeasible, "run even if structurally infeasible");
  app.add_flag("--mods-off", mods_off, "disable the three robustness modifications");

  CLI11_PARSE(app, argc, argv);

  cfg.world.dim = dim;
  cfg.world.region = hulloc::Box::square(region, dim);
  cfg.world.comm_radius = radius;
  cfg.world.pair_range_factor = pair_factor;
  cfg.world.d_max = dmax;
  cfg.world.n_robots = robots;
  cfg.world.n_beacons = beacons;
  cfg.world.robot_motion_dim = motion_dim;
  cfg.world.drop_probability = drop_prob;
  cfg.world.rng_seed = seed;

  cfg.noise.model = noise == "none" ? hulloc::NoiseModel::None
                    : noise == "model1" ? hulloc::NoiseModel::Model1
                                         : hulloc::NoiseModel::Model2;
  cfg.noise.kd = kd;
  cfg.noise.ktheta = ktheta;
  cfg.noise.kr = kr;
  cfg.noise.proportional_fraction = prop_frac;

  cfg.algorithm.alpha = alpha;
  cfg.algorithm.beta = beta;
  cfg.algorithm.epsilon = epsilon;
  cfg.algorithm.update_mode = update_mode == "first"
                                  ? hulloc::localizer::UpdateMode::FirstSet
                                  : hulloc::localizer::UpdateMode::AllSets;
  if (mods_off) {
    cfg.algorithm.m1_sign_screen = false;
    cfg.algorithm.m2_error_gate = false;
    cfg.algorithm.m3_normalize = false;
  }

  cfg.iterations = iters;
  cfg.convergence_threshold = threshold;
  cfg.initial_estimate.mode = adverse_init
                                  ? hulloc::harness::InitialEstimateConfig::Mode::AdverseOffset
                                  : hulloc::harness::InitialEstimateConfig::Mode::RandomInRegion;
  cfg.initial_estimate.offset_scale = adverse_scale;
  cfg.allow_infeasible = allow_infeasible;

  try {
    const hulloc::harness::MonteCarloResult result = hulloc::harness::monte_carlo(cfg, mc);

    hulloc::harness::emit_csv(result.replicates[0].records, out);
    std::string summary = out;
    const size_t dot = summary.rfind('.');
    if (dot != std::string::npos) summary.resize(dot);
    summary += ".summary.json";
    hulloc::harness::write_summary_json(cfg, result, summary);

    int converged = 0;
    double final_sum = 0.0;
    for (const auto& rep : result.replicates) {
      if (rep.converged_at) ++converged;
      final_sum += rep.mean_error_curve.back();
    }
    std::printf("replicates: %zu  converged: %d  final mean error: %.6g\n",
                result.replicates.size(), converged,
                final_sum / result.replicates.size());
    if (mc == 1 && result.replicates[0].converged_at)
      std::printf("converged at iteration %d\n", *result.replicates[0].converged_at);
    std::printf("wrote %s and %s\n", out.c_str(), summary.c_str());
  } catch (const hulloc::harness::InfeasibleError& e) {
    std::fprintf(stderr, "%s\n(use --allow-infeasible to run anyway)\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
