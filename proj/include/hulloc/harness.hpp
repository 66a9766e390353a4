#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hulloc/localizer.hpp"
#include "hulloc/ltv.hpp"
#include "hulloc/world.hpp"

// Experiment orchestration: single runs, Monte Carlo replication with derived
// seeds, per-iteration metrics, and CSV / JSON summary emission.

namespace hulloc::harness {

struct InitialEstimateConfig {
  enum class Mode { RandomInRegion, AdverseOffset } mode = Mode::RandomInRegion;
  // AdverseOffset displaces a random in-region point by offset_scale times the
  // largest region extent, in a random direction
  double offset_scale = 1.5;
};

struct ExperimentConfig {
  WorldConfig world;
  NoiseConfig noise;
  localizer::AlgorithmConfig algorithm;
  int iterations = 3000;
  double convergence_threshold = 1e-3;  // on the mean error
  InitialEstimateConfig initial_estimate;
  bool allow_infeasible = false;
  // Track system matrices, slices and (noiseless) the error recursion
  // residual. Defaults to on for noiseless runs, off for noisy ones.
  std::optional<bool> track_ltv;
  bool keep_records = true;  // retain per-iteration metrics rows
};

struct RobotMetrics {
  double err = 0.0;
  int updates_cum = 0;
  int neighbors = 0;
};

struct MetricsRecord {
  int iteration = 0;
  std::vector<RobotMetrics> robots;  // indexed by robot id
  double mean_err = 0.0;
};

struct ReplicateResult {
  std::uint64_t seed = 0;
  std::vector<MetricsRecord> records;    // empty unless keep_records
  std::vector<double> mean_error_curve;  // index t: mean error after t iterations
  std::optional<int> converged_at;       // first t with mean error < threshold
  std::vector<double> final_errors;      // per robot
  std::vector<int> update_counts;
  std::vector<int> substochastic_update_counts;  // updates whose set held a beacon
  localizer::DiscoveryStats discovery;           // aggregated over the run
  ltv::FeasibilityReport feasibility;
  std::vector<ltv::SliceSummary> slices;
  ltv::TheoremOneReport theorem1;  // BoundedLength at the observed max length
  bool ltv_tracked = false;
  bool slice_open_at_end = false;
  double final_cumulative_norm = 1.0;
  bool error_dynamics_checked = false;
  double max_normalized_residual = 0.0;  // max residual / (1 + ||e_k||_inf)
};

struct MonteCarloResult {
  std::uint64_t master_seed = 0;
  std::vector<ReplicateResult> replicates;
  std::vector<double> mean_curve;  // mean error averaged across replicates
  std::vector<double> std_curve;   // its across-replicate sample stddev (0 for n=1)
};

// Refusal to run a structurally infeasible experiment (override with
// allow_infeasible).
struct InfeasibleError : std::runtime_error {
  explicit InfeasibleError(ltv::FeasibilityReport r);
  ltv::FeasibilityReport report;
};

ltv::FeasibilityInput feasibility_input(const ExperimentConfig& cfg);

// One full run with the seed in cfg.world.rng_seed.
ReplicateResult run_experiment(const ExperimentConfig& cfg);

// n independent replicates; replicate r runs with
// derive_seed(cfg.world.rng_seed, kReplicatePurpose, r). Per-iteration metrics
// rows are retained for replicate 0 only.
MonteCarloResult monte_carlo(const ExperimentConfig& cfg, int n_replicates);

// Per-robot distances between estimates and true positions.
std::vector<double> error_norm(const localizer::EstimateState& est, const World& world);

// First index t with curve[t] < threshold.
std::optional<int> iterations_to_threshold(const std::vector<double>& curve,
                                           double threshold);

// Schema: iter,robot_id,err,mean_err,updates_cum,neighbors. One row per robot
// per iteration 1..K in (iter, robot_id) order; a zero-iteration run emits the
// single initial record. Floats carry 9 significant digits. Throws
// std::runtime_error when the file cannot be opened.
void emit_csv(const std::vector<MetricsRecord>& records, const std::string& path);

// Structured summary (feasibility, convergence, update counts, slice and
// error-dynamics statistics, Monte Carlo aggregates) written as JSON.
void write_summary_json(const ExperimentConfig& cfg, const MonteCarloResult& mc,
                        const std::string& path);

}  // namespace hulloc::harness
