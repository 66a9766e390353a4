#pragma once

#include <Eigen/Dense>
#include <optional>
#include <span>
#include <vector>

#include "hulloc/localizer.hpp"

// Linear time-varying view of the committed updates: per-record system
// matrices, sub-stochastic "slice" bookkeeping with contraction bounds, and
// the structural feasibility conditions.

namespace hulloc::ltv {

struct SystemMatrices {
  Eigen::MatrixXd P;  // n_robots x n_robots
  Eigen::MatrixXd B;  // n_robots x n_beacons
  enum class Kind { Identity, StochasticUpdate, SubStochasticUpdate } kind = Kind::Identity;
  int updated_row = -1;  // -1 for identity
  int iteration = -1;
};

// One P/B pair per update record, in commit order; an iteration with no
// records yields a single identity pair. Throws std::invalid_argument if a
// record's weights are not convex (row sum 1 within 1e-9).
std::vector<SystemMatrices> assemble_matrices(
    std::span<const localizer::UpdateRecord> records, int n_robots, int n_beacons);

// Product norm bound for a completed slice of the given length:
// 1 - beta1^(length-1) * deficit, where beta1 lower-bounds every diagonal
// entry of an updating row and deficit lower-bounds 1 - (row sum) of a
// sub-stochastic row.
double slice_norm_bound(int length, double beta1, double deficit);

// Largest admissible slice length at slice index i (>= 1) under the
// sub-exponential growth condition with exponents gamma1 >= 0, gamma2 > 0:
// ln((1 - exp(-gamma2 * i^-gamma1)) / deficit) / ln(beta1) + 1.
double growth_bound(int slice_index, double beta1, double deficit, double gamma1,
                    double gamma2);

struct SliceSummary {
  int index = 0;   // 1-based
  int length = 0;  // matrices absorbed while the slice was open
  double product_inf_norm = 0.0;
  double norm_bound = 0.0;
  int start_iteration = 0;
  int end_iteration = 0;
  // inf norm of the product of *all* matrices absorbed so far, at close time
  double cumulative_inf_norm = 0.0;
};

// Streaming slice detector. A slice opens at the first sub-stochastic matrix,
// absorbs every subsequent matrix (identities included), and closes once every
// row of the running in-slice product has sum < 1 - row_tol. A row's
// "informed" flag is sticky once set, but closing requires the *current* row
// sums to be below the threshold so the reported norm is genuinely < 1.
class SliceTracker {
 public:
  SliceTracker(int n_robots, double beta1, double deficit, double row_tol = 1e-12);

  // Feed the next matrix; returns the summary when this matrix closes a slice.
  std::optional<SliceSummary> absorb(const SystemMatrices& mats);

  bool slice_open() const { return open_; }
  int open_length() const { return length_; }
  const std::vector<char>& informed() const { return informed_; }
  const std::vector<SliceSummary>& completed() const { return completed_; }
  const Eigen::MatrixXd& cumulative_product() const { return cumulative_; }
  double cumulative_inf_norm() const;

 private:
  void apply(Eigen::MatrixXd& prod, const SystemMatrices& mats) const;

  int n_;
  double beta1_, deficit_, row_tol_;
  bool open_ = false;
  int length_ = 0;
  int start_iteration_ = 0;
  Eigen::MatrixXd slice_product_;
  Eigen::MatrixXd cumulative_;
  std::vector<char> informed_;
  std::vector<SliceSummary> completed_;
};

struct TheoremOneMode {
  enum class Kind { BoundedLength, InfiniteBounded, Growth } kind = Kind::BoundedLength;
  int length_bound = 0;           // L (BoundedLength) or L1 (InfiniteBounded)
  double gamma1 = 0.0, gamma2 = 0.0;  // Growth
};

struct TheoremOneReport {
  TheoremOneMode mode;
  bool satisfied = false;
  bool indeterminate = false;       // no completed slices observed
  std::vector<int> witnesses;       // violating slice indices
  int slice_count = 0;
  int max_length = 0;
  // InfiniteBounded: how often short slices occur, overall and in the trailing
  // half of the observation window (a proxy for "infinitely many")
  double bounded_fraction = 0.0;
  int trailing_half_bounded = 0;
};

TheoremOneReport check_theorem1(std::span<const SliceSummary> slices,
                                const TheoremOneMode& mode, double beta1,
                                double deficit);

// Residual of the error recursion over one iteration:
// || e_next - (prod of P matrices, applied left to right) e_k ||_inf.
// Rows of e are robots, columns are coordinates.
double verify_error_dynamics(const Eigen::MatrixXd& e_k,
                             std::span<const SystemMatrices> mats,
                             const Eigen::MatrixXd& e_next);

enum class FeasibilityCondition { BeaconCount, NodeCount, MotionDimension };

struct FeasibilityInput {
  int beacon_count = 0;
  int robot_count = 0;
  int dim = 2;
  int robot_motion_dim_union = 0;   // dim of the union of robot motion subspaces
  int beacon_motion_dim_union = 0;  // same for beacons
};

struct FeasibilityReport {
  bool feasible = false;
  std::vector<FeasibilityCondition> violated;
};

// Structural conditions for localizability: at least one beacon; at least
// m + 2 nodes in total; beacons plus combined motion dimensions spanning at
// least m + 1.
FeasibilityReport check_feasibility(const FeasibilityInput& in);

const char* feasibility_condition_name(FeasibilityCondition c);

}  // namespace hulloc::ltv
