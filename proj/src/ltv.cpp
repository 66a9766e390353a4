#include "hulloc/ltv.hpp"

#include <cmath>
#include <stdexcept>

namespace hulloc::ltv {

std::vector<SystemMatrices> assemble_matrices(
    std::span<const localizer::UpdateRecord> records, int n_robots, int n_beacons) {
  std::vector<SystemMatrices> out;
  if (records.empty()) {
    SystemMatrices id;
    id.P = Eigen::MatrixXd::Identity(n_robots, n_robots);
    id.B = Eigen::MatrixXd::Zero(n_robots, std::max(1, n_beacons));
    out.push_back(std::move(id));
    return out;
  }
  out.reserve(records.size());
  for (const localizer::UpdateRecord& rec : records) {
    SystemMatrices m;
    m.P = Eigen::MatrixXd::Identity(n_robots, n_robots);
    m.B = Eigen::MatrixXd::Zero(n_robots, std::max(1, n_beacons));
    m.updated_row = rec.robot_id;
    m.iteration = rec.iteration;

    const double scale = 1.0 - rec.alpha_k;
    double weight_sum = 0.0;
    m.P(rec.robot_id, rec.robot_id) = rec.alpha_k;
    for (const auto& [id, p] : rec.robot_weights) {
      if (id == rec.robot_id)
        m.P(rec.robot_id, id) += scale * p;  // self can appear as a member
      else
        m.P(rec.robot_id, id) = scale * p;
      weight_sum += p;
    }
    for (const auto& [id, b] : rec.beacon_weights) {
      m.B(rec.robot_id, id - n_robots) = scale * b;
      weight_sum += b;
    }
    if (std::fabs(rec.alpha_k + scale * weight_sum - 1.0) > 1e-9)
      throw std::invalid_argument("update record weights are not convex");
    m.kind = rec.beacon_weights.empty() ? SystemMatrices::Kind::StochasticUpdate
                                        : SystemMatrices::Kind::SubStochasticUpdate;
    out.push_back(std::move(m));
  }
  return out;
}

double slice_norm_bound(int length, double beta1, double deficit) {
  return 1.0 - std::pow(beta1, length - 1) * deficit;
}

double growth_bound(int slice_index, double beta1, double deficit, double gamma1,
                    double gamma2) {
  if (slice_index < 1) throw std::domain_error("slice index starts at 1");
  const double decay = 1.0 - std::exp(-gamma2 * std::pow(slice_index, -gamma1));
  return std::log(decay / deficit) / std::log(beta1) + 1.0;
}

SliceTracker::SliceTracker(int n_robots, double beta1, double deficit, double row_tol)
    : n_(n_robots), beta1_(beta1), deficit_(deficit), row_tol_(row_tol),
      slice_product_(Eigen::MatrixXd::Identity(n_robots, n_robots)),
      cumulative_(Eigen::MatrixXd::Identity(n_robots, n_robots)),
      informed_(n_robots, 0) {}

void SliceTracker::apply(Eigen::MatrixXd& prod, const SystemMatrices& mats) const {
  // mats.P is identity outside updated_row, so left-multiplication only
  // rewrites that one row of the running product.
  if (mats.updated_row < 0) return;
  prod.row(mats.updated_row) = mats.P.row(mats.updated_row) * prod;
}

std::optional<SliceSummary> SliceTracker::absorb(const SystemMatrices& mats) {
  apply(cumulative_, mats);

  if (!open_) {
    if (mats.kind != SystemMatrices::Kind::SubStochasticUpdate)
      return std::nullopt;  // matrices between slices are absorbed uncounted
    open_ = true;
    length_ = 0;
    start_iteration_ = mats.iteration;
    slice_product_.setIdentity();
    std::fill(informed_.begin(), informed_.end(), 0);
  }

  apply(slice_product_, mats);
  ++length_;

  bool all_below = true;
  for (int i = 0; i < n_; ++i) {
    const double row_sum = slice_product_.row(i).sum();
    if (row_sum < 1.0 - row_tol_) informed_[i] = 1;
    all_below = all_below && row_sum < 1.0 - row_tol_;
  }
  if (!all_below) return std::nullopt;

  SliceSummary s;
  s.index = static_cast<int>(completed_.size()) + 1;
  s.length = length_;
  s.product_inf_norm = slice_product_.cwiseAbs().rowwise().sum().maxCoeff();
  s.norm_bound = slice_norm_bound(length_, beta1_, deficit_);
  s.start_iteration = start_iteration_;
  s.end_iteration = mats.iteration;
  s.cumulative_inf_norm = cumulative_inf_norm();
  completed_.push_back(s);
  open_ = false;
  length_ = 0;
  return s;
}

double SliceTracker::cumulative_inf_norm() const {
  return cumulative_.cwiseAbs().rowwise().sum().maxCoeff();
}

TheoremOneReport check_theorem1(std::span<const SliceSummary> slices,
                                const TheoremOneMode& mode, double beta1,
                                double deficit) {
  TheoremOneReport rep;
  rep.mode = mode;
  rep.slice_count = static_cast<int>(slices.size());
  if (slices.empty()) {
    rep.indeterminate = true;
    return rep;
  }
  for (const SliceSummary& s : slices) rep.max_length = std::max(rep.max_length, s.length);

  switch (mode.kind) {
    case TheoremOneMode::Kind::BoundedLength:
      for (const SliceSummary& s : slices)
        if (s.length > mode.length_bound) rep.witnesses.push_back(s.index);
      rep.satisfied = rep.witnesses.empty();
      break;
    case TheoremOneMode::Kind::InfiniteBounded: {
      int bounded = 0;
      const size_t half = slices.size() / 2;
      for (size_t i = 0; i < slices.size(); ++i) {
        if (slices[i].length <= mode.length_bound) {
          ++bounded;
          if (i >= half) ++rep.trailing_half_bounded;
        }
      }
      rep.bounded_fraction = static_cast<double>(bounded) / slices.size();
      // proxy for "infinitely many": short slices keep occurring late in the run
      rep.satisfied = rep.trailing_half_bounded > 0;
      break;
    }
    case TheoremOneMode::Kind::Growth:
      for (const SliceSummary& s : slices)
        if (s.length > growth_bound(s.index, beta1, deficit, mode.gamma1, mode.gamma2))
          rep.witnesses.push_back(s.index);
      rep.satisfied = rep.witnesses.empty();
      break;
  }
  return rep;
}

double verify_error_dynamics(const Eigen::MatrixXd& e_k,
                             std::span<const SystemMatrices> mats,
                             const Eigen::MatrixXd& e_next) {
  Eigen::MatrixXd pred = e_k;
  for (const SystemMatrices& m : mats)
    if (m.updated_row >= 0) pred.row(m.updated_row) = m.P.row(m.updated_row) * pred;
  return (e_next - pred).cwiseAbs().rowwise().sum().maxCoeff();
}

FeasibilityReport check_feasibility(const FeasibilityInput& in) {
  FeasibilityReport rep;
  if (in.beacon_count < 1) rep.violated.push_back(FeasibilityCondition::BeaconCount);
  if (in.beacon_count + in.robot_count < in.dim + 2)
    rep.violated.push_back(FeasibilityCondition::NodeCount);
  if (in.beacon_count + in.robot_motion_dim_union + in.beacon_motion_dim_union < in.dim + 1)
    rep.violated.push_back(FeasibilityCondition::MotionDimension);
  rep.feasible = rep.violated.empty();
  return rep;
}

const char* feasibility_condition_name(FeasibilityCondition c) {
  switch (c) {
    case FeasibilityCondition::BeaconCount: return "beacon_count";
    case FeasibilityCondition::NodeCount: return "node_count";
    case FeasibilityCondition::MotionDimension: return "motion_dimension";
  }
  return "unknown";
}

}  // namespace hulloc::ltv
