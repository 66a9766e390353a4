#pragma once

#include <array>
#include <optional>
#include <span>
#include <vector>

// Distance-only simplex geometry: Cayley-Menger volumes, the convex-hull
// inclusion test, and barycentric weights recovered from volume ratios.
// Everything here works on pairwise distances; no node coordinates appear.

namespace hulloc::geometry {

// Symmetric (m+1)x(m+1) matrix of squared pairwise distances among the
// vertices of an m-simplex, m in {1, 2, 3}. Symmetry and a zero diagonal are
// enforced by construction; entries must be finite and nonnegative.
class SquaredDistanceMatrix {
 public:
  explicit SquaredDistanceMatrix(int dim_m);

  int dim() const { return dim_m_; }
  int size() const { return dim_m_ + 1; }  // vertex count

  double at(int i, int j) const;
  void set(int i, int j, double squared_distance);  // writes (i,j) and (j,i)

 private:
  int dim_m_;
  std::array<double, 16> entries_{};  // row-major (m+1)^2
};

struct SimplexVolumeResult {
  double raw_determinant = 0.0;
  // Present iff valid; zero for degenerate (flat) simplexes.
  std::optional<double> volume;
  // True iff the determinant sign is admissible for an embeddable simplex
  // (det/s_m >= 0, e.g. det <= 0 in the plane, det >= 0 in space).
  bool valid = false;
};

enum class Verdict { Inside, Outside, Degenerate };

struct InclusionResult {
  Verdict verdict = Verdict::Degenerate;
  double outer_volume = 0.0;
  int vertex_count = 0;                    // valid entries in sub_volumes
  std::array<double, 4> sub_volumes{};     // entry j: candidate replaces vertex j
  double relative_error = 0.0;             // |sum(sub_volumes) - outer| / outer

  std::span<const double> subs() const { return {sub_volumes.data(), size_t(vertex_count)}; }
};

struct BarycentricWeights {
  std::vector<double> weights;  // one per vertex, positive, sums to one
};

struct InclusionOptions {
  // Relative mismatch between the sub-volume sum and the outer volume below
  // which the candidate counts as inside (strict comparison).
  double tolerance = 1e-9;
  // Every sub-volume must exceed interior_floor * outer_volume; keeps the
  // recovered weights strictly positive.
  double interior_floor = 1e-12;
  // Reject inadmissible determinant signs (noise can produce distance sets
  // realizing no simplex). Disabled, volume magnitudes are used as-is.
  bool sign_screen = true;
};

// Scaling constant s_m = 2^m (m!)^2 / (-1)^(m+1) relating the bordered
// determinant to the squared volume. Defined for m in [0, 3]; throws
// std::domain_error otherwise.
double coefficient_s(int m);

// Determinant of the (m+2)x(m+2) bordered matrix [[0, 1^T], [1, D]].
double cayley_menger_determinant(const SquaredDistanceMatrix& d);

// Volume of the simplex realizing d, via volume^2 = det / s_m.
SimplexVolumeResult simplex_volume(const SquaredDistanceMatrix& d);

// Does the candidate point lie inside the simplex? candidate_squared_distances
// holds the m+1 squared distances from the candidate to each vertex, in vertex
// order. Throws std::invalid_argument on a size mismatch.
InclusionResult inclusion_test(const SquaredDistanceMatrix& outer,
                               std::span<const double> candidate_squared_distances,
                               const InclusionOptions& options = {});

// Barycentric weights of the candidate w.r.t. the simplex vertices, recovered
// as sub_volume[j] / outer_volume. Requires verdict == Inside (throws
// std::logic_error otherwise). normalize rescales the weights to sum to one.
BarycentricWeights barycentric_coordinates(const InclusionResult& inclusion,
                                           bool normalize = true);

}  // namespace hulloc::geometry
