#include "hulloc/geometry.hpp"

#include <cmath>
#include <stdexcept>

namespace hulloc::geometry {

namespace {

// Laplace cofactor expansion along the first row. The matrices here are at
// most 5x5 (m <= 3), where the recursion is exact on small-integer inputs and
// costs little; no pivoting artifacts near zero determinants.
// Closed forms of the bordered determinant, one per simplex dimension; inputs
// are squared distances. Exact for small integer inputs (only +, -, *).
double cm_det1(double a) { return 2.0 * a; }

double cm_det2(double a, double b, double c) {
  return a * a + b * b + c * c - 2.0 * (a * b + a * c + b * c);
}

// a=d01, b=d02, c=d03, d=d12, e=d13, f=d23, all squared.
double cm_det3(double a, double b, double c, double d, double e, double f) {
  return 2.0 * (a * f * (b + c + d + e - a - f) +
                b * e * (a + c + d + f - b - e) +
                c * d * (a + b + e + f - c - d) -
                a * b * d - a * c * e - b * c * f - d * e * f);
}

void check_vertex(const SquaredDistanceMatrix& d, int i) {
  if (i < 0 || i >= d.size()) throw std::out_of_range("vertex index out of range");
}

}  // namespace

SquaredDistanceMatrix::SquaredDistanceMatrix(int dim_m) : dim_m_(dim_m) {
  if (dim_m < 1 || dim_m > 3)
    throw std::domain_error("simplex dimension must be 1, 2 or 3");
}

double SquaredDistanceMatrix::at(int i, int j) const {
  check_vertex(*this, i);
  check_vertex(*this, j);
  return entries_[i * size() + j];
}

void SquaredDistanceMatrix::set(int i, int j, double squared_distance) {
  check_vertex(*this, i);
  check_vertex(*this, j);
  if (i == j) throw std::invalid_argument("diagonal entries are fixed at zero");
  if (!std::isfinite(squared_distance) || squared_distance < 0.0)
    throw std::invalid_argument("squared distance must be finite and nonnegative");
  entries_[i * size() + j] = squared_distance;
  entries_[j * size() + i] = squared_distance;
}

double coefficient_s(int m) {
  // s_m = 2^m (m!)^2 / (-1)^(m+1): -1, 2, -16, 288 for m = 0..3.
  switch (m) {
    case 0: return -1.0;
    case 1: return 2.0;
    case 2: return -16.0;
    case 3: return 288.0;
    default: throw std::domain_error("coefficient_s defined for m in [0, 3]");
  }
}

double cayley_menger_determinant(const SquaredDistanceMatrix& d) {
  switch (d.dim()) {
    case 1:
      return cm_det1(d.at(0, 1));
    case 2:
      return cm_det2(d.at(0, 1), d.at(0, 2), d.at(1, 2));
    default:
      return cm_det3(d.at(0, 1), d.at(0, 2), d.at(0, 3), d.at(1, 2), d.at(1, 3),
                     d.at(2, 3));
  }
}

SimplexVolumeResult simplex_volume(const SquaredDistanceMatrix& d) {
  SimplexVolumeResult res;
  res.raw_determinant = cayley_menger_determinant(d);
  const double ratio = res.raw_determinant / coefficient_s(d.dim());
  res.valid = ratio >= 0.0;
  if (res.valid) res.volume = std::sqrt(ratio);
  return res;
}

namespace {

// Bordered determinant of the simplex with vertex j replaced by the candidate;
// the closed forms are fully symmetric in the pairwise entries, so only the
// multiset of squared distances matters.
double substituted_determinant(const SquaredDistanceMatrix& outer,
                               std::span<const double> cand_sq, int j) {
  switch (outer.dim()) {
    case 1:
      return cm_det1(cand_sq[1 - j]);
    case 2: {
      const int u = j == 0 ? 1 : 0, v = j == 2 ? 1 : 2;
      return cm_det2(cand_sq[u], cand_sq[v], outer.at(u, v));
    }
    default: {
      // Remaining vertices in ascending order; candidate takes slot j.
      int rest[3], n = 0;
      for (int k = 0; k < 4; ++k)
        if (k != j) rest[n++] = k;
      return cm_det3(cand_sq[rest[0]], cand_sq[rest[1]], cand_sq[rest[2]],
                     outer.at(rest[0], rest[1]), outer.at(rest[0], rest[2]),
                     outer.at(rest[1], rest[2]));
    }
  }
}

// With the sign screen off, a wrong-signed determinant still yields a
// magnitude, mirroring what the unmodified update rule would compute.
double volume_magnitude(double raw_det, double s) {
  return std::sqrt(std::fabs(raw_det / s));
}

}  // namespace

InclusionResult inclusion_test(const SquaredDistanceMatrix& outer,
                               std::span<const double> candidate_squared_distances,
                               const InclusionOptions& options) {
  if (static_cast<int>(candidate_squared_distances.size()) != outer.size())
    throw std::invalid_argument("need one candidate distance per vertex");

  InclusionResult res;
  const double s = coefficient_s(outer.dim());

  const double outer_det = cayley_menger_determinant(outer);
  if (options.sign_screen && outer_det / s < 0.0) return res;  // Degenerate
  res.outer_volume = volume_magnitude(outer_det, s);
  if (!(res.outer_volume > 0.0) || !std::isfinite(res.outer_volume)) return res;

  double sum = 0.0;
  bool interior = true;
  for (int j = 0; j < outer.size(); ++j) {
    const double det = substituted_determinant(outer, candidate_squared_distances, j);
    if (options.sign_screen && det / s < 0.0) {
      res.vertex_count = 0;
      res.verdict = Verdict::Degenerate;
      return res;
    }
    const double vol = volume_magnitude(det, s);
    res.sub_volumes[res.vertex_count++] = vol;
    sum += vol;
    interior = interior && vol > options.interior_floor * res.outer_volume;
  }

  res.relative_error = std::fabs(sum - res.outer_volume) / res.outer_volume;
  res.verdict = (res.relative_error < options.tolerance && interior)
                    ? Verdict::Inside
                    : Verdict::Outside;
  return res;
}

BarycentricWeights barycentric_coordinates(const InclusionResult& inclusion,
                                           bool normalize) {
  if (inclusion.verdict != Verdict::Inside)
    throw std::logic_error("barycentric weights require an Inside verdict");
  BarycentricWeights w;
  w.weights.reserve(inclusion.vertex_count);
  double sum = 0.0;
  for (double v : inclusion.subs()) {
    w.weights.push_back(v / inclusion.outer_volume);
    sum += w.weights.back();
  }
  if (normalize && sum > 0.0)
    for (double& x : w.weights) x /= sum;
  return w;
}

}  // namespace hulloc::geometry
