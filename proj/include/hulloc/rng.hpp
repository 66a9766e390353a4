#pragma once

#include <cstdint>
#include <random>

namespace hulloc {

// splitmix64 increment; also used to decorrelate the purpose tag in derive_seed
// so alternate implementations can reproduce the exact substreams.
inline constexpr std::uint64_t kSeedMixGamma = 0x9e3779b97f4a7c15ULL;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += kSeedMixGamma;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Seed for substream (purpose, index) of a master seed. Replicate r of a
// Monte Carlo run uses derive_seed(master, kReplicatePurpose, r); per-node
// streams use derive_seed(master, purpose, node_id).
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t purpose,
                                 std::uint64_t index) {
  return splitmix64(splitmix64(master + purpose * kSeedMixGamma) + index);
}

// One independent stream per (node, purpose); drawing motion samples never
// perturbs measurement noise and vice versa.
enum class StreamPurpose : std::uint64_t {
  Placement = 1,
  Motion = 2,
  Odometry = 3,
  Ranging = 4,
  Drop = 5,
  EstimateInit = 6,
};

inline constexpr std::uint64_t kReplicatePurpose = 101;

class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : engine_(seed) {}

  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
  }

  // stddev 0 is a legal degenerate draw: returns the mean, consumes no entropy.
  double normal(double mean, double stddev) {
    if (stddev == 0.0) return mean;
    return std::normal_distribution<double>(mean, stddev)(engine_);
  }

  bool bernoulli(double p) {
    if (p <= 0.0) return false;
    return uniform(0.0, 1.0) < p;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace hulloc
