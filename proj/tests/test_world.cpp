#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "hulloc/rng.hpp"
#include "hulloc/world.hpp"

using namespace hulloc;

namespace {

constexpr double kPi = 3.141592653589793;

WorldConfig small_config() {
  WorldConfig cfg;
  cfg.dim = 2;
  cfg.region = Box::square(20.0, 2);
  cfg.n_robots = 4;
  cfg.n_beacons = 1;
  cfg.rng_seed = 77;
  return cfg;
}

bool same_vec(const Vec3& a, const Vec3& b) {
  return a[0] == b[0] && a[1] == b[1] && a[2] == b[2];
}

double sample_std(const std::vector<double>& xs) {
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / (static_cast<double>(xs.size()) - 1.0));
}

}  // namespace

TEST_CASE("seed derivation matches the splitmix64 reference sequence") {
  CHECK(splitmix64(0) == 0xe220a8397b1dcdafULL);
  CHECK(splitmix64(splitmix64(0)) == 0xa706dd2f4d197e6fULL);
  CHECK(derive_seed(1, 2, 3) == 0x3d5100e7ecf3cb36ULL);
  CHECK(derive_seed(1, 2, 3) == derive_seed(1, 2, 3));
  CHECK(derive_seed(1, 2, 3) != derive_seed(1, 2, 4));
  CHECK(derive_seed(1, 2, 3) != derive_seed(1, 3, 3));
  CHECK(derive_seed(1, 2, 3) != derive_seed(2, 2, 3));
}

TEST_CASE("degenerate rng draws consume no entropy") {
  RngStream a(42), b(42);
  CHECK(a.normal(3.5, 0.0) == 3.5);
  CHECK_FALSE(a.bernoulli(0.0));
  CHECK_FALSE(a.bernoulli(-1.0));
  CHECK(a.uniform(0.0, 1.0) == b.uniform(0.0, 1.0));  // streams still aligned
}

TEST_CASE("box geometry") {
  const Box b = Box::square(20.0, 2);
  CHECK(b.contains(Vec3(0, 0, 0), 2));  // bounds are inclusive
  CHECK(b.contains(Vec3(20, 20, 0), 2));
  CHECK_FALSE(b.contains(Vec3(20.0001, 5, 0), 2));
  CHECK_FALSE(b.contains(Vec3(5, -0.0001, 0), 2));
  CHECK(b.contains(Vec3(5, 5, 99.0), 2));  // trailing coords ignored
  CHECK(same_vec(b.center(), Vec3(10, 10, 0)));
  CHECK(b.max_extent(2) == 20.0);
  CHECK(Box::square(7.0, 1).max_extent(1) == 7.0);
}

TEST_CASE("polar steps convert to displacements") {
  PolarMotion p;
  p.distance = 2.0;
  p.azimuth = kPi / 2.0;

  SUBCASE("planar") {
    const Vec3 v = polar_to_vec(p, 2, 2, Vec3::UnitX());
    CHECK(v[0] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(v[1] == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(v[2] == 0.0);
  }
  SUBCASE("spatial uses the polar angle") {
    p.azimuth = 0.0;
    p.polar = 0.0;
    CHECK((polar_to_vec(p, 3, 3, Vec3::UnitX()) - Vec3(0, 0, 2)).norm() < 1e-12);
    p.polar = kPi / 2.0;
    CHECK((polar_to_vec(p, 3, 3, Vec3::UnitX()) - Vec3(2, 0, 0)).norm() < 1e-12);
  }
  SUBCASE("line-constrained motion follows the axis and sign") {
    p.line_sign = -1.0;
    p.distance = 3.0;
    CHECK(same_vec(polar_to_vec(p, 2, 1, Vec3::UnitY()), Vec3(0, -3, 0)));
  }
  SUBCASE("degenerate cases are zero") {
    CHECK(same_vec(polar_to_vec(p, 2, 0, Vec3::UnitX()), Vec3::Zero()));
    p.distance = 0.0;
    CHECK(same_vec(polar_to_vec(p, 2, 2, Vec3::UnitX()), Vec3::Zero()));
  }
}

TEST_CASE("world construction validates and places nodes") {
  WorldConfig cfg = small_config();
  NoiseConfig none;
  World w(cfg, none);

  CHECK(w.node_count() == 5);
  CHECK(w.robot_count() == 4);
  CHECK(w.beacon_count() == 1);
  CHECK_FALSE(w.is_beacon(3));
  CHECK(w.is_beacon(4));
  for (int id = 0; id < w.node_count(); ++id)
    CHECK(cfg.region.contains(w.true_position(id), cfg.dim));
  CHECK(same_vec(w.true_position(4), cfg.region.center()));  // first beacon is pinned
  CHECK(w.node(4).motion_dim == 0);
  CHECK(w.node(0).motion_dim == 2);

  cfg.dim = 4;
  CHECK_THROWS_AS(World(cfg, none), std::domain_error);
  cfg.dim = 2;
  cfg.n_robots = 0;
  CHECK_THROWS_AS(World(cfg, none), std::domain_error);
}

TEST_CASE("same seed reproduces trajectories bitwise") {
  const WorldConfig cfg = small_config();
  NoiseConfig none;
  World a(cfg, none), b(cfg, none);
  for (int k = 0; k < 10; ++k) {
    const auto sa = a.step();
    const auto sb = b.step();
    for (int i = 0; i < cfg.n_robots; ++i) {
      CHECK(same_vec(sa[i].true_motion, sb[i].true_motion));
      CHECK(same_vec(a.true_position(i), b.true_position(i)));
    }
  }
  WorldConfig other = cfg;
  other.rng_seed = 78;
  World c(other, none);
  c.step();
  CHECK_FALSE(same_vec(a.true_position(0), c.true_position(0)));
}

TEST_CASE("motion stays inside the region and on declared subspaces") {
  SUBCASE("region smaller than the step bound") {
    WorldConfig cfg = small_config();
    cfg.region = Box::square(3.0, 2);  // d_max = 5 exceeds the side
    World w(cfg, NoiseConfig{});
    for (int k = 0; k < 50; ++k) {
      w.step();
      for (int id = 0; id < w.node_count(); ++id)
        CHECK(cfg.region.contains(w.true_position(id), cfg.dim));
    }
    CHECK(w.iteration() == 50);
  }
  SUBCASE("zero step bound freezes everyone") {
    WorldConfig cfg = small_config();
    cfg.d_max = 0.0;
    World w(cfg, NoiseConfig{});
    const Vec3 before = w.true_position(0);
    w.step();
    CHECK(same_vec(w.true_position(0), before));
  }
  SUBCASE("line-constrained robots keep their off-axis coordinates") {
    WorldConfig cfg = small_config();
    cfg.robot_motion_dim = 1;
    World w(cfg, NoiseConfig{});
    std::vector<double> y0;
    for (int i = 0; i < cfg.n_robots; ++i) y0.push_back(w.true_position(i)[1]);
    for (int k = 0; k < 30; ++k) w.step();
    bool moved = false;
    for (int i = 0; i < cfg.n_robots; ++i) {
      CHECK(w.true_position(i)[1] == y0[i]);
      moved = moved || w.node(i).cumulative_distance > 0.0;
    }
    CHECK(moved);
  }
}

TEST_CASE("neighbors form a closed communication ball") {
  WorldConfig cfg = small_config();
  cfg.comm_radius = 2.0;
  World w(cfg, NoiseConfig{});
  w.set_true_position(0, Vec3(10, 10, 0));
  w.set_true_position(1, Vec3(12, 10, 0));      // exactly at the radius
  w.set_true_position(2, Vec3(12.001, 10, 0));  // just past it
  w.set_true_position(3, Vec3(10, 11, 0));
  // beacon 4 sits at the center, distance zero from robot 0

  const auto n0 = w.neighbors(0);
  CHECK(n0 == std::vector<int>{1, 3, 4});
  CHECK(w.neighbors(2) == std::vector<int>{1});

  CHECK_THROWS_AS(w.set_true_position(0, Vec3(25, 0, 0)), std::invalid_argument);
}

TEST_CASE("ranging table stores directed measurements and reports the lower id") {
  RangingTable t;
  t.reset(3);
  CHECK_FALSE(t.measured(0, 1).has_value());
  t.put(1, 2, 5.0);
  t.put(2, 1, 6.0);
  CHECK(t.measured(1, 2) == 5.0);
  CHECK(t.measured(2, 1) == 6.0);
  CHECK(t.reported(1, 2) == 5.0);
  CHECK(t.reported(2, 1) == 5.0);  // symmetric lookup, lower id's reading
  CHECK_FALSE(t.reported(0, 2).has_value());
  CHECK_FALSE(t.measured(-1, 2).has_value());
  CHECK_FALSE(t.measured(0, 3).has_value());
  t.reset(2);
  CHECK_FALSE(t.measured(1, 2).has_value());
}

TEST_CASE("pair ranging reaches past the single-hop radius") {
  WorldConfig cfg = small_config();
  cfg.n_robots = 2;
  cfg.comm_radius = 2.0;
  World w(cfg, NoiseConfig{});
  w.set_true_position(0, Vec3(0, 0, 0));
  w.set_true_position(1, Vec3(3, 0, 0));  // outside r, inside 2r

  CHECK(w.neighbors(0).empty());  // discovery is still single-hop
  CHECK_THROWS_AS(w.measure_distance(0, 1), std::out_of_range);

  RangingTable t;
  w.fill_ranging_table(t);
  CHECK(t.measured(0, 1) == 3.0);  // noiseless pair measurement is exact
  CHECK(t.measured(1, 0) == 3.0);
  CHECK_FALSE(t.measured(0, 2).has_value());  // beacon at (10, 10) is too far

  WorldConfig one_hop = cfg;
  one_hop.pair_range_factor = 1.0;
  World w1(one_hop, NoiseConfig{});
  w1.set_true_position(0, Vec3(0, 0, 0));
  w1.set_true_position(1, Vec3(3, 0, 0));
  RangingTable t1;
  w1.fill_ranging_table(t1);
  CHECK_FALSE(t1.measured(0, 1).has_value());
}

TEST_CASE("noiseless and zero-scale measurements are exact") {
  WorldConfig cfg = small_config();
  World w(cfg, NoiseConfig{});
  w.set_true_position(0, Vec3(10, 10, 0));
  w.set_true_position(1, Vec3(11, 10, 0));
  const auto m = w.measure_distance(0, 1);
  CHECK(m.true_distance == 1.0);
  CHECK(m.measured == 1.0);

  NoiseConfig m1;
  m1.model = NoiseModel::Model1;
  m1.kr = 0.1;
  World wn(cfg, m1);
  wn.set_true_position(0, Vec3(10, 10, 0));
  wn.set_true_position(1, Vec3(11, 10, 0));
  // ranging noise scales with sqrt(iteration); at iteration 0 it is exact
  CHECK(wn.measure_distance(0, 1).measured == 1.0);
}

TEST_CASE("travelled-distance noise has the declared scale") {
  NoiseConfig m1;
  m1.model = NoiseModel::Model1;
  m1.kd = 5e-3;

  PolarMotion p;
  p.distance = 2.0;

  SUBCASE("zero trip distance reproduces the step exactly") {
    RngStream s(5);
    const auto ms = measure_motion(p, 2, 1, Vec3::UnitX(), 0.0, m1, s);
    CHECK(same_vec(ms.measured_motion, ms.true_motion));
  }
  SUBCASE("sigma = kd * sqrt(D)") {
    RngStream s(6);
    std::vector<double> errs;
    errs.reserve(100000);
    for (int i = 0; i < 100000; ++i) {
      const auto ms = measure_motion(p, 2, 1, Vec3::UnitX(), 100.0, m1, s);
      errs.push_back(ms.measured_motion[0] - ms.true_motion[0]);
    }
    CHECK(sample_std(errs) == doctest::Approx(5e-3 * 10.0).epsilon(0.02));
  }
  SUBCASE("variance grows linearly in the trip distance") {
    RngStream s(7);
    for (double d : {100.0, 400.0, 1600.0}) {
      std::vector<double> errs;
      errs.reserve(40000);
      for (int i = 0; i < 40000; ++i) {
        const auto ms = measure_motion(p, 2, 1, Vec3::UnitX(), d, m1, s);
        errs.push_back(ms.measured_motion[0] - ms.true_motion[0]);
      }
      const double v = sample_std(errs) * sample_std(errs);
      CHECK(v == doctest::Approx(m1.kd * m1.kd * d).epsilon(0.05));
    }
  }
  SUBCASE("heading-only noise preserves the step length") {
    NoiseConfig heading;
    heading.model = NoiseModel::Model1;
    heading.ktheta = 0.05;
    RngStream s(8);
    p.azimuth = 0.3;
    const auto ms = measure_motion(p, 2, 2, Vec3::UnitX(), 50.0, heading, s);
    CHECK(ms.measured_motion.norm() == doctest::Approx(2.0).epsilon(1e-12));
    CHECK((ms.measured_motion - ms.true_motion).norm() > 0.0);
  }
}

TEST_CASE("ranging noise variance grows linearly in the iteration count") {
  WorldConfig cfg = small_config();
  cfg.n_robots = 1;
  cfg.comm_radius = 30.0;
  cfg.d_max = 0.0;  // keep the pair geometry fixed
  NoiseConfig m1;
  m1.model = NoiseModel::Model1;
  m1.kr = 0.02;
  World w(cfg, m1);
  w.set_true_position(0, Vec3(5, 10, 0));

  int at = 0;
  for (int target : {100, 400}) {
    while (at < target) {
      w.step();
      ++at;
    }
    std::vector<double> errs;
    errs.reserve(40000);
    for (int i = 0; i < 40000; ++i) {
      const auto m = w.measure_distance(0, 1);
      errs.push_back(m.measured - m.true_distance);
    }
    const double v = sample_std(errs) * sample_std(errs);
    CHECK(v == doctest::Approx(m1.kr * m1.kr * target).epsilon(0.05));
  }
}

TEST_CASE("proportional noise stays inside its band") {
  NoiseConfig m2;
  m2.model = NoiseModel::Model2;
  m2.proportional_fraction = 0.1;

  SUBCASE("odometry per component") {
    PolarMotion p;
    p.distance = 5.0;
    p.azimuth = 0.6435011087932844;  // 3-4-5 direction
    RngStream s(9);
    for (int i = 0; i < 1000; ++i) {
      const auto ms = measure_motion(p, 2, 2, Vec3::UnitX(), 10.0, m2, s);
      for (int c = 0; c < 2; ++c) {
        const double rel = std::fabs(ms.measured_motion[c] / ms.true_motion[c] - 1.0);
        CHECK(rel <= 0.1);
      }
    }
  }
  SUBCASE("ranging per measurement") {
    WorldConfig cfg = small_config();
    World w(cfg, m2);
    w.set_true_position(0, Vec3(10, 10, 0));
    w.set_true_position(1, Vec3(11.5, 10, 0));
    double lo = 1e9, hi = -1e9;
    for (int i = 0; i < 2000; ++i) {
      const double m = w.measure_distance(0, 1).measured;
      lo = std::min(lo, m);
      hi = std::max(hi, m);
      CHECK(std::fabs(m - 1.5) <= 0.15 + 1e-12);
    }
    CHECK(hi - lo > 0.2);  // the band is actually exercised
  }
}

TEST_CASE("drop sampling") {
  WorldConfig cfg = small_config();
  World none(cfg, NoiseConfig{});
  for (int i = 0; i < 100; ++i) CHECK_FALSE(none.sample_drop(0));

  cfg.drop_probability = 0.3;
  World some(cfg, NoiseConfig{});
  int drops = 0;
  const int trials = 20000;
  for (int i = 0; i < trials; ++i)
    if (some.sample_drop(1)) ++drops;
  CHECK(drops / double(trials) == doctest::Approx(0.3).epsilon(0.05));
}

TEST_CASE("trip odometer resets independently of the cumulative total") {
  WorldConfig cfg = small_config();
  World w(cfg, NoiseConfig{});
  for (int k = 0; k < 3; ++k) w.step();
  const double cum = w.node(0).cumulative_distance;
  CHECK(cum > 0.0);
  CHECK(w.node(0).trip_distance == cum);  // no update yet

  w.reset_odometry_trip(0);
  CHECK(w.node(0).trip_distance == 0.0);
  CHECK(w.node(0).cumulative_distance == cum);  // the total never rewinds
  CHECK(w.node(1).trip_distance == w.node(1).cumulative_distance);

  w.step();
  CHECK(w.node(0).trip_distance > 0.0);
  CHECK(w.node(0).trip_distance < w.node(0).cumulative_distance);
  CHECK(w.node(0).cumulative_distance > cum);
}

TEST_CASE("scripted beacons follow their schedule") {
  WorldConfig cfg = small_config();
  cfg.beacon_motion = BeaconMotion::Scripted;
  cfg.beacon_motion_dim = 1;
  cfg.beacon_script = [](int, int k) { return Vec3(10.0 + 0.5 * k, 10.0, 0.0); };
  World w(cfg, NoiseConfig{});
  CHECK(same_vec(w.true_position(4), Vec3(10, 10, 0)));
  CHECK(w.node(4).motion_dim == 1);
  for (int k = 0; k < 3; ++k) w.step();
  CHECK(same_vec(w.true_position(4), Vec3(11.5, 10, 0)));
  CHECK(w.node(4).cumulative_distance == doctest::Approx(1.5).epsilon(1e-12));
}
