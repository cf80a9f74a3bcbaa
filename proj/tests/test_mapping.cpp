#include "doctest.h"

#include "soniguide/agent.hpp"
#include "soniguide/error.hpp"
#include "soniguide/mapping.hpp"
#include "support/gen.hpp"

#include <cmath>

using namespace soniguide;

TEST_CASE("neutral point") {
  const SoniParams p = map_displacement({0, 0, 0}, MappingConfig{});
  CHECK(p.chroma_rate == 0.0);
  CHECK(p.am_freq == 0.0);
  CHECK(p.fm_index == 0.0);
  CHECK(p.brightness_shift == 0.0);
  CHECK(p.fullness == 1.0);
  CHECK(p.proximity_noise);
}

TEST_CASE("hand-evaluated laws") {
  MappingConfig cfg;
  SoniParams p = map_displacement({5, 0, 0}, cfg);
  CHECK(p.chroma_rate == doctest::Approx(0.5));
  CHECK(p.am_freq == 0.0);
  CHECK(p.fm_index == 0.0);
  CHECK(p.fullness == 1.0);
  CHECK(p.brightness_shift == 0.0);

  cfg.beta_max = 6;
  cfg.y_sat = 8;
  cfg.deadzone = Vec3::Zero();
  p = map_displacement({0, -4, 0}, cfg);
  CHECK(p.fm_index == doctest::Approx(3.0));
  CHECK(p.am_freq == 0.0);

  // above: deadzone edge maps to am_freq_min, saturation to am_freq_max
  cfg = MappingConfig{};
  CHECK(map_displacement({0, 10, 0}, cfg).am_freq == doctest::Approx(8.0));
  CHECK(map_displacement({0, 40, 0}, cfg).am_freq == doctest::Approx(8.0));
  CHECK(map_displacement({0, 0.05 + 1e-12, 0}, cfg).am_freq == doctest::Approx(0.5));
  CHECK(map_displacement({0, 0.05, 0}, cfg).am_freq == 0.0);
  CHECK(map_displacement({0, 0, -10}, cfg).fullness == doctest::Approx(0.25));
  CHECK(map_displacement({0, 0, 5}, cfg).brightness_shift == doctest::Approx(1.0));
}

TEST_CASE("proximity uses the Euclidean norm") {
  const MappingConfig cfg;
  CHECK(map_displacement({2, 2, 0}, cfg).proximity_noise);       // 2.83
  CHECK_FALSE(map_displacement({2, 2, 1.5}, cfg).proximity_noise);  // 3.20
  CHECK_FALSE(map_displacement({3, 0, 0}, cfg).proximity_noise);
}

TEST_CASE("non-finite displacement is rejected") {
  CHECK_THROWS_AS(map_displacement({NAN, 0, 0}, MappingConfig{}), ValidationError);
  MappingConfig bad;
  bad.y_sat = 0.01;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
}

TEST_CASE("crossing examples") {
  const Vec3 target(0, 2, 2);
  CHECK(detect_crossings(Vec3(0, 1, 0), Vec3(0, 3, 0), target).height_crossed);
  CHECK_FALSE(detect_crossings(Vec3(0, 1, 0), Vec3(0, 1, 0), target).depth_crossed);
  CHECK_FALSE(detect_crossings(Vec3(0, 2, 0), Vec3(0, 2, 0), target).height_crossed);
  CHECK(detect_crossings(Vec3(0, 1, 0), Vec3(0, 2, 0), target).height_crossed);
  CHECK_FALSE(detect_crossings(Vec3(0, 2, 0), Vec3(0, 3, 0), target).height_crossed);
}

namespace {

bool same_except(const SoniParams& a, const SoniParams& b, char axis) {
  const bool x_same = a.chroma_rate == b.chroma_rate;
  const bool y_same = a.am_freq == b.am_freq && a.fm_index == b.fm_index;
  const bool z_same = a.brightness_shift == b.brightness_shift && a.fullness == b.fullness;
  switch (axis) {
    case 'x': return y_same && z_same;
    case 'y': return x_same && z_same;
    default: return x_same && y_same;
  }
}

}  // namespace

TEST_CASE("property: orthogonality, symmetry, exclusion, purity") {
  const MappingConfig cfg;
  gen::Gen g(21);
  for (int iter = 0; iter < 2000; ++iter) {
    const Displacement d{g.uniform(-15, 15), g.uniform(-15, 15), g.uniform(-15, 15)};
    const SoniParams p = map_displacement(d, cfg);
    const double delta = g.uniform(-10, 10);
    CHECK(same_except(p, map_displacement({d.dx + delta, d.dy, d.dz}, cfg), 'x'));
    CHECK(same_except(p, map_displacement({d.dx, d.dy + delta, d.dz}, cfg), 'y'));
    CHECK(same_except(p, map_displacement({d.dx, d.dy, d.dz + delta}, cfg), 'z'));
    CHECK(map_displacement({-d.dx, d.dy, d.dz}, cfg).chroma_rate == -p.chroma_rate);
    CHECK(p.am_freq * p.fm_index == 0.0);
    CHECK(p.brightness_shift * (1.0 - p.fullness) == 0.0);
    CHECK(p.is_consistent());
    CHECK(map_displacement(d, cfg) == p);
  }
}

TEST_CASE("property: monotone up to saturation, constant beyond") {
  const MappingConfig cfg;
  gen::Gen g(22);
  for (int iter = 0; iter < 1000; ++iter) {
    const double a = g.uniform(0.06, 10.0);
    const double b = g.uniform(0.06, 10.0);
    const double lo = std::min(a, b), hi = std::max(a, b);
    if (lo == hi) continue;
    const auto at = [&](double x, double y, double z) { return map_displacement({x, y, z}, cfg); };
    CHECK(std::abs(at(lo, 0, 0).chroma_rate) < std::abs(at(hi, 0, 0).chroma_rate));
    CHECK(at(0, lo, 0).am_freq < at(0, hi, 0).am_freq);
    CHECK(at(0, -lo, 0).fm_index < at(0, -hi, 0).fm_index);
    CHECK(at(0, 0, lo).brightness_shift < at(0, 0, hi).brightness_shift);
    CHECK(at(0, 0, -lo).fullness > at(0, 0, -hi).fullness);
    const double beyond = g.uniform(10.0, 30.0);
    CHECK(at(beyond, 0, 0).chroma_rate == at(10.0, 0, 0).chroma_rate);
    CHECK(at(0, beyond, 0).am_freq == at(0, 10.0, 0).am_freq);
    CHECK(at(0, -beyond, 0).fm_index == at(0, -10.0, 0).fm_index);
    CHECK(at(0, 0, beyond).brightness_shift == at(0, 0, 10.0).brightness_shift);
    CHECK(at(0, 0, -beyond).fullness == at(0, 0, -10.0).fullness);
  }
}

TEST_CASE("property: crossing count equals brute-force sign changes") {
  gen::Gen g(23);
  for (int iter = 0; iter < 200; ++iter) {
    const Vec3 target = g.vec(5);
    std::vector<Vec3> pts;
    for (int i = 0; i < 50; ++i) {
      Vec3 p = target + g.vec(2);
      if (g.integer(0, 9) == 0) p.y() = target.y();
      pts.push_back(p);
    }
    int counted = 0, brute = 0;
    for (std::size_t i = 1; i < pts.size(); ++i) {
      counted += detect_crossings(pts[i - 1], pts[i], target).height_crossed ? 1 : 0;
      const double a = pts[i - 1].y() - target.y(), b = pts[i].y() - target.y();
      const int sa = (a > 0) - (a < 0), sb = (b > 0) - (b < 0);
      if (sa != sb && sa != 0) ++brute;
    }
    CHECK(counted == brute);
  }
}

TEST_CASE("decode inverts the laws") {
  const MappingConfig cfg;
  CHECK(decode(SoniParams{}, cfg) == Displacement{0, 0, 0});
  SoniParams p;
  p.chroma_rate = 0.5;
  CHECK(decode(p, cfg).dx == doctest::Approx(5.0));
  p = SoniParams{};
  p.am_freq = 1.0;
  p.fm_index = 1.0;
  CHECK_THROWS_AS(decode(p, cfg), ContractError);
}

TEST_CASE("property: decode(map(d)) == d on the bijective range") {
  const MappingConfig cfg;
  gen::Gen g(24);
  for (int iter = 0; iter < 10000; ++iter) {
    const Displacement d{g.signed_magnitude(cfg.deadzone.x(), cfg.x_sat), g.signed_magnitude(cfg.deadzone.y(), cfg.y_sat),
                         g.signed_magnitude(cfg.deadzone.z(), cfg.z_sat)};
    const Displacement back = decode(map_displacement(d, cfg), cfg);
    CHECK(std::abs(back.dx - d.dx) < 1e-9);
    CHECK(std::abs(back.dy - d.dy) < 1e-9);
    CHECK(std::abs(back.dz - d.dz) < 1e-9);
  }
}
