#include "doctest.h"

#include "soniguide/error.hpp"
#include "soniguide/io.hpp"
#include "soniguide/scene.hpp"
#include "support/gen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

using namespace soniguide;

TEST_CASE("displacement is target minus probe") {
  CHECK(displacement(Vec3(1, 2, 3), Vec3(1, 2, 3)) == Displacement{0, 0, 0});
  CHECK(displacement(Vec3(0, 0, 0), Vec3(3, 0, 0)) == Displacement{3, 0, 0});
  CHECK(displacement(Vec3(1, 1, 1), Vec3(0, 3, -2)) == Displacement{-1, 2, -3});
  const Eigen::Vector3f pf(1.0f, 1.0f, 1.0f);
  CHECK(displacement(pf, Eigen::Vector3f(2.0f, 1.0f, 0.0f)) == Displacement{1, 0, -1});
}

TEST_CASE("guidance mode names") {
  for (GuidanceMode m : kAllModes) CHECK(parse_mode(to_string(m)) == m);
  CHECK_THROWS_AS(parse_mode("x"), ValidationError);
}

TEST_CASE("group orders cover all six permutations") {
  std::vector<std::string> names;
  for (const auto& order : GroupOrder::all()) {
    names.push_back(order.name());
    CHECK(GroupOrder::parse(order.name()) == order);
    auto modes = order.modes();
    std::sort(modes.begin(), modes.end());
    CHECK(modes == kAllModes);
    for (int t = 1; t <= 30; ++t) CHECK(order.mode_for_trial(t) == order.modes()[(t - 1) / 10]);
  }
  std::sort(names.begin(), names.end());
  CHECK(std::adjacent_find(names.begin(), names.end()) == names.end());
  CHECK(GroupOrder::from_index(0).name() == "a-v-av");
  CHECK_THROWS_AS(GroupOrder::from_index(6), ValidationError);
  CHECK_THROWS_AS(GroupOrder::parse("a-a-v"), ValidationError);
}

TEST_CASE("ring on a sphere is a level circle with 72 degree spacing") {
  SkullProxy sphere;
  sphere.semi_axes = Vec3(8, 8, 8);
  std::array<RingSpec, kRingCount> specs;
  specs.fill({Vec3(0, 1, 0), 2.0});
  const TargetLayout layout = generate_layout(sphere, specs);
  const auto& ring = layout.rings[0];
  for (const Vec3& t : ring.targets) {
    CHECK(t.y() == doctest::Approx(ring.targets[0].y()).epsilon(1e-12));
    CHECK(sphere.level(t) == doctest::Approx(1.0).epsilon(1e-12));
  }
  for (int i = 0; i < kTargetsPerRing; ++i) {
    const Vec3 a(ring.targets[i].x(), 0, ring.targets[i].z());
    const Vec3 b(ring.targets[(i + 1) % 5].x(), 0, ring.targets[(i + 1) % 5].z());
    const double angle = std::acos(a.normalized().dot(b.normalized())) * 180.0 / std::numbers::pi;
    CHECK(angle == doctest::Approx(72.0).epsilon(1e-9));
  }
}

TEST_CASE("default layout: 30 distinct targets on the surface, at least 1 cm apart") {
  const TargetLayout layout = default_layout();
  const auto targets = layout.targets();
  REQUIRE(targets.size() == 30);
  double min_dist = 1e9;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    CHECK(std::abs(layout.proxy.level(targets[i]) - 1.0) < 1e-6);
    for (std::size_t j = i + 1; j < targets.size(); ++j) min_dist = std::min(min_dist, (targets[i] - targets[j]).norm());
  }
  CHECK(min_dist > 1.0);
  for (int i = 0; i < kTargetCount; ++i) CHECK(layout.target(i) == layout.rings[i / 5].targets[i % 5]);
}

TEST_CASE("property: generated targets lie on the proxy for random ring specs") {
  gen::Gen g(11);
  for (int iter = 0; iter < 300; ++iter) {
    SkullProxy proxy;
    proxy.semi_axes = Vec3(g.uniform(5, 12), g.uniform(5, 12), g.uniform(5, 12));
    proxy.center = g.vec(2.0);
    std::array<RingSpec, kRingCount> specs;
    for (auto& s : specs) s = {g.unit_upper(), g.uniform(0.3, 2.0)};
    TargetLayout layout;
    try {
      layout = generate_layout(proxy, specs);
    } catch (const InvalidRingError&) {
      continue;
    }
    for (const Vec3& t : layout.targets()) CHECK(std::abs(proxy.level(t) - 1.0) < 1e-6);
    CHECK(generate_layout(proxy, specs).targets() == layout.targets());
  }
}

TEST_CASE("invalid rings are rejected with their index") {
  auto specs = default_ring_specs();
  specs[3].radius = -1.0;
  try {
    generate_layout(SkullProxy{}, specs);
    FAIL("expected InvalidRingError");
  } catch (const InvalidRingError& e) {
    CHECK(e.ring_index() == 3);
  }
  specs = default_ring_specs();
  specs[1].direction = Vec3(0, -1, 0);
  CHECK_THROWS_AS(generate_layout(SkullProxy{}, specs), InvalidRingError);
  SkullProxy bad;
  bad.semi_axes = Vec3(1, 0, 1);
  CHECK_THROWS_AS(bad.validate(), ValidationError);
}

TEST_CASE("layout JSON round-trip is bit-exact") {
  const TargetLayout layout = default_layout();
  const TargetLayout back = io::layout_from_json(io::parse(io::to_json(layout).dump()));
  CHECK(back.targets() == layout.targets());
  CHECK(back.proxy.semi_axes == layout.proxy.semi_axes);
}

TEST_CASE("property: target_path is a seeded permutation") {
  const TargetLayout layout = default_layout();
  gen::Gen g(5);
  for (int iter = 0; iter < 200; ++iter) {
    const auto seed = g.seed();
    auto path = target_path(layout, seed);
    CHECK(path == target_path(layout, seed));
    std::sort(path.begin(), path.end());
    for (int i = 0; i < 30; ++i) CHECK(path[static_cast<std::size_t>(i)] == i);
  }
}

TEST_CASE("default path's first index matches the pinned fixture") {
  std::ifstream in(SONIGUIDE_FIXTURE_DIR "/path_first_index.txt");
  int pinned = -1;
  in >> pinned;
  CHECK(target_path(default_layout()).front() == pinned);
}

namespace {

Trial simple_trial(int index, GuidanceMode mode) {
  Trial t;
  t.index = index;
  t.mode = mode;
  t.target = Vec3(1, 2, 3);
  t.samples = {{0.0, Vec3::Zero()}, {0.5, Vec3(1, 2, 3)}};
  t.click_pos = Vec3(1, 2, 3);
  t.click_t = 0.5;
  return t;
}

}  // namespace

TEST_CASE("trial and session invariants") {
  Trial t = simple_trial(1, GuidanceMode::Auditory);
  CHECK_NOTHROW(t.validate());
  t.click_pos = Vec3(1, 2, 4);
  CHECK_THROWS_AS(t.validate(), ValidationError);
  t = simple_trial(1, GuidanceMode::Auditory);
  t.samples.clear();
  CHECK_THROWS_AS(t.validate(), ValidationError);
  t = simple_trial(1, GuidanceMode::Auditory);
  t.samples[1].t = -1;
  CHECK_THROWS_AS(t.validate(), ValidationError);

  const GroupOrder order = GroupOrder::parse("v-a-av");
  Session s{"p1", order, {}};
  for (int i = 1; i <= 30; ++i) s.trials.push_back(simple_trial(i, order.mode_for_trial(i)));
  CHECK_NOTHROW(s.validate());
  s.trials[12].mode = GuidanceMode::Visual;
  CHECK_THROWS_AS(s.validate(), ValidationError);
  s.trials[12].mode = order.mode_for_trial(13);
  s.trials.pop_back();
  CHECK_THROWS_AS(s.validate(), ValidationError);
}
