#include "doctest.h"

#include "soniguide/agent.hpp"
#include "soniguide/analysis.hpp"
#include "soniguide/error.hpp"
#include "support/gen.hpp"

using namespace soniguide;

TEST_CASE("start at target converges immediately with zero path") {
  AgentPolicy policy;
  const Vec3 t(1, 8, 2);
  const Episode noisy = run_episode(t, t, policy, MappingConfig{}, 1);
  CHECK(noisy.converged);
  CHECK(noisy.steps <= policy.click_steps + 1);
  policy.noise_sigma = 0.0;
  const Episode ep = run_episode(t, t, policy, MappingConfig{}, 1);
  CHECK(ep.converged);
  double length = 0.0;
  for (std::size_t i = 1; i < ep.trajectory.size(); ++i) length += (ep.trajectory[i].pos - ep.trajectory[i - 1].pos).norm();
  CHECK(length == 0.0);
}

TEST_CASE("noise-free homing decreases distance monotonically") {
  AgentPolicy policy;
  policy.noise_sigma = 0.0;
  const Vec3 target(0, 5, 0);
  const Episode ep = run_episode(target + Vec3(10, 0, 0), target, policy, MappingConfig{}, 1);
  REQUIRE(ep.converged);
  for (std::size_t i = 1; i < ep.trajectory.size(); ++i) {
    CHECK((ep.trajectory[i].pos - target).norm() <= (ep.trajectory[i - 1].pos - target).norm() + 1e-12);
  }
}

TEST_CASE("property: noise-free steps never increase the distance") {
  gen::Gen g(31);
  AgentPolicy policy;
  policy.noise_sigma = 0.0;
  for (int iter = 0; iter < 50; ++iter) {
    const Vec3 target = g.vec(8);
    const Vec3 start = g.vec(10);
    const Episode ep = run_episode(start, target, policy, MappingConfig{}, g.seed());
    for (std::size_t i = 1; i < ep.trajectory.size(); ++i) {
      CHECK((ep.trajectory[i].pos - target).norm() <= (ep.trajectory[i - 1].pos - target).norm() + 1e-12);
    }
  }
}

TEST_CASE("converged implies final distance below the click threshold") {
  gen::Gen g(32);
  const AgentPolicy policy;
  for (int iter = 0; iter < 100; ++iter) {
    const Vec3 target = g.vec(8);
    const Episode ep = run_episode(g.vec(10), target, policy, MappingConfig{}, g.seed());
    if (ep.converged) CHECK((ep.trajectory.back().pos - target).norm() < policy.click_threshold);
    CHECK(ep.trajectory.front().t == 0.0);
    for (std::size_t i = 1; i < ep.trajectory.size(); ++i) {
      CHECK(ep.trajectory[i].t == doctest::Approx(i / policy.step_hz));
    }
  }
}

TEST_CASE("episodes are deterministic and bounded by the workspace") {
  const AgentPolicy policy;
  const Episode a = run_episode(Vec3(5, 5, 5), Vec3(0, 9, 0), policy, MappingConfig{}, 77);
  const Episode b = run_episode(Vec3(5, 5, 5), Vec3(0, 9, 0), policy, MappingConfig{}, 77);
  REQUIRE(a.trajectory.size() == b.trajectory.size());
  for (std::size_t i = 0; i < a.trajectory.size(); ++i) CHECK(a.trajectory[i].pos == b.trajectory[i].pos);
  CHECK_THROWS_AS(run_episode(Vec3(20, 0, 0), Vec3::Zero(), policy, MappingConfig{}, 1), ContractError);
  AgentPolicy bad;
  bad.click_steps = 0;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
}

TEST_CASE("step cap bounds unconverged episodes") {
  AgentPolicy policy;
  policy.gain = 1e-4;
  policy.step_cap = 50;
  const Episode ep = run_episode(Vec3(10, 0, 0), Vec3(-10, 0, 0), policy, MappingConfig{}, 1);
  CHECK_FALSE(ep.converged);
  CHECK(ep.steps == 50);
}

TEST_CASE("synthesized sessions chain trials and follow the group order") {
  const TargetLayout layout = default_layout();
  const auto path = target_path(layout);
  const SessionSpec spec{"sim", GroupOrder::parse("av-v-a"), SkullProxy{}.apex(), 5};
  const Session s = synthesize_session(layout, path, policy_preset("equal"), spec, MappingConfig{});
  CHECK_NOTHROW(s.validate());
  CHECK(s.trials.front().samples.front().pos == spec.start_mark);
  for (std::size_t i = 0; i < s.trials.size(); ++i) {
    CHECK(s.trials[i].target == layout.target(path[i]));
    if (i > 0) CHECK(s.trials[i].samples.front().pos == s.trials[i - 1].click_pos);
  }
  const Session again = synthesize_session(layout, path, policy_preset("equal"), spec, MappingConfig{});
  for (std::size_t i = 0; i < s.trials.size(); ++i) CHECK(again.trials[i].click_pos == s.trials[i].click_pos);
}

TEST_CASE("aud-slow preset: auditory decades take longer than visual") {
  const TargetLayout layout = default_layout();
  const auto path = target_path(layout);
  double auditory = 0.0, visual = 0.0;
  int na = 0, nv = 0;
  for (int i = 0; i < 20; ++i) {
    const SessionSpec spec{"s", GroupOrder::from_index(i % 6), SkullProxy{}.apex(), static_cast<std::uint64_t>(100 + i)};
    const Session s = synthesize_session(layout, path, policy_preset("aud-slow"), spec, MappingConfig{});
    for (const auto& m : decade_metrics(s)) {
      if (m.mode == GuidanceMode::Auditory) {
        auditory += m.time;
        ++na;
      } else if (m.mode == GuidanceMode::Visual) {
        visual += m.time;
        ++nv;
      }
    }
  }
  CHECK(auditory / na > visual / nv);
  CHECK_THROWS_AS(policy_preset("fast"), ValidationError);
}
