#include "soniguide/agent.hpp"

#include "soniguide/error.hpp"
#include "soniguide/random.hpp"

#include <algorithm>
#include <cmath>

namespace soniguide {

namespace {

bool in_workspace(const Vec3& p) { return p.allFinite() && (p.array().abs() <= kWorkspaceHalfExtent).all(); }

}  // namespace

Displacement decode(const SoniParams& params, const MappingConfig& cfg) {
  if (params.am_freq > 0.0 && params.fm_index > 0.0) {
    throw ContractError("parameter frame signals both above (am_freq) and below (fm_index)");
  }
  if (params.brightness_shift > 0.0 && params.fullness < 1.0) {
    throw ContractError("parameter frame signals both behind (brightness) and in front (fullness)");
  }

  Displacement d;
  if (params.chroma_rate != 0.0) {
    d.dx = std::copysign(std::min(std::abs(params.chroma_rate) / cfg.omega_max, 1.0) * cfg.x_sat, params.chroma_rate);
  }

  if (params.am_freq > 0.0) {
    const double u = std::clamp((params.am_freq - cfg.am_freq_min) / (cfg.am_freq_max - cfg.am_freq_min), 0.0, 1.0);
    d.dy = cfg.deadzone.y() + u * (cfg.y_sat - cfg.deadzone.y());
  } else if (params.fm_index > 0.0) {
    d.dy = -std::min(params.fm_index / cfg.beta_max, 1.0) * cfg.y_sat;
  }

  if (params.brightness_shift > 0.0) {
    d.dz = std::min(params.brightness_shift / cfg.shift_max, 1.0) * cfg.z_sat;
  } else if (params.fullness < 1.0) {
    d.dz = -std::min((1.0 - params.fullness) / (1.0 - cfg.fullness_min), 1.0) * cfg.z_sat;
  }
  return d;
}

double distance_upper_bound(const Displacement& estimate, const MappingConfig& cfg) {
  const Vec3 e = estimate.vec();
  Vec3 bound;
  for (int i = 0; i < 3; ++i) bound[i] = e[i] == 0.0 ? cfg.deadzone[i] : std::abs(e[i]);
  return bound.norm();
}

void AgentPolicy::validate() const {
  if (!(std::isfinite(gain) && gain > 0.0)) throw ValidationError("agent policy: gain must be > 0");
  if (!(std::isfinite(step_hz) && step_hz > 0.0)) throw ValidationError("agent policy: step_hz must be > 0");
  if (!(std::isfinite(noise_sigma) && noise_sigma >= 0.0)) throw ValidationError("agent policy: noise_sigma must be >= 0");
  if (!(std::isfinite(click_threshold) && click_threshold > 0.0)) {
    throw ValidationError("agent policy: click_threshold must be > 0");
  }
  if (click_steps < 1) throw ValidationError("agent policy: click_steps must be >= 1");
  if (step_cap < 1) throw ValidationError("agent policy: step_cap must be >= 1");
}

Episode run_episode(const Vec3& start, const Vec3& target, const AgentPolicy& policy, const MappingConfig& mcfg,
                    std::uint64_t seed) {
  policy.validate();
  mcfg.validate();
  if (!in_workspace(start) || !in_workspace(target)) {
    throw ContractError("episode start and target must lie inside the 30 x 30 x 30 cm workspace");
  }

  Rng rng(seed);
  const Vec3 saturation(mcfg.x_sat, mcfg.y_sat, mcfg.z_sat);

  Episode ep;
  ep.start = start;
  ep.target = target;
  ep.trajectory.push_back({0.0, start});

  Vec3 pos = start;
  int under_threshold = 0;
  for (int step = 1; step <= policy.step_cap; ++step) {
    const Displacement estimate = decode(map_displacement(displacement(pos, target), mcfg), mcfg);
    if (distance_upper_bound(estimate, mcfg) < policy.click_threshold) {
      if (++under_threshold >= policy.click_steps) {
        ep.converged = true;
        break;
      }
    } else {
      under_threshold = 0;
    }

    const Vec3 noise(rng.normal(), rng.normal(), rng.normal());
    pos += policy.gain * (estimate.vec().array() / saturation.array()).matrix() + policy.noise_sigma * noise;
    ep.trajectory.push_back({step / policy.step_hz, pos});
    ep.steps = step;
  }
  return ep;
}

const AgentPolicy& ModePolicies::for_mode(GuidanceMode mode) const {
  switch (mode) {
    case GuidanceMode::Auditory:
      return auditory;
    case GuidanceMode::Visual:
      return visual;
    case GuidanceMode::Audiovisual:
      return audiovisual;
  }
  return visual;
}

ModePolicies policy_preset(std::string_view name) {
  const AgentPolicy base;
  if (name == "equal") return {base, base, base};
  if (name == "aud-slow") {
    AgentPolicy auditory = base;
    auditory.gain = 0.8;
    auditory.noise_sigma = 0.06;
    auditory.click_steps = 30;
    AgentPolicy audiovisual = base;
    audiovisual.gain = 1.6;
    audiovisual.click_steps = 15;
    return {auditory, base, audiovisual};
  }
  throw ValidationError("unknown policy preset '" + std::string(name) + "'");
}

std::vector<std::string> policy_preset_names() { return {"equal", "aud-slow"}; }

Trial trial_from_episode(const Episode& episode, int index, GuidanceMode mode) {
  Trial trial;
  trial.index = index;
  trial.target = episode.target;
  trial.mode = mode;
  trial.samples = episode.trajectory;
  trial.click_pos = episode.trajectory.back().pos;
  trial.click_t = episode.trajectory.back().t;
  return trial;
}

Session synthesize_session(const TargetLayout& layout, std::span<const int> path, const ModePolicies& policies,
                           const SessionSpec& spec, const MappingConfig& mcfg) {
  if (path.size() != kTrialsPerSession) throw ValidationError("target path must have 30 entries");

  Session session;
  session.participant_id = spec.participant_id;
  session.order = spec.order;
  session.trials.reserve(kTrialsPerSession);

  Rng seeds(spec.seed);
  Vec3 position = spec.start_mark;
  for (int i = 0; i < kTrialsPerSession; ++i) {
    const int index = i + 1;
    const GuidanceMode mode = spec.order.mode_for_trial(index);
    const Vec3& target = layout.target(path[static_cast<std::size_t>(i)]);
    const Episode ep = run_episode(position, target, policies.for_mode(mode), mcfg, seeds.next());
    session.trials.push_back(trial_from_episode(ep, index, mode));
    position = session.trials.back().click_pos;
  }
  session.validate();
  return session;
}

}  // namespace soniguide
