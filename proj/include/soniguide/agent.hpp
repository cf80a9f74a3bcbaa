#ifndef SONIGUIDE_AGENT_HPP
#define SONIGUIDE_AGENT_HPP

#include "soniguide/mapping.hpp"
#include "soniguide/scene.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace soniguide {

// Inverts map_displacement axis by axis. Saturated parameters decode to the
// saturation distance and anything inside the deadzone decodes to 0.
// Throws ContractError when the frame has both am_freq > 0 and fm_index > 0
// (or both a brightness shift and reduced fullness).
Displacement decode(const SoniParams& params, const MappingConfig& cfg);

// Largest true distance consistent with a decoded estimate: components that
// decoded to 0 may hide up to the deadzone.
double distance_upper_bound(const Displacement& estimate, const MappingConfig& cfg);

struct AgentPolicy {
  double gain = 2.0;           // cm per step per unit normalised (estimate / saturation) offset
  double step_hz = 60.0;       // control rate
  double noise_sigma = 0.05;   // cm, isotropic actuation noise per step
  double click_threshold = 0.3;
  int click_steps = 10;        // consecutive steps under the threshold before clicking
  int step_cap = 5000;

  void validate() const;
};

struct Episode {
  Vec3 start = Vec3::Zero();
  Vec3 target = Vec3::Zero();
  std::vector<ProbeSample> trajectory;
  bool converged = false;
  int steps = 0;
};

inline constexpr double kWorkspaceHalfExtent = 15.0;  // 30 x 30 x 30 cm around the origin

// Closed-loop homing: map -> decode -> proportional step + noise, until the
// click rule fires or the step cap is reached. Throws ContractError if start
// or target is outside the workspace.
Episode run_episode(const Vec3& start, const Vec3& target, const AgentPolicy& policy, const MappingConfig& mcfg,
                    std::uint64_t seed);

struct ModePolicies {
  AgentPolicy auditory;
  AgentPolicy visual;
  AgentPolicy audiovisual;

  const AgentPolicy& for_mode(GuidanceMode mode) const;
};

// "equal": one policy for all modes. "aud-slow": auditory homing is slower
// and noisier, audiovisual slightly slower than visual.
ModePolicies policy_preset(std::string_view name);
std::vector<std::string> policy_preset_names();

struct SessionSpec {
  std::string participant_id;
  GroupOrder order;
  Vec3 start_mark = SkullProxy{}.apex();
  std::uint64_t seed = 0;
};

// 30 chained episodes over `path`; each trial starts at the previous click.
Session synthesize_session(const TargetLayout& layout, std::span<const int> path, const ModePolicies& policies,
                           const SessionSpec& spec, const MappingConfig& mcfg);

Trial trial_from_episode(const Episode& episode, int index, GuidanceMode mode);

}  // namespace soniguide

#endif  // SONIGUIDE_AGENT_HPP
