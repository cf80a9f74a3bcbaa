#ifndef SONIGUIDE_MAPPING_HPP
#define SONIGUIDE_MAPPING_HPP

#include "soniguide/scene.hpp"

namespace soniguide {

// One frame of the six-direction encoding.
//   left/right -> chroma_rate (signed, octaves/s, + = target to the right)
//   above      -> am_freq (loudness fluctuation rate, Hz)
//   below      -> fm_index (80 Hz modulation depth)
//   behind     -> brightness_shift (envelope shift, octaves)
//   in front   -> fullness (< 1 narrows the envelope)
struct SoniParams {
  double chroma_rate = 0.0;
  double am_freq = 0.0;
  double fm_index = 0.0;
  double brightness_shift = 0.0;
  double fullness = 1.0;
  bool proximity_noise = false;

  // Mutual exclusion of the up/down and front/back polarities, finiteness, ranges.
  bool is_consistent() const;

  friend bool operator==(const SoniParams&, const SoniParams&) = default;
};

struct MappingConfig {
  double omega_max = 1.0;  // oct/s
  double x_sat = 10.0;     // cm
  double am_freq_min = 0.5;
  double am_freq_max = 8.0;
  double y_sat = 10.0;
  double beta_max = 6.0;
  double mod_freq = 80.0;
  double shift_max = 2.0;  // octaves
  double z_sat = 10.0;
  double fullness_min = 0.25;
  double prox_radius = 3.0;
  Vec3 deadzone = Vec3::Constant(0.05);

  // Throws ValidationError.
  void validate() const;
};

// Throws ValidationError for a non-finite displacement.
SoniParams map_displacement(const Displacement& d, const MappingConfig& cfg);

struct CrossingEvents {
  bool height_crossed = false;  // click
  bool depth_crossed = false;   // major chord

  friend bool operator==(const CrossingEvents&, const CrossingEvents&) = default;
};

// True when the coordinate strictly changes sides of the target plane, or
// lands exactly on it coming from off the plane.
inline bool plane_crossed(double previous, double current, double plane) {
  const double a = previous - plane;
  const double b = current - plane;
  return (a < 0.0 && b > 0.0) || (a > 0.0 && b < 0.0) || (b == 0.0 && a != 0.0);
}

inline CrossingEvents detect_crossings(const Vec3& prev, const Vec3& cur, const Vec3& target) {
  return {plane_crossed(prev.y(), cur.y(), target.y()), plane_crossed(prev.z(), cur.z(), target.z())};
}

}  // namespace soniguide

#endif  // SONIGUIDE_MAPPING_HPP
