#include "soniguide/mapping.hpp"

#include "soniguide/error.hpp"

#include <algorithm>
#include <cmath>

namespace soniguide {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw ValidationError(std::string("mapping config: ") + what);
}

bool positive(double v) { return std::isfinite(v) && v > 0.0; }

}  // namespace

bool SoniParams::is_consistent() const {
  const bool finite = std::isfinite(chroma_rate) && std::isfinite(am_freq) && std::isfinite(fm_index) &&
                      std::isfinite(brightness_shift) && std::isfinite(fullness);
  if (!finite) return false;
  if (am_freq < 0.0 || fm_index < 0.0 || brightness_shift < 0.0) return false;
  if (fullness <= 0.0 || fullness > 1.0) return false;
  if (am_freq > 0.0 && fm_index > 0.0) return false;
  if (brightness_shift > 0.0 && fullness < 1.0) return false;
  return true;
}

void MappingConfig::validate() const {
  require(positive(omega_max), "omega_max must be > 0");
  require(positive(beta_max), "beta_max must be > 0");
  require(positive(shift_max), "shift_max must be > 0");
  require(positive(mod_freq), "mod_freq must be > 0");
  require(positive(prox_radius), "prox_radius must be > 0");
  require(positive(am_freq_min) && positive(am_freq_max) && am_freq_min < am_freq_max,
          "am_freq range must satisfy 0 < am_freq_min < am_freq_max");
  require(std::isfinite(fullness_min) && fullness_min > 0.0 && fullness_min < 1.0, "fullness_min must be in (0, 1)");
  require(deadzone.allFinite() && (deadzone.array() >= 0.0).all(), "deadzone must be finite and >= 0");
  require(positive(x_sat) && x_sat > deadzone.x(), "x_sat must exceed the x deadzone");
  require(positive(y_sat) && y_sat > deadzone.y(), "y_sat must exceed the y deadzone");
  require(positive(z_sat) && z_sat > deadzone.z(), "z_sat must exceed the z deadzone");
}

SoniParams map_displacement(const Displacement& d, const MappingConfig& cfg) {
  if (!d.is_finite()) throw ValidationError("displacement must be finite");

  SoniParams p;

  // left/right
  const double ax = std::abs(d.dx);
  if (ax > cfg.deadzone.x()) {
    p.chroma_rate = std::copysign(cfg.omega_max * std::min(ax / cfg.x_sat, 1.0), d.dx);
  }

  // up/down
  if (d.dy > cfg.deadzone.y()) {
    const double u = std::min((d.dy - cfg.deadzone.y()) / (cfg.y_sat - cfg.deadzone.y()), 1.0);
    p.am_freq = cfg.am_freq_min + (cfg.am_freq_max - cfg.am_freq_min) * u;
  } else if (d.dy < -cfg.deadzone.y()) {
    p.fm_index = cfg.beta_max * std::min(-d.dy / cfg.y_sat, 1.0);
  }

  // front/back
  if (d.dz < -cfg.deadzone.z()) {
    p.fullness = 1.0 - (1.0 - cfg.fullness_min) * std::min(-d.dz / cfg.z_sat, 1.0);
  } else if (d.dz > cfg.deadzone.z()) {
    p.brightness_shift = cfg.shift_max * std::min(d.dz / cfg.z_sat, 1.0);
  }

  p.proximity_noise = d.norm() < cfg.prox_radius;
  return p;
}

}  // namespace soniguide
