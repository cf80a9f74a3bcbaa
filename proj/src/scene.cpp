#include "soniguide/scene.hpp"

#include "soniguide/error.hpp"
#include "soniguide/random.hpp"

#include <cmath>
#include <numbers>
#include <numeric>

namespace soniguide {

namespace {

constexpr std::array<std::array<GuidanceMode, 3>, 6> kOrders = {{
    {GuidanceMode::Auditory, GuidanceMode::Visual, GuidanceMode::Audiovisual},
    {GuidanceMode::Auditory, GuidanceMode::Audiovisual, GuidanceMode::Visual},
    {GuidanceMode::Audiovisual, GuidanceMode::Auditory, GuidanceMode::Visual},
    {GuidanceMode::Audiovisual, GuidanceMode::Visual, GuidanceMode::Auditory},
    {GuidanceMode::Visual, GuidanceMode::Auditory, GuidanceMode::Audiovisual},
    {GuidanceMode::Visual, GuidanceMode::Audiovisual, GuidanceMode::Auditory},
}};

bool finite(const Vec3& v) { return v.allFinite(); }

// Orthonormal pair spanning the plane perpendicular to the unit vector u.
std::pair<Vec3, Vec3> perpendicular_basis(const Vec3& u) {
  const Vec3 reference = std::abs(u.z()) < 0.9 ? Vec3::UnitZ() : Vec3::UnitX();
  const Vec3 e1 = u.cross(reference).normalized();
  const Vec3 e2 = u.cross(e1);
  return {e1, e2};
}

}  // namespace

std::string_view to_string(GuidanceMode mode) {
  switch (mode) {
    case GuidanceMode::Auditory:
      return "a";
    case GuidanceMode::Visual:
      return "v";
    case GuidanceMode::Audiovisual:
      return "av";
  }
  return "?";
}

GuidanceMode parse_mode(std::string_view name) {
  if (name == "a") return GuidanceMode::Auditory;
  if (name == "v") return GuidanceMode::Visual;
  if (name == "av") return GuidanceMode::Audiovisual;
  throw ValidationError("unknown guidance mode '" + std::string(name) + "' (expected a, v or av)");
}

GroupOrder GroupOrder::from_index(int index) {
  if (index < 0 || index >= static_cast<int>(kOrders.size())) {
    throw ValidationError("group order index out of range: " + std::to_string(index));
  }
  return GroupOrder(index);
}

GroupOrder GroupOrder::parse(std::string_view name) {
  for (const auto& order : all()) {
    if (order.name() == name) return order;
  }
  throw ValidationError("unknown group order '" + std::string(name) + "'");
}

const std::array<GroupOrder, 6>& GroupOrder::all() {
  static const std::array<GroupOrder, 6> orders = {GroupOrder(0), GroupOrder(1), GroupOrder(2),
                                                   GroupOrder(3), GroupOrder(4), GroupOrder(5)};
  return orders;
}

const std::array<GuidanceMode, 3>& GroupOrder::modes() const { return kOrders[static_cast<std::size_t>(index_)]; }

GuidanceMode GroupOrder::mode_for_decade(int decade) const {
  if (decade < 1 || decade > 3) throw ValidationError("decade out of range: " + std::to_string(decade));
  return modes()[static_cast<std::size_t>(decade - 1)];
}

std::string GroupOrder::name() const {
  const auto& m = modes();
  return std::string(to_string(m[0])) + "-" + std::string(to_string(m[1])) + "-" + std::string(to_string(m[2]));
}

void SkullProxy::validate() const {
  if (!finite(center)) throw ValidationError("skull proxy center must be finite");
  if (!finite(semi_axes) || (semi_axes.array() <= 0.0).any()) {
    throw ValidationError("skull proxy semi-axes must be finite and strictly positive");
  }
}

Vec3 SkullProxy::radial_projection(const Vec3& direction) const {
  const double scale = (direction.array() / semi_axes.array()).matrix().norm();
  return center + direction / scale;
}

const Vec3& TargetLayout::target(int index) const {
  if (index < 0 || index >= kTargetCount) throw ValidationError("target index out of range: " + std::to_string(index));
  return rings[static_cast<std::size_t>(index / kTargetsPerRing)].targets[static_cast<std::size_t>(index % kTargetsPerRing)];
}

std::vector<Vec3> TargetLayout::targets() const {
  std::vector<Vec3> out;
  out.reserve(kTargetCount);
  for (const auto& ring : rings) out.insert(out.end(), ring.targets.begin(), ring.targets.end());
  return out;
}

std::array<RingSpec, kRingCount> default_ring_specs() {
  constexpr double kDeg = std::numbers::pi / 180.0;
  constexpr double kRadius = 1.5;
  const auto dir = [](double elevation_deg, double azimuth_deg) {
    const double el = elevation_deg * kDeg;
    const double az = azimuth_deg * kDeg;
    return Vec3(std::cos(el) * std::sin(az), std::sin(el), std::cos(el) * std::cos(az));
  };
  return {{
      {dir(30.0, 0.0), kRadius},
      {dir(30.0, 120.0), kRadius},
      {dir(30.0, 240.0), kRadius},
      {dir(62.0, 60.0), kRadius},
      {dir(62.0, 180.0), kRadius},
      {dir(62.0, 300.0), kRadius},
  }};
}

TargetLayout generate_layout(const SkullProxy& proxy, std::span<const RingSpec> specs) {
  proxy.validate();
  if (specs.size() != kRingCount) {
    throw ValidationError("expected " + std::to_string(kRingCount) + " rings, got " + std::to_string(specs.size()));
  }

  TargetLayout layout;
  layout.proxy = proxy;
  for (int r = 0; r < kRingCount; ++r) {
    const RingSpec& spec = specs[static_cast<std::size_t>(r)];
    if (!finite(spec.direction) || std::abs(spec.direction.norm() - 1.0) > 1e-9) {
      throw InvalidRingError(r, "direction must be a unit vector");
    }
    if (spec.direction.y() < 0.0) throw InvalidRingError(r, "direction points below the equator");
    if (!std::isfinite(spec.radius) || spec.radius <= 0.0) throw InvalidRingError(r, "radius must be positive");

    const Vec3 anchor = proxy.radial_projection(spec.direction);
    const auto [e1, e2] = perpendicular_basis(spec.direction);

    Ring& ring = layout.rings[static_cast<std::size_t>(r)];
    ring.center_direction = spec.direction;
    ring.ring_radius = spec.radius;
    for (int k = 0; k < kTargetsPerRing; ++k) {
      const double angle = 2.0 * std::numbers::pi * k / kTargetsPerRing;
      const Vec3 ideal = anchor + spec.radius * (std::cos(angle) * e1 + std::sin(angle) * e2);
      const Vec3 ray = ideal - proxy.center;
      if (ray.y() < 0.0) throw InvalidRingError(r, "ring point cannot be projected onto the upper skull");
      ring.targets[static_cast<std::size_t>(k)] = proxy.radial_projection(ray);
    }
  }
  return layout;
}

TargetLayout default_layout() {
  const auto specs = default_ring_specs();
  return generate_layout(SkullProxy{}, specs);
}

std::vector<int> target_path(const TargetLayout& /*layout*/, std::uint64_t seed) {
  std::vector<int> path(kTargetCount);
  std::iota(path.begin(), path.end(), 0);
  Rng rng(seed);
  shuffle(path.begin(), path.end(), rng);
  return path;
}

void Trial::validate() const {
  const std::string where = "trial " + std::to_string(index) + ": ";
  if (index < 1 || index > kTrialsPerSession) throw ValidationError(where + "index out of range 1..30");
  if (!finite(target)) throw ValidationError(where + "target must be finite");
  if (samples.empty()) throw ValidationError(where + "no probe samples");
  double previous = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    if (!std::isfinite(s.t) || s.t < 0.0) throw ValidationError(where + "sample time must be finite and >= 0");
    if (i > 0 && s.t < previous) throw ValidationError(where + "sample times decrease at sample " + std::to_string(i));
    if (!finite(s.pos)) throw ValidationError(where + "sample position must be finite");
    previous = s.t;
  }
  if (!std::isfinite(click_t) || click_t < 0.0) throw ValidationError(where + "click time must be finite and >= 0");
  if (click_pos != samples.back().pos) throw ValidationError(where + "click position differs from the final sample");
}

void Session::validate() const {
  if (trials.size() != kTrialsPerSession) {
    throw ValidationError("session '" + participant_id + "': expected 30 trials, got " + std::to_string(trials.size()));
  }
  for (std::size_t i = 0; i < trials.size(); ++i) {
    const Trial& trial = trials[i];
    trial.validate();
    if (trial.index != static_cast<int>(i) + 1) {
      throw ValidationError("session '" + participant_id + "': trial " + std::to_string(i + 1) + " has index " +
                            std::to_string(trial.index));
    }
    if (trial.mode != order.mode_for_trial(trial.index)) {
      throw ValidationError("session '" + participant_id + "': trial " + std::to_string(trial.index) + " uses mode " +
                            std::string(to_string(trial.mode)) + " but order " + order.name() + " requires " +
                            std::string(to_string(order.mode_for_trial(trial.index))));
    }
  }
}

}  // namespace soniguide
