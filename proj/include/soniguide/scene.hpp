#ifndef SONIGUIDE_SCENE_HPP
#define SONIGUIDE_SCENE_HPP

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace soniguide {

// Lengths in cm. x = left/right (+x right), y = up/down (+y up),
// z = front/back (+z toward the back). Right-handed.
using Vec3 = Eigen::Vector3d;

template <typename Scalar>
using Vec3T = Eigen::Matrix<Scalar, 3, 1>;

// Offset from the probe to the target, in cm.
struct Displacement {
  double dx = 0.0;
  double dy = 0.0;
  double dz = 0.0;

  Vec3 vec() const { return {dx, dy, dz}; }
  double norm() const { return vec().norm(); }
  bool is_finite() const { return std::isfinite(dx) && std::isfinite(dy) && std::isfinite(dz); }

  friend bool operator==(const Displacement&, const Displacement&) = default;
};

// target - probe, component-wise.
template <typename DerivedA, typename DerivedB>
Displacement displacement(const Eigen::MatrixBase<DerivedA>& probe, const Eigen::MatrixBase<DerivedB>& target) {
  const Vec3 d = (target - probe).template cast<double>();
  return {d.x(), d.y(), d.z()};
}

enum class GuidanceMode { Auditory, Visual, Audiovisual };

inline constexpr std::array<GuidanceMode, 3> kAllModes = {GuidanceMode::Auditory, GuidanceMode::Visual,
                                                          GuidanceMode::Audiovisual};

// Wire/file names: "a", "v", "av".
std::string_view to_string(GuidanceMode mode);
GuidanceMode parse_mode(std::string_view name);

// One of the six permutations of (a, v, av); decade d uses modes()[d - 1].
class GroupOrder {
 public:
  GroupOrder() = default;

  // Index into all(): a-v-av, a-av-v, av-a-v, av-v-a, v-a-av, v-av-a.
  static GroupOrder from_index(int index);
  static GroupOrder parse(std::string_view name);
  static const std::array<GroupOrder, 6>& all();

  int index() const { return index_; }
  const std::array<GuidanceMode, 3>& modes() const;
  GuidanceMode mode_for_decade(int decade) const;
  GuidanceMode mode_for_trial(int trial_index) const { return mode_for_decade((trial_index - 1) / 10 + 1); }
  std::string name() const;

  friend bool operator==(const GroupOrder&, const GroupOrder&) = default;

 private:
  explicit GroupOrder(int index) : index_(index) {}
  int index_ = 0;
};

// Upper half-ellipsoid standing in for the skull phantom.
struct SkullProxy {
  Vec3 center = Vec3::Zero();
  Vec3 semi_axes = Vec3(7.5, 9.5, 6.5);

  void validate() const;

  // sum((p - center)_i^2 / a_i^2); equals 1 on the surface.
  double level(const Vec3& p) const { return ((p - center).array() / semi_axes.array()).square().sum(); }

  // Point where the ray from the center along `direction` meets the ellipsoid.
  Vec3 radial_projection(const Vec3& direction) const;

  // Topmost surface point; the default start mark of a session.
  Vec3 apex() const { return center + Vec3(0.0, semi_axes.y(), 0.0); }
};

inline constexpr int kRingCount = 6;
inline constexpr int kTargetsPerRing = 5;
inline constexpr int kTargetCount = kRingCount * kTargetsPerRing;

struct RingSpec {
  Vec3 direction;  // unit, y >= 0
  double radius;   // cm
};

struct Ring {
  Vec3 center_direction;
  double ring_radius = 0.0;
  std::array<Vec3, kTargetsPerRing> targets;
};

struct TargetLayout {
  SkullProxy proxy;
  std::array<Ring, kRingCount> rings;

  // Targets numbered ring-major: index = ring * 5 + slot.
  const Vec3& target(int index) const;
  std::vector<Vec3> targets() const;
};

// Two elevation bands of three rings each, ring radius 1.5 cm.
std::array<RingSpec, kRingCount> default_ring_specs();

// Each ring's five ideal points lie on a circle of `radius` around the
// surface point in `direction`, in the plane perpendicular to `direction`,
// and are projected radially onto the proxy. Throws InvalidRingError.
TargetLayout generate_layout(const SkullProxy& proxy, std::span<const RingSpec> rings);
TargetLayout default_layout();

inline constexpr std::uint64_t kDefaultPathSeed = 1729;

// Pseudo-random visiting order: a permutation of 0..29.
std::vector<int> target_path(const TargetLayout& layout, std::uint64_t seed = kDefaultPathSeed);

struct ProbeSample {
  double t = 0.0;  // seconds since trial start
  Vec3 pos = Vec3::Zero();
};

struct Trial {
  int index = 1;  // 1..30
  Vec3 target = Vec3::Zero();
  GuidanceMode mode = GuidanceMode::Auditory;
  std::vector<ProbeSample> samples;
  Vec3 click_pos = Vec3::Zero();
  double click_t = 0.0;

  // Throws ValidationError.
  void validate() const;
};

inline constexpr int kTrialsPerSession = 30;
inline constexpr int kTrialsPerDecade = 10;

struct Session {
  std::string participant_id;
  GroupOrder order;
  std::vector<Trial> trials;

  // Trial count, numbering and decade/mode consistency. Throws ValidationError.
  void validate() const;
};

}  // namespace soniguide

#endif  // SONIGUIDE_SCENE_HPP
