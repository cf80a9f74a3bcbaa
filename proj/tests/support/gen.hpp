// Hand-rolled generators for the property tests.
#ifndef SONIGUIDE_TESTS_GEN_HPP
#define SONIGUIDE_TESTS_GEN_HPP

#include <Eigen/Dense>

#include <cstdint>
#include <random>

namespace gen {

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : engine_(seed) {}

  double uniform(double lo, double hi) { return lo + (hi - lo) * static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  int integer(int lo, int hi) { return lo + static_cast<int>(engine_() % static_cast<std::uint64_t>(hi - lo + 1)); }
  bool coin() { return (engine_() & 1u) != 0; }
  double sign() { return coin() ? 1.0 : -1.0; }
  std::uint64_t seed() { return engine_(); }

  Eigen::Vector3d vec(double half_extent) {
    return {uniform(-half_extent, half_extent), uniform(-half_extent, half_extent), uniform(-half_extent, half_extent)};
  }

  Eigen::Vector3d unit_upper() {
    for (;;) {
      Eigen::Vector3d v = vec(1.0);
      const double n = v.norm();
      if (n > 0.1 && n <= 1.0 && v.y() > 0.2) return v / n;
    }
  }

  // Magnitude in the open interval (lo, hi) with random sign.
  double signed_magnitude(double lo, double hi) {
    double m;
    do {
      m = uniform(lo, hi);
    } while (m <= lo || m >= hi);
    return sign() * m;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace gen

#endif  // SONIGUIDE_TESTS_GEN_HPP
