#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace artreg {

constexpr double kPi = 3.14159265358979323846;

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EmptyCloud : Error {
  EmptyCloud() : Error("empty point cloud") {}
  explicit EmptyCloud(const std::string& what) : Error(what) {}
};

struct DegenerateCloud : Error {
  DegenerateCloud() : Error("degenerate point cloud") {}
  explicit DegenerateCloud(const std::string& what) : Error(what) {}
};

struct ParseError : Error {
  ParseError(const std::string& what, int line)
      : Error(what + " (line " + std::to_string(line) + ")"), line_number(line) {}
  int line_number;
};

struct UnsupportedProperty : Error {
  explicit UnsupportedProperty(const std::string& what) : Error(what) {}
};

struct CholeskyFailure : Error {
  CholeskyFailure() : Error("covariance is not positive semidefinite") {}
};

struct SingularInnovation : Error {
  SingularInnovation() : Error("innovation covariance is numerically singular") {}
};

struct NoSegmentAssociated : Error {
  NoSegmentAssociated() : Error("no segment within association gate") {}
};

struct JointLimitViolation : Error {
  explicit JointLimitViolation(const std::string& what) : Error(what) {}
};

struct LeverTooSmall : Error {
  LeverTooSmall() : Error("push lever arm below 1 cm") {}
};

struct WorkspaceExceeded : Error {
  explicit WorkspaceExceeded(const std::string& what) : Error(what) {}
};

struct NoGraspableEdge : Error {
  explicit NoGraspableEdge(const std::string& what) : Error(what) {}
};

struct UnknownScene : Error {
  explicit UnknownScene(const std::string& name) : Error("unknown builtin scene: " + name) {}
};

struct ConfigError : Error {
  ConfigError(const std::string& what, const std::string& path)
      : Error(what + ": " + path), field_path(path) {}
  std::string field_path;
};

struct DegenerateGeometry : Error {
  explicit DegenerateGeometry(const std::string& what) : Error(what) {}
};

struct PartCountMismatch : Error {
  PartCountMismatch() : Error("part counts differ") {}
};

// Deterministic RNG with explicit arithmetic everywhere so that seeded
// outputs are bit-identical across standard libraries. splitmix64 core.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // [0, 1)
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  // [0, n)
  int uniform_int(int n) {
    const auto wide = static_cast<unsigned __int128>(next_u64()) * static_cast<unsigned __int128>(n);
    return static_cast<int>(wide >> 64);
  }

  double gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    const double mag = std::sqrt(-2.0 * std::log(u1));
    spare_ = mag * std::sin(2.0 * kPi * u2);
    has_spare_ = true;
    return mag * std::cos(2.0 * kPi * u2);
  }

  Eigen::Vector3d unit_vector() {
    while (true) {
      Eigen::Vector3d v(uniform(-1.0, 1.0), uniform(-1.0, 1.0), uniform(-1.0, 1.0));
      const double n = v.norm();
      if (n > 1e-6 && n <= 1.0) return v / n;
    }
  }

  // Independent substream; mixing keeps forks of nearby seeds decorrelated.
  Rng fork(std::uint64_t stream) {
    Rng mixer(state_ ^ (0xA0761D6478BD642FULL * (stream + 1)));
    return Rng(mixer.next_u64());
  }

 private:
  std::uint64_t state_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

inline double clamp(double v, double lo, double hi) { return v < lo ? lo : (v > hi ? hi : v); }

inline double cross2d(const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
  return a.x() * b.y() - a.y() * b.x();
}

}  // namespace artreg
