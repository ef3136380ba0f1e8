#include "artreg/liegroup.hpp"

#include <cmath>

namespace artreg {

namespace {
constexpr double kSmallAngle = 1e-8;

// Reprojects a drifting rotation matrix onto SO(3).
Eigen::Matrix3d orthonormalize(const Eigen::Matrix3d& r) {
  Eigen::Quaterniond q(r);
  q.normalize();
  return q.toRotationMatrix();
}
}  // namespace

Eigen::Matrix3d skew(const Eigen::Vector3d& w) {
  Eigen::Matrix3d m;
  m << 0.0, -w.z(), w.y(), w.z(), 0.0, -w.x(), -w.y(), w.x(), 0.0;
  return m;
}

Pose Pose::rotation_about(const Eigen::Vector3d& axis, const Eigen::Vector3d& pivot,
                          double angle) {
  const Eigen::Matrix3d r =
      Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix();
  return Pose(r, pivot - r * pivot);
}

Pose exp_se3(const Twist& xi) {
  const double theta = xi.omega.norm();
  const Eigen::Matrix3d w = skew(xi.omega);
  const Eigen::Matrix3d w2 = w * w;

  double a, b, c;  // R = I + a W + b W^2,  V = I + b W + c W^2
  if (theta < kSmallAngle) {
    a = 1.0 - theta * theta / 6.0;
    b = 0.5 - theta * theta / 24.0;
    c = 1.0 / 6.0 - theta * theta / 120.0;
  } else {
    a = std::sin(theta) / theta;
    b = (1.0 - std::cos(theta)) / (theta * theta);
    c = (1.0 - a) / (theta * theta);
  }

  Pose p;
  p.rotation = Eigen::Matrix3d::Identity() + a * w + b * w2;
  p.translation = (Eigen::Matrix3d::Identity() + b * w + c * w2) * xi.v;
  return p;
}

Twist log_se3(const Pose& p) {
  // Quaternion extraction is stable at every angle, including near pi.
  Eigen::Quaterniond q(p.rotation);
  if (q.w() < 0.0) q.coeffs() = -q.coeffs();  // keep theta <= pi
  const Eigen::Vector3d qv(q.x(), q.y(), q.z());
  const double s = qv.norm();

  Twist xi;
  if (s < kSmallAngle) {
    xi.omega = (2.0 / q.w()) * qv;
  } else {
    xi.omega = (2.0 * std::atan2(s, q.w()) / s) * qv;
  }

  const double theta = xi.omega.norm();
  const Eigen::Matrix3d w = skew(xi.omega);
  const Eigen::Matrix3d w2 = w * w;
  double coeff;  // V^{-1} = I - W/2 + coeff W^2
  if (theta < 1e-4) {
    coeff = 1.0 / 12.0 + theta * theta / 720.0;
  } else {
    const double half = 0.5 * theta;
    coeff = (1.0 - half * std::cos(half) / std::sin(half)) / (theta * theta);
  }
  const Eigen::Matrix3d v_inv =
      Eigen::Matrix3d::Identity() - 0.5 * w + coeff * w2;
  xi.v = v_inv * p.translation;
  return xi;
}

Pose compose(const Pose& a, const Pose& b) {
  Pose p(a.rotation * b.rotation, a.rotation * b.translation + a.translation);
  if (p.rotation_drift() > 1e-9) p.rotation = orthonormalize(p.rotation);
  return p;
}

Pose inverse(const Pose& p) {
  return Pose(p.rotation.transpose(), -(p.rotation.transpose() * p.translation));
}

Eigen::Vector3d apply(const Pose& p, const Eigen::Vector3d& point) {
  return p.rotation * point + p.translation;
}

Pose retract(const Pose& base, const Twist& xi) { return compose(base, exp_se3(xi)); }

Twist inv_retract(const Pose& base, const Pose& target) {
  return log_se3(compose(inverse(base), target));
}

double rotation_angle(const Pose& p) {
  const double c = clamp(0.5 * (p.rotation.trace() - 1.0), -1.0, 1.0);
  return std::acos(c);
}

}  // namespace artreg
