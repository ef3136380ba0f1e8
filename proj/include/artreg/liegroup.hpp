#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "artreg/common.hpp"

namespace artreg {

// Tangent-space element of SE(3). Stacked as [omega; v] in 6-vectors, which
// fixes the block layout of every covariance matrix in the filter.
struct Twist {
  Eigen::Vector3d omega = Eigen::Vector3d::Zero();  // rad
  Eigen::Vector3d v = Eigen::Vector3d::Zero();      // m

  Twist() = default;
  Twist(const Eigen::Vector3d& w, const Eigen::Vector3d& t) : omega(w), v(t) {}

  static Twist from_vector(const Eigen::Matrix<double, 6, 1>& xi) {
    return Twist(xi.head<3>(), xi.tail<3>());
  }
  Eigen::Matrix<double, 6, 1> to_vector() const {
    Eigen::Matrix<double, 6, 1> xi;
    xi << omega, v;
    return xi;
  }
  double norm() const { return to_vector().norm(); }
};

// Rigid transform in SE(3), stored as rotation matrix plus translation.
struct Pose {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  Pose() = default;
  Pose(const Eigen::Matrix3d& r, const Eigen::Vector3d& t) : rotation(r), translation(t) {}

  static Pose identity() { return Pose(); }
  static Pose from_translation(const Eigen::Vector3d& t) {
    return Pose(Eigen::Matrix3d::Identity(), t);
  }
  // Rotation of `angle` about `axis` through the point `pivot`.
  static Pose rotation_about(const Eigen::Vector3d& axis, const Eigen::Vector3d& pivot,
                             double angle);

  Eigen::Matrix4d matrix() const {
    Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
    m.block<3, 3>(0, 0) = rotation;
    m.block<3, 1>(0, 3) = translation;
    return m;
  }

  // Orthonormality drift of the rotation block, infinity norm of R^T R - I.
  double rotation_drift() const {
    return (rotation.transpose() * rotation - Eigen::Matrix3d::Identity())
        .cwiseAbs()
        .maxCoeff();
  }
};

Eigen::Matrix3d skew(const Eigen::Vector3d& w);

Pose exp_se3(const Twist& xi);
Twist log_se3(const Pose& p);

Pose compose(const Pose& a, const Pose& b);
Pose inverse(const Pose& p);
Eigen::Vector3d apply(const Pose& p, const Eigen::Vector3d& point);

// Right retraction: perturbations live in the body frame of `base`.
Pose retract(const Pose& base, const Twist& xi);
Twist inv_retract(const Pose& base, const Pose& target);

// Angle of the rotation part, in [0, pi].
double rotation_angle(const Pose& p);

}  // namespace artreg
