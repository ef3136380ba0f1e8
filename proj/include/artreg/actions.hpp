#pragma once

#include <Eigen/Core>

namespace artreg {

enum class ActionKind { kPush, kHoldPull };

// Manipulation primitive: a contact position, a unit direction, and a
// travel distance, aimed at one tracked part.
struct ActionSpec {
  ActionKind kind = ActionKind::kPush;
  int target_part = 0;
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  Eigen::Vector3d direction = Eigen::Vector3d::UnitY();
  double distance = 0.0;
};

constexpr double kDetectionPushDistance = 0.10;  // m
constexpr double kDetectionPullDistance = 0.05;  // m
constexpr double kGoalPushIncrement = 0.03;      // m

}  // namespace artreg
