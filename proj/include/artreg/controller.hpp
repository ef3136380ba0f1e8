#pragma once

#include <vector>

#include "artreg/articulation.hpp"
#include "artreg/pipeline.hpp"

namespace artreg {

// Per-part target poses, expressed as displacement-since-capture frames: a
// part has reached its goal when its tracked pose matches the target.
struct GoalSpec {
  std::vector<Pose> targets;
  double tolerance = 0.02;  // m
};

struct PidState {
  double k_p = 0.05;
  double k_i = 0.0;
  double k_d = 0.03;
  double integral = 0.0;
  double prev_error = 0.0;
  double saturation = 0.03;  // m
};

// Signed bearing between the push line through O and P and the direction to
// the target T. Positive when T lies to the right of the P->O push heading;
// |theta| = pi/2 when T projects onto O itself.
double bearing_theta(const Eigen::Vector2d& object, const Eigen::Vector2d& push,
                     const Eigen::Vector2d& target);

// PID correction in meters, clipped to +/- state.saturation.
double pid_step(PidState& state, double error, double dt);

// Shifts a sensor pose by c along its own x-axis.
Pose shift_sensor(const Pose& sensor_pose, double c);

double distance_to_goal(const Eigen::Vector2d& object, const Eigen::Vector2d& target);

struct GoalPushPlan {
  ActionSpec action;
  double theta = 0.0;
  double correction = 0.0;  // saturated PID output c
  double distance_to_target = 0.0;
};

// Goal-driven push: base contact at the V_y face center, slid along the face
// by the PID output so the contact->center push line swings toward the
// target; 3 cm increment.
GoalPushPlan plan_goal_push(const PointCloud& part_cloud, const Pose& tracked_pose,
                            const Pose& target_pose, PidState& pid);

struct IterationRecord {
  int iteration = 0;
  int part = -1;
  double theta = 0.0;
  double correction = 0.0;
  bool contact = true;
  std::vector<double> distances;  // tracked distance-to-goal per part
  std::vector<Pose> estimates;
};

struct TrajectoryReport {
  std::vector<IterationRecord> iterations;
  std::vector<double> final_errors;  // true XY error per part, m
  bool success = false;
  int increments = 0;
};

struct ControlBudgetExhausted : Error {
  explicit ControlBudgetExhausted(TrajectoryReport r)
      : Error("push budget exhausted"), report(std::move(r)) {}
  TrajectoryReport report;
};

// Iterative task loop: always push the part farthest from its goal until
// every part is inside the tolerance. Lost contact aborts the increment and
// replans from the next observation.
TrajectoryReport push_to_goal(TrackedWorld& world, const GoalSpec& goal, int max_increments);

// Prismatic counterpart: one measured pull (re-pulled once on residual).
TrajectoryReport pull_to_goal(TrackedWorld& world, const GoalSpec& goal);

}  // namespace artreg
