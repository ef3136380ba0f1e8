#include "artreg/controller.hpp"

#include <algorithm>

namespace artreg {

double bearing_theta(const Eigen::Vector2d& object, const Eigen::Vector2d& push,
                     const Eigen::Vector2d& target) {
  const Eigen::Vector2d line = push - object;
  const double len = line.norm();
  if (len < 1e-12) throw DegenerateGeometry("object and push positions coincide");
  const Eigen::Vector2d u = line / len;

  // Orthogonal projection foot of T on line(O, P).
  const Eigen::Vector2d foot = object + u.dot(target - object) * u;
  const double opposite = (target - foot).norm();
  const double adjacent = (object - foot).norm();

  double theta;
  if (adjacent < 1e-9) {
    theta = 0.5 * kPi;
  } else {
    theta = std::atan(opposite / adjacent);
  }
  const double side = cross2d(line, target - object);
  return side >= 0.0 ? theta : -theta;
}

double pid_step(PidState& state, double error, double dt) {
  state.integral += error * dt;
  const double derivative = (error - state.prev_error) / dt;
  state.prev_error = error;
  const double c = state.k_p * error + state.k_i * state.integral + state.k_d * derivative;
  return clamp(c, -state.saturation, state.saturation);
}

Pose shift_sensor(const Pose& sensor_pose, double c) {
  return compose(sensor_pose, Pose::from_translation(Eigen::Vector3d(c, 0.0, 0.0)));
}

double distance_to_goal(const Eigen::Vector2d& object, const Eigen::Vector2d& target) {
  return (target - object).norm();
}

namespace {

double support(const OrientedBox& box, const Eigen::Vector3d& dir) {
  double s = 0.0;
  for (int i = 0; i < 3; ++i) s += box.extents[i] * std::abs(dir.dot(box.axes[i]));
  return s;
}

Eigen::Vector2d xy(const Eigen::Vector3d& v) { return {v.x(), v.y()}; }

}  // namespace

GoalPushPlan plan_goal_push(const PointCloud& part_cloud, const Pose& tracked_pose,
                            const Pose& target_pose, PidState& pid) {
  const OrientedBox box = compute_obb(transform_cloud(part_cloud, tracked_pose));
  if (box.extents[0] < 1e-3) throw DegenerateCloud("part too small to push");
  const OrientedBox goal_box = compute_obb(transform_cloud(part_cloud, target_pose));

  const Eigen::Vector2d object = xy(box.center);
  const Eigen::Vector2d target = xy(goal_box.center);

  Eigen::Vector3d dir = box.axes[1];
  dir.z() = 0.0;
  if (dir.norm() < 1e-6) {
    dir = box.axes[0];
    dir.z() = 0.0;
  }
  if (dir.norm() < 1e-6) throw DegenerateCloud("no in-plane push axis");
  dir.normalize();
  const Eigen::Vector2d to_goal = target - object;
  if (dir.head<2>().dot(to_goal) < 0.0) dir = -dir;

  const double e_d = support(box, dir);
  const Eigen::Vector3d base_contact = box.center - dir * e_d;

  GoalPushPlan plan;
  plan.theta = bearing_theta(object, xy(base_contact), target);
  plan.correction = pid_step(pid, plan.theta, 1.0);
  plan.distance_to_target = distance_to_goal(object, target);

  // Slide the contact along the face; positive theta (target right of the
  // heading) moves the contact left so the center line bends right.
  const Eigen::Vector3d tangent(-dir.y(), dir.x(), 0.0);
  const double shift_limit = std::max(support(box, tangent) - 0.005, 0.0);
  const double shift = clamp(plan.correction, -shift_limit, shift_limit);
  const Eigen::Vector3d contact = base_contact + shift * tangent;

  Eigen::Vector3d push_dir = box.center - contact;
  push_dir.z() = 0.0;
  push_dir.normalize();

  plan.action.kind = ActionKind::kPush;
  plan.action.position = contact;
  plan.action.direction = push_dir;
  plan.action.distance = kGoalPushIncrement;
  return plan;
}

namespace {

std::vector<double> tracked_distances(const TrackedWorld& world, const GoalSpec& goal) {
  std::vector<double> d(world.object_count());
  for (int i = 0; i < world.object_count(); ++i) {
    const Eigen::Vector2d object =
        xy(compute_obb(world.estimated_cloud(i)).center);
    const Eigen::Vector2d target =
        xy(compute_obb(transform_cloud(world.model(i), goal.targets[i])).center);
    d[i] = distance_to_goal(object, target);
  }
  return d;
}

std::vector<double> true_errors(const TrackedWorld& world, const GoalSpec& goal) {
  std::vector<double> e(world.object_count());
  for (int i = 0; i < world.object_count(); ++i) {
    const Eigen::Vector2d actual = xy(
        compute_obb(transform_cloud(world.model(i), world.true_displacement(i))).center);
    const Eigen::Vector2d target =
        xy(compute_obb(transform_cloud(world.model(i), goal.targets[i])).center);
    e[i] = distance_to_goal(actual, target);
  }
  return e;
}

}  // namespace

TrajectoryReport push_to_goal(TrackedWorld& world, const GoalSpec& goal, int max_increments) {
  if (static_cast<int>(goal.targets.size()) != world.object_count())
    throw PartCountMismatch();

  TrajectoryReport report;
  std::vector<PidState> pids(world.object_count());

  world.observe();
  for (int it = 0; it < max_increments; ++it) {
    const std::vector<double> distances = tracked_distances(world, goal);
    const int worst = static_cast<int>(
        std::max_element(distances.begin(), distances.end()) - distances.begin());

    if (distances[worst] <= goal.tolerance) {
      report.final_errors = true_errors(world, goal);
      report.success = true;
      return report;
    }

    GoalPushPlan plan = plan_goal_push(world.model(worst), world.estimated_pose(worst),
                                       goal.targets[worst], pids[worst]);
    plan.action.target_part = worst;
    const TactileReading reading = world.execute_push(plan.action);
    if (!reading.in_contact) world.observe();  // whiff: refresh and replan

    IterationRecord rec;
    rec.iteration = it;
    rec.part = worst;
    rec.theta = plan.theta;
    rec.correction = plan.correction;
    rec.contact = reading.in_contact;
    rec.distances = tracked_distances(world, goal);
    for (int i = 0; i < world.object_count(); ++i)
      rec.estimates.push_back(world.estimated_pose(i));
    report.iterations.push_back(std::move(rec));
    report.increments = it + 1;
  }

  report.final_errors = true_errors(world, goal);
  const double worst_final =
      *std::max_element(report.final_errors.begin(), report.final_errors.end());
  report.success = worst_final <= goal.tolerance;
  if (!report.success) throw ControlBudgetExhausted(report);
  return report;
}

TrajectoryReport pull_to_goal(TrackedWorld& world, const GoalSpec& goal) {
  if (static_cast<int>(goal.targets.size()) != world.object_count())
    throw PartCountMismatch();
  if (world.object_count() < 2) throw Error("pull_to_goal needs a two-part object");

  TrajectoryReport report;
  world.observe();

  for (int attempt = 0; attempt < 2; ++attempt) {
    const std::vector<double> distances = tracked_distances(world, goal);
    const int pull_part = static_cast<int>(
        std::max_element(distances.begin(), distances.end()) - distances.begin());
    const int hold_part = pull_part == 0 ? 1 : 0;

    if (distances[pull_part] <= goal.tolerance) break;

    auto [hold, pull] =
        plan_hold_pull(world.estimated_cloud(hold_part), world.estimated_cloud(pull_part));
    hold.target_part = hold_part;
    pull.target_part = pull_part;

    // Pull length: residual to the goal projected on the pull axis.
    const Eigen::Vector2d object = xy(compute_obb(world.estimated_cloud(pull_part)).center);
    const Eigen::Vector2d target = xy(
        compute_obb(transform_cloud(world.model(pull_part), goal.targets[pull_part])).center);
    const double along = pull.direction.head<2>().dot(target - object);
    if (std::abs(along) < 1e-6) break;
    if (along < 0.0) pull.direction = -pull.direction;
    pull.distance = std::abs(along);

    world.execute_hold_pull(hold, pull);

    IterationRecord rec;
    rec.iteration = attempt;
    rec.part = pull_part;
    rec.distances = tracked_distances(world, goal);
    for (int i = 0; i < world.object_count(); ++i)
      rec.estimates.push_back(world.estimated_pose(i));
    report.iterations.push_back(std::move(rec));
    report.increments = attempt + 1;
  }

  report.final_errors = true_errors(world, goal);
  const double worst =
      *std::max_element(report.final_errors.begin(), report.final_errors.end());
  report.success = worst <= goal.tolerance;
  if (!report.success) throw ControlBudgetExhausted(report);
  return report;
}

}  // namespace artreg
