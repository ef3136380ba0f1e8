#include "artreg/pipeline.hpp"

#include <algorithm>

namespace artreg {

TrackedWorld::TrackedWorld(KinematicScene scene, CameraModel camera, PipelineConfig config)
    : scene_(std::move(scene)), camera_(camera), config_(config) {}

DepthSample TrackedWorld::render() {
  CameraModel cam = camera_;
  cam.seed = Rng(config_.seed).fork(0xCA11).fork(frame_).next_u64();
  ++frame_;
  return depth_sample(scene_, cam);
}

void TrackedWorld::initialize() {
  const DepthSample sample = render();
  SegmentationConfig seg = config_.segmentation;
  seg.seed = config_.seed;
  const SegmentSet segments = segment_scene(sample.cloud, seg, scene_.tool);
  if (segments.segments.empty())
    throw Error("initial segmentation found no objects to track");

  const auto part_poses = forward_kinematics(scene_);
  for (std::size_t s = 0; s < segments.segments.size(); ++s) {
    ObjectTracker tracker;
    tracker.state.mean = Pose::identity();
    tracker.state.cov = config_.q_diag.asDiagonal();
    tracker.state.process_noise = config_.q_diag.asDiagonal();
    tracker.state.r_scalar = config_.r_scalar;
    tracker.model = std::make_unique<MeasurementModel>(
        segments.segments[s], config_.observation_cap,
        Rng(config_.seed).fork(0x0B5).fork(s).next_u64());

    // Associate the capture with the nearest simulator part for ground truth.
    const Eigen::Vector3d seg_centroid = centroid(segments.segments[s]);
    double best = 1e9;
    for (std::size_t p = 0; p < scene_.parts.size(); ++p) {
      const Eigen::Vector3d part_centroid =
          apply(part_poses[p], centroid(scene_.parts[p].cloud));
      const double d = (part_centroid - seg_centroid).norm();
      if (d < best) {
        best = d;
        tracker.sim_part = static_cast<int>(p);
        tracker.capture_part_pose = part_poses[p];
      }
    }
    trackers_.push_back(std::move(tracker));
  }
  initialized_ = true;
}

void TrackedWorld::update_trackers(const DepthSample& sample) {
  SegmentationConfig seg = config_.segmentation;
  seg.seed = config_.seed;
  const SegmentSet segments = segment_scene(sample.cloud, seg, scene_.tool);

  for (auto& tracker : trackers_) {
    for (int it = 0; it < config_.iterations_per_frame; ++it) {
      const auto result =
          track_step(tracker.state, segments, *tracker.model, tracker.pending_tactile,
                     config_.ukf, config_.association_gate);
      tracker.state = result.state;
      if (!result.associated) break;
    }
    tracker.pending_tactile.reset();
  }
}

void TrackedWorld::observe() {
  if (!initialized_) throw Error("TrackedWorld::initialize before observe");
  update_trackers(render());
}

OrientedBox TrackedWorld::tool_box_for(const ActionSpec& action) const {
  // Slim vertical pusher finger just behind the contact point.
  OrientedBox box;
  Eigen::Vector3d dir = action.direction;
  dir.z() = 0.0;
  dir.normalize();
  box.center = action.position - 0.012 * dir + Eigen::Vector3d(0, 0, 0.03);
  box.axes[0] = Eigen::Vector3d::UnitZ();
  box.axes[1] = Eigen::Vector3d(-dir.y(), dir.x(), 0.0);
  box.axes[2] = dir;
  box.extents = Eigen::Vector3d(0.05, 0.02, 0.01);
  return box;
}

TactileReading TrackedWorld::execute_push(const ActionSpec& action) {
  if (!initialized_) throw Error("TrackedWorld::initialize before execute_push");
  const int part = trackers_[action.target_part].sim_part;

  TactileReading reading;
  double remaining = action.distance;
  Eigen::Vector3d contact = action.position;
  while (remaining > 1e-9) {
    const double step = std::min(config_.action_substep, remaining);
    reading = push_step(scene_, part, contact, action.direction, step);
    if (!reading.in_contact) break;  // whiffed: the contact estimate was off

    scene_.tool = tool_box_for({action.kind, action.target_part, contact, action.direction,
                                step});
    trackers_[action.target_part].pending_tactile = reading.contacts;
    observe();

    // The pusher rides with the face it is touching.
    if (!reading.contacts.empty()) contact = centroid(reading.contacts);
    remaining -= step;
  }
  scene_.tool.reset();
  return reading;
}

TactileReading TrackedWorld::execute_hold_pull(const ActionSpec& hold, const ActionSpec& pull) {
  if (!initialized_) throw Error("TrackedWorld::initialize before execute_hold_pull");
  const int hold_part = trackers_[hold.target_part].sim_part;
  const int pull_part = trackers_[pull.target_part].sim_part;

  TactileReading reading;
  double remaining = pull.distance;
  while (remaining > 1e-9) {
    const double step = std::min(config_.action_substep, remaining);
    reading = hold_pull_step(scene_, hold_part, pull_part, pull.direction, step);

    trackers_[pull.target_part].pending_tactile = reading.contacts;
    observe();
    remaining -= step;
  }
  return reading;
}

PointCloud TrackedWorld::estimated_cloud(int object) const {
  return transform_cloud(trackers_[object].model->object_model(),
                         trackers_[object].state.mean);
}

Pose TrackedWorld::true_displacement(int object) const {
  const auto poses = forward_kinematics(scene_);
  const ObjectTracker& t = trackers_[object];
  return compose(poses[t.sim_part], inverse(t.capture_part_pose));
}

int TrackedWorld::object_of_part(int part) const {
  for (std::size_t i = 0; i < trackers_.size(); ++i)
    if (trackers_[i].sim_part == part) return static_cast<int>(i);
  return -1;
}

TrackRunResult run_tracking(TrackedWorld& world, const TrackRunOptions& options) {
  TrackRunResult result;
  Rng rng(options.seed);
  KinematicScene& scene = world.scene();

  double error_sum = 0.0;
  int error_count = 0;
  for (int frame = 0; frame < options.frames; ++frame) {
    if (options.motion == TrackRunOptions::Motion::kRandomWalk) {
      const double angle = rng.uniform(0.0, 2.0 * kPi);
      const double step = rng.uniform(0.2, 1.0) * options.max_step;
      Eigen::Vector3d t(step * std::cos(angle), step * std::sin(angle), 0.0);

      // Steer back toward the middle instead of walking off the table.
      for (const auto& part : scene.parts) {
        const Eigen::Vector3d c = apply(part.pose, centroid(part.cloud));
        if (std::abs(c.x() + t.x()) > kWorkspaceHalfX - 0.15) t.x() = -t.x();
        if (std::abs(c.y() + t.y()) > kWorkspaceHalfY - 0.1) t.y() = -t.y();
      }

      const double dyaw = rng.uniform(-1.0, 1.0) * options.max_rot_step;
      Eigen::Vector3d pivot = Eigen::Vector3d::Zero();
      for (const auto& part : scene.parts) pivot += apply(part.pose, centroid(part.cloud));
      pivot /= static_cast<double>(scene.parts.size());
      const Pose delta =
          compose(Pose::from_translation(t),
                  Pose::rotation_about(Eigen::Vector3d::UnitZ(), pivot, dyaw));
      apply_root_motion(scene, delta);

      for (std::size_t j = 0; j < scene.joints.size(); ++j) {
        if (scene.joints[j].kind == JointKind::kRigid) continue;
        const double dv = rng.uniform(-1.0, 1.0) * options.max_joint_step;
        set_joint_value(scene, static_cast<int>(j), scene.joints[j].value + dv);
      }
    }

    world.observe();

    std::vector<Pose> estimates, truths;
    std::vector<double> errors;
    for (int i = 0; i < world.object_count(); ++i) {
      const Pose est = world.estimated_pose(i);
      const Pose truth = world.true_displacement(i);
      estimates.push_back(est);
      truths.push_back(truth);
      const Eigen::Vector3d c = centroid(world.model(i));
      const Eigen::Vector3d e = apply(est, c) - apply(truth, c);
      errors.push_back(std::hypot(e.x(), e.y()));
      error_sum += errors.back();
      ++error_count;
    }
    result.estimates.push_back(std::move(estimates));
    result.truths.push_back(std::move(truths));
    result.errors.push_back(std::move(errors));
  }
  result.mean_error = error_count > 0 ? error_sum / error_count : 0.0;
  return result;
}

}  // namespace artreg
