#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "artreg/actions.hpp"
#include "artreg/mukf.hpp"
#include "artreg/segmentation.hpp"
#include "artreg/sim.hpp"

namespace artreg {

struct PipelineConfig {
  SegmentationConfig segmentation;
  UkfParams ukf;
  Vector6d q_diag = Vector6d::Constant(1e-3);
  double r_scalar = 1e-4;
  int observation_cap = 100;
  double association_gate = 0.3;
  int iterations_per_frame = 2;   // filter cycles per rendered frame
  double action_substep = 0.01;   // m of travel between observations
  std::uint64_t seed = 1;
};

// Closed-loop harness around the simulator: renders depth frames, segments
// them, and runs one independent filter per object found at start-up.
// Object models are the segmented clouds of the first frame, so every
// tracked pose is the displacement since capture.
class TrackedWorld {
 public:
  TrackedWorld(KinematicScene scene, CameraModel camera, PipelineConfig config);

  // Renders the first frame, captures per-segment object models, associates
  // them with simulator parts for ground-truth reporting.
  void initialize();

  int object_count() const { return static_cast<int>(trackers_.size()); }

  // One sense-update cycle over all objects.
  void observe();

  // Runs an action in substeps, observing after each one so the filters see
  // intermediate motion; tactile contacts from each substep are fused into
  // the following update. Returns the final reading.
  TactileReading execute_push(const ActionSpec& action);
  TactileReading execute_hold_pull(const ActionSpec& hold, const ActionSpec& pull);

  const TrackState& state(int object) const { return trackers_[object].state; }
  const PointCloud& model(int object) const {
    return trackers_[object].model->object_model();
  }
  Pose estimated_pose(int object) const { return trackers_[object].state.mean; }
  // Estimated current world cloud of the object.
  PointCloud estimated_cloud(int object) const;

  // Displacement of the associated simulator part since capture.
  Pose true_displacement(int object) const;
  int sim_part(int object) const { return trackers_[object].sim_part; }
  // Tracked object associated with a simulator part, or -1.
  int object_of_part(int part) const;

  KinematicScene& scene() { return scene_; }
  const KinematicScene& scene() const { return scene_; }
  const CameraModel& camera() const { return camera_; }
  const PipelineConfig& config() const { return config_; }

  int frame_count() const { return frame_; }

 private:
  struct ObjectTracker {
    TrackState state;
    std::unique_ptr<MeasurementModel> model;
    int sim_part = -1;
    Pose capture_part_pose;  // simulator part pose at t=0
    std::optional<PointCloud> pending_tactile;
  };

  DepthSample render();
  void update_trackers(const DepthSample& sample);
  OrientedBox tool_box_for(const ActionSpec& action) const;

  KinematicScene scene_;
  CameraModel camera_;
  PipelineConfig config_;
  std::vector<ObjectTracker> trackers_;
  int frame_ = 0;
  bool initialized_ = false;
};

struct TrackRunOptions {
  enum class Motion { kStatic, kRandomWalk };
  Motion motion = Motion::kRandomWalk;
  int frames = 50;
  double max_step = 0.04;                      // m per frame
  double max_rot_step = 6.0 * kPi / 180.0;     // rad per frame
  double max_joint_step = 0.12;                // rad or m per frame
  std::uint64_t seed = 1;
};

struct TrackRunResult {
  std::vector<std::vector<Pose>> estimates;  // [frame][object]
  std::vector<std::vector<Pose>> truths;     // [frame][object]
  std::vector<std::vector<double>> errors;   // [frame][object], planar center error
  double mean_error = 0.0;
};

// Scripted-motion tracking run: moves the scene each frame (seeded random
// walk over the workspace plus joint wiggle for articulated scenes), then
// observes and records per-object pose estimates against ground truth.
TrackRunResult run_tracking(TrackedWorld& world, const TrackRunOptions& options);

}  // namespace artreg
