#pragma once

#include <string>
#include <vector>

#include "artreg/cloud.hpp"
#include "artreg/liegroup.hpp"

namespace artreg {

// Table workspace, centered on the origin at z = 0.
constexpr double kWorkspaceHalfX = 0.5;    // 1.0 m
constexpr double kWorkspaceHalfY = 0.275;  // 0.55 m

enum class JointKind { kRigid, kRevolute, kPrismatic };

struct JointDef {
  JointKind kind = JointKind::kRigid;
  int parent = 0;
  int child = 1;
  Eigen::Vector3d axis = Eigen::Vector3d::UnitZ();   // parent body frame
  Eigen::Vector3d pivot = Eigen::Vector3d::Zero();   // parent body frame (revolute)
  double limits[2] = {0.0, 0.0};
  double value = 0.0;

  // Child placement in the parent frame at the loaded joint value; derived
  // once when the scene is finalized.
  Pose rest_child_in_parent;
};

struct Part {
  std::string name;
  PointCloud cloud;  // body frame
  Pose pose;         // world
  Eigen::Vector3d com_offset = Eigen::Vector3d::Zero();  // body frame
};

struct CameraModel {
  Pose pose;                  // camera frame in world, optical +z forward
  int grid_resolution = 160;  // z-buffer cells per axis
  double noise_sigma = 0.0;   // m, along the view ray
  double dropout_prob = 0.0;
  std::uint64_t seed = 0;

  static CameraModel top_down(double height = 1.2);
  static CameraModel angled_45(double distance = 1.2);
};

struct TactileReading {
  PointCloud contacts;               // world frame
  std::vector<double> normal_force;  // N, per contact
  bool in_contact = false;
};

struct KinematicScene {
  std::vector<Part> parts;
  std::vector<JointDef> joints;
  bool with_table = true;
  double kappa_com = 2.0;  // rad/m^2, rotational slip per lever-arm x distance

  // Pusher body rendered into the depth image while an action is running.
  std::optional<OrientedBox> tool;

  int part_index(const std::string& name) const;
  // Derives each joint's rest transform from the loaded part poses.
  void finalize();
};

std::vector<Pose> forward_kinematics(const KinematicScene& scene);

// Sets a joint value (clamped to limits) and recomputes the child pose from
// the parent.
void set_joint_value(KinematicScene& scene, int joint, double value);

// Rigidly transports every part: pose' = delta * pose.
void apply_root_motion(KinematicScene& scene, const Pose& delta);

struct DepthSample {
  PointCloud cloud;
  std::vector<int> labels;  // part index, -1 for table, -2 for tool
};

DepthSample depth_sample(const KinematicScene& scene, const CameraModel& camera);

TactileReading push_step(KinematicScene& scene, int part_index,
                         const Eigen::Vector3d& contact_point,
                         const Eigen::Vector3d& direction, double distance);

TactileReading hold_pull_step(KinematicScene& scene, int hold_part, int pull_part,
                              const Eigen::Vector3d& pull_direction, double distance);

KinematicScene scene_from_config(const std::string& json_text);
KinematicScene scene_from_config(const std::string& json_text, const std::string& base_dir);
KinematicScene builtin_scene(const std::string& name);
std::vector<std::string> builtin_scene_names();

// Scene JSON plus its camera and seed blocks, as written by the CLI.
struct SceneFile {
  KinematicScene scene;
  CameraModel camera = CameraModel::top_down();
  std::uint64_t seed = 0;
};
SceneFile load_scene_file(const std::string& json_text, const std::string& base_dir = "");

// Surface-sampled axis-aligned box, dims are full edge lengths.
PointCloud sample_box(const Eigen::Vector3d& dims, double spacing,
                      const Eigen::Vector3d& color);
PointCloud sample_box_open(const Eigen::Vector3d& dims, double spacing,
                           const Eigen::Vector3d& color, int skip_face);

bool inside_workspace(const Eigen::Vector3d& p, double margin = 0.0);

}  // namespace artreg
