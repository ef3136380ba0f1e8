#include "artreg/sim.hpp"

#include <algorithm>
#include <limits>
#include <unordered_map>

namespace artreg {

namespace {

Pose joint_transform(const JointDef& j, double value) {
  switch (j.kind) {
    case JointKind::kRevolute:
      return Pose::rotation_about(j.axis, j.pivot, value);
    case JointKind::kPrismatic:
      return Pose::from_translation(value * j.axis);
    case JointKind::kRigid:
      return Pose::identity();
  }
  return Pose::identity();
}

// Joint that links `part` to another part, or -1. Scenes here are pairs or
// short chains, so the first match is the relevant one.
int joint_touching(const KinematicScene& scene, int part) {
  for (std::size_t i = 0; i < scene.joints.size(); ++i)
    if (scene.joints[i].parent == part || scene.joints[i].child == part)
      return static_cast<int>(i);
  return -1;
}

std::vector<int> connected_component(const KinematicScene& scene, int part) {
  std::vector<int> comp{part};
  std::vector<bool> seen(scene.parts.size(), false);
  seen[part] = true;
  for (std::size_t k = 0; k < comp.size(); ++k) {
    for (const auto& j : scene.joints) {
      const int other = j.parent == comp[k] ? j.child : (j.child == comp[k] ? j.parent : -1);
      if (other >= 0 && !seen[other]) {
        seen[other] = true;
        comp.push_back(other);
      }
    }
  }
  return comp;
}

void check_workspace(const KinematicScene& scene, const std::vector<int>& parts,
                     const std::vector<Pose>& new_poses) {
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const Eigen::Vector3d c =
        apply(new_poses[k], centroid(scene.parts[parts[k]].cloud));
    if (!inside_workspace(c))
      throw WorkspaceExceeded("part '" + scene.parts[parts[k]].name +
                              "' would leave the workspace");
  }
}

TactileReading make_contact_reading(const KinematicScene& scene, int part,
                                    const Eigen::Vector3d& contact_world,
                                    const Pose& motion, double force) {
  TactileReading reading;
  const Part& p = scene.parts[part];
  // Surface points near the planned contact, reported at their post-motion
  // world positions.
  std::vector<std::pair<double, Eigen::Vector3d>> near;
  for (const auto& body_pt : p.cloud.points) {
    const Eigen::Vector3d w = apply(p.pose, body_pt);
    const double d = (w - contact_world).norm();
    if (d < 0.015) near.emplace_back(d, apply(motion, w));
  }
  std::sort(near.begin(), near.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  const std::size_t count = std::min<std::size_t>(near.size(), 6);
  for (std::size_t i = 0; i < count; ++i) {
    reading.contacts.points.push_back(near[i].second);
    reading.normal_force.push_back(force);
  }
  if (reading.contacts.empty()) {
    reading.contacts.points.push_back(apply(motion, contact_world));
    reading.normal_force.push_back(force);
  }
  reading.in_contact = true;
  return reading;
}

}  // namespace

bool inside_workspace(const Eigen::Vector3d& p, double margin) {
  return std::abs(p.x()) <= kWorkspaceHalfX - margin &&
         std::abs(p.y()) <= kWorkspaceHalfY - margin;
}

CameraModel CameraModel::top_down(double height) {
  CameraModel cam;
  // Optical +z looks straight down at the table.
  Eigen::Matrix3d r;
  r << 1, 0, 0, 0, -1, 0, 0, 0, -1;
  cam.pose = Pose(r, Eigen::Vector3d(0.0, 0.0, height));
  return cam;
}

CameraModel CameraModel::angled_45(double distance) {
  CameraModel cam;
  const double c = std::sqrt(0.5);
  const Eigen::Vector3d position(-distance * c, 0.0, distance * c);
  const Eigen::Vector3d forward = (-position).normalized();  // toward origin
  const Eigen::Vector3d right = Eigen::Vector3d::UnitY().cross(forward).normalized();
  const Eigen::Vector3d down = forward.cross(right).normalized();
  Eigen::Matrix3d r;
  r.col(0) = right;
  r.col(1) = down;
  r.col(2) = forward;
  cam.pose = Pose(r, position);
  return cam;
}

int KinematicScene::part_index(const std::string& name) const {
  for (std::size_t i = 0; i < parts.size(); ++i)
    if (parts[i].name == name) return static_cast<int>(i);
  return -1;
}

void KinematicScene::finalize() {
  for (auto& j : joints) {
    const Pose parent_pose = parts[j.parent].pose;
    const Pose child_pose = parts[j.child].pose;
    j.rest_child_in_parent =
        compose(inverse(joint_transform(j, j.value)), compose(inverse(parent_pose), child_pose));
  }
}

std::vector<Pose> forward_kinematics(const KinematicScene& scene) {
  std::vector<Pose> poses(scene.parts.size());
  for (std::size_t i = 0; i < scene.parts.size(); ++i) poses[i] = scene.parts[i].pose;
  // Joints are authored parent-before-child; one ordered pass suffices.
  for (const auto& j : scene.joints) {
    if (j.value < j.limits[0] - 1e-12 || j.value > j.limits[1] + 1e-12)
      throw JointLimitViolation("joint value " + std::to_string(j.value) +
                                " outside limits");
    poses[j.child] =
        compose(poses[j.parent], compose(joint_transform(j, j.value), j.rest_child_in_parent));
  }
  return poses;
}

void set_joint_value(KinematicScene& scene, int joint, double value) {
  JointDef& j = scene.joints[joint];
  j.value = clamp(value, j.limits[0], j.limits[1]);
  const auto poses = forward_kinematics(scene);
  for (std::size_t i = 0; i < scene.parts.size(); ++i) scene.parts[i].pose = poses[i];
}

void apply_root_motion(KinematicScene& scene, const Pose& delta) {
  for (auto& part : scene.parts) part.pose = compose(delta, part.pose);
}

DepthSample depth_sample(const KinematicScene& scene, const CameraModel& camera) {
  // World points of every part, then the table grid, then the tool body.
  PointCloud world;
  std::vector<int> labels;
  for (std::size_t i = 0; i < scene.parts.size(); ++i) {
    const PointCloud part_world = transform_cloud(scene.parts[i].cloud, scene.parts[i].pose);
    world.append(part_world);
    labels.insert(labels.end(), part_world.size(), static_cast<int>(i));
  }
  if (scene.with_table) {
    PointCloud table;
    const double spacing = 0.0125;
    const Eigen::Vector3d table_color(0.78, 0.78, 0.78);
    for (double x = -kWorkspaceHalfX; x <= kWorkspaceHalfX + 1e-9; x += spacing)
      for (double y = -kWorkspaceHalfY; y <= kWorkspaceHalfY + 1e-9; y += spacing) {
        table.points.emplace_back(x, y, 0.0);
        table.colors.push_back(table_color);
      }
    world.append(table);
    labels.insert(labels.end(), table.size(), -1);
  }
  if (scene.tool) {
    const OrientedBox& box = *scene.tool;
    PointCloud tool_cloud = sample_box(2.0 * box.extents, 0.008, Eigen::Vector3d(0.1, 0.1, 0.1));
    Eigen::Matrix3d r;
    for (int i = 0; i < 3; ++i) r.col(i) = box.axes[i];
    if (r.determinant() < 0.0) r.col(2) = -r.col(2);
    const PointCloud tool_world = transform_cloud(tool_cloud, Pose(r, box.center));
    world.append(tool_world);
    labels.insert(labels.end(), tool_world.size(), -2);
  }

  DepthSample out;
  if (world.empty()) return out;

  const Pose world_to_cam = inverse(camera.pose);
  const int n = static_cast<int>(world.size());
  std::vector<Eigen::Vector3d> cam_pts(n);
  std::vector<bool> in_front(n);
  double min_x = std::numeric_limits<double>::infinity(), max_x = -min_x;
  double min_y = min_x, max_y = -min_x;
  for (int i = 0; i < n; ++i) {
    cam_pts[i] = apply(world_to_cam, world.points[i]);
    in_front[i] = cam_pts[i].z() > 0.05;
    if (in_front[i]) {
      min_x = std::min(min_x, cam_pts[i].x());
      max_x = std::max(max_x, cam_pts[i].x());
      min_y = std::min(min_y, cam_pts[i].y());
      max_y = std::max(max_y, cam_pts[i].y());
    }
  }
  if (min_x > max_x) return out;

  const int res = std::max(camera.grid_resolution, 1);
  const double cell_x = std::max((max_x - min_x) / res, 1e-9);
  const double cell_y = std::max((max_y - min_y) / res, 1e-9);

  // Orthographic z-buffer: per cell the point closest to the camera wins,
  // ties going to the lower input index.
  std::unordered_map<long, int> buffer;
  buffer.reserve(n);
  for (int i = 0; i < n; ++i) {
    if (!in_front[i]) continue;
    const long cx = std::min<long>(static_cast<long>((cam_pts[i].x() - min_x) / cell_x), res - 1);
    const long cy = std::min<long>(static_cast<long>((cam_pts[i].y() - min_y) / cell_y), res - 1);
    const long key = cx * (res + 1) + cy;
    auto it = buffer.find(key);
    if (it == buffer.end() || cam_pts[i].z() < cam_pts[it->second].z()) buffer[key] = i;
  }

  std::vector<int> survivors;
  survivors.reserve(buffer.size());
  for (const auto& [key, idx] : buffer) survivors.push_back(idx);
  std::sort(survivors.begin(), survivors.end());

  Rng rng(camera.seed);
  const Eigen::Vector3d cam_center = camera.pose.translation;
  for (int idx : survivors) {
    if (camera.dropout_prob > 0.0 && rng.uniform() < camera.dropout_prob) continue;
    Eigen::Vector3d p = world.points[idx];
    if (camera.noise_sigma > 0.0) {
      const Eigen::Vector3d ray = (p - cam_center).normalized();
      p += camera.noise_sigma * rng.gaussian() * ray;
    }
    out.cloud.points.push_back(p);
    if (world.has_colors()) out.cloud.colors.push_back(world.colors[idx]);
    out.labels.push_back(labels[idx]);
  }
  return out;
}

TactileReading push_step(KinematicScene& scene, int part_index,
                         const Eigen::Vector3d& contact_point,
                         const Eigen::Vector3d& direction, double distance) {
  if (distance <= 0.0) throw Error("push distance must be positive");
  Eigen::Vector3d dir = direction;
  dir.z() = 0.0;  // pushes act in the table plane
  const double dn = dir.norm();
  if (dn < 1e-9) throw Error("push direction has no in-plane component");
  dir /= dn;

  Part& part = scene.parts[part_index];

  // A planned contact that misses the true part face is a whiff: the pusher
  // reports loss of contact and nothing moves.
  const OrientedBox part_box = compute_obb(transform_cloud(part.cloud, part.pose));
  if (!part_box.contains(contact_point, 0.01)) {
    TactileReading miss;
    miss.in_contact = false;
    return miss;
  }

  const int joint_id = joint_touching(scene, part_index);
  const double nominal_force = 8.0;

  if (joint_id < 0) {
    // Unattached part: quasi-static translation plus the center-of-mass slip
    // term when the push line misses the weighted CoM.
    const Eigen::Vector3d com_world =
        apply(part.pose, centroid(part.cloud) + part.com_offset);
    const double lever = cross2d(Eigen::Vector2d(dir.x(), dir.y()),
                                 Eigen::Vector2d(com_world.x() - contact_point.x(),
                                                 com_world.y() - contact_point.y()));
    const double dpsi = scene.kappa_com * lever * distance;

    const Pose translation = Pose::from_translation(distance * dir);
    const Eigen::Vector3d com_after = apply(translation, com_world);
    const Pose motion =
        compose(Pose::rotation_about(Eigen::Vector3d::UnitZ(), com_after, dpsi), translation);

    check_workspace(scene, {part_index}, {compose(motion, part.pose)});
    const TactileReading reading =
        make_contact_reading(scene, part_index, contact_point, motion, nominal_force);
    part.pose = compose(motion, part.pose);
    return reading;
  }

  JointDef& joint = scene.joints[joint_id];
  const int num_joints_on_part = [&] {
    int c = 0;
    for (const auto& j : scene.joints)
      if (j.parent == part_index || j.child == part_index) ++c;
    return c;
  }();

  if (joint.kind == JointKind::kRevolute && num_joints_on_part == 1) {
    // Pushed part swings about the hinge; the rest of the assembly is held
    // by friction.
    const Pose& parent_pose = scene.parts[joint.parent].pose;
    const Eigen::Vector3d pivot_w = apply(parent_pose, joint.pivot);
    const Eigen::Vector3d axis_w = (parent_pose.rotation * joint.axis).normalized();

    const Eigen::Vector2d lever_vec(contact_point.x() - pivot_w.x(),
                                    contact_point.y() - pivot_w.y());
    const double r = lever_vec.norm();
    if (r < 0.01) throw LeverTooSmall();

    double dtheta = distance / r;
    if (cross2d(lever_vec, Eigen::Vector2d(dir.x(), dir.y())) < 0.0) dtheta = -dtheta;

    // Clamp the swing to the joint limits.
    if (part_index == joint.child) {
      dtheta = clamp(joint.value + dtheta, joint.limits[0], joint.limits[1]) - joint.value;
    } else {
      dtheta = -(clamp(joint.value - dtheta, joint.limits[0], joint.limits[1]) - joint.value);
    }

    const Pose motion = Pose::rotation_about(axis_w, pivot_w, dtheta);
    check_workspace(scene, {part_index}, {compose(motion, part.pose)});
    const TactileReading reading =
        make_contact_reading(scene, part_index, contact_point, motion, nominal_force);
    part.pose = compose(motion, part.pose);
    joint.value += part_index == joint.child ? dtheta : -dtheta;
    return reading;
  }

  // Rigid and prismatic assemblies translate as one body: a push cannot
  // actuate a slider. Parts with several joints are transported the same way.
  const auto comp = connected_component(scene, part_index);
  const Pose motion = Pose::from_translation(distance * dir);
  std::vector<Pose> new_poses;
  for (int p : comp) new_poses.push_back(compose(motion, scene.parts[p].pose));
  check_workspace(scene, comp, new_poses);
  const TactileReading reading =
      make_contact_reading(scene, part_index, contact_point, motion, nominal_force);
  for (std::size_t k = 0; k < comp.size(); ++k) scene.parts[comp[k]].pose = new_poses[k];
  return reading;
}

TactileReading hold_pull_step(KinematicScene& scene, int hold_part, int pull_part,
                              const Eigen::Vector3d& pull_direction, double distance) {
  if (hold_part == pull_part) throw Error("hold and pull parts must differ");
  Part& pulled = scene.parts[pull_part];

  const Eigen::Vector3d grasp =
      apply(pulled.pose, centroid(pulled.cloud));
  if (!inside_workspace(grasp))
    throw NoGraspableEdge("pull pose lies outside the workspace");

  const double grasp_force = 5.0;

  int joint_id = -1;
  for (std::size_t i = 0; i < scene.joints.size(); ++i) {
    const auto& j = scene.joints[i];
    if ((j.parent == hold_part && j.child == pull_part) ||
        (j.parent == pull_part && j.child == hold_part))
      joint_id = static_cast<int>(i);
  }

  if (joint_id < 0) {
    // Free part: the pull simply drags it.
    const Pose motion = Pose::from_translation(distance * pull_direction.normalized());
    check_workspace(scene, {pull_part}, {compose(motion, pulled.pose)});
    const TactileReading reading =
        make_contact_reading(scene, pull_part, grasp, motion, grasp_force);
    pulled.pose = compose(motion, pulled.pose);
    return reading;
  }

  JointDef& joint = scene.joints[joint_id];
  if (joint.kind != JointKind::kPrismatic) {
    // Rigid (or revolute) linkage resists the pull: nothing moves and the
    // gripper reports sustained contact with a rising grip load.
    TactileReading reading =
        make_contact_reading(scene, pull_part, grasp, Pose::identity(), 3.0 * grasp_force);
    reading.in_contact = true;
    return reading;
  }

  const Pose& parent_pose = scene.parts[joint.parent].pose;
  const Eigen::Vector3d axis_w = (parent_pose.rotation * joint.axis).normalized();
  const double along = pull_direction.normalized().dot(axis_w);
  const double sign = along >= 0.0 ? 1.0 : -1.0;
  const double requested = sign * distance;

  double displacement;  // movement of the pulled part along axis_w
  if (pull_part == joint.child) {
    const double new_value = clamp(joint.value + requested, joint.limits[0], joint.limits[1]);
    displacement = new_value - joint.value;
    joint.value = new_value;
  } else {
    const double new_value = clamp(joint.value - requested, joint.limits[0], joint.limits[1]);
    displacement = joint.value - new_value;
    joint.value = new_value;
  }

  const Pose motion = Pose::from_translation(displacement * axis_w);
  check_workspace(scene, {pull_part}, {compose(motion, pulled.pose)});
  const TactileReading reading =
      make_contact_reading(scene, pull_part, grasp, motion, grasp_force);
  pulled.pose = compose(motion, pulled.pose);
  return reading;
}

}  // namespace artreg
