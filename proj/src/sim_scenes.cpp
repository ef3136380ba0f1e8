#include <filesystem>

#include <nlohmann/json.hpp>

#include "artreg/sim.hpp"

namespace artreg {

using nlohmann::json;

PointCloud sample_box(const Eigen::Vector3d& dims, double spacing,
                      const Eigen::Vector3d& color) {
  return sample_box_open(dims, spacing, color, -1);
}

// Surface grid over the box faces; skip_face in {0..5} = {+x,-x,+y,-y,+z,-z}
// leaves that face open.
PointCloud sample_box_open(const Eigen::Vector3d& dims, double spacing,
                           const Eigen::Vector3d& color, int skip_face) {
  PointCloud cloud;
  const Eigen::Vector3d h = 0.5 * dims;
  auto steps = [&](double len) { return std::max(1, static_cast<int>(std::round(len / spacing))); };

  for (int axis = 0; axis < 3; ++axis) {
    const int u = (axis + 1) % 3, v = (axis + 2) % 3;
    const int nu = steps(dims[u]), nv = steps(dims[v]);
    for (int side = 0; side < 2; ++side) {
      const int face = 2 * axis + side;
      if (face == skip_face) continue;
      const double w = side == 0 ? h[axis] : -h[axis];
      for (int i = 0; i <= nu; ++i)
        for (int j = 0; j <= nv; ++j) {
          Eigen::Vector3d p;
          p[axis] = w;
          p[u] = -h[u] + dims[u] * i / nu;
          p[v] = -h[v] + dims[v] * j / nv;
          cloud.points.push_back(p);
          cloud.colors.push_back(color);
        }
    }
  }
  return cloud;
}

namespace {

constexpr double kSpacing = 0.008;

const Eigen::Vector3d kPalette[4] = {
    {0.85, 0.15, 0.15}, {0.15, 0.25, 0.85}, {0.15, 0.75, 0.20}, {0.85, 0.75, 0.15}};

Part make_part(const std::string& name, const Eigen::Vector3d& dims, double cx, double cy,
               const Eigen::Vector3d& color, double z_center = -1.0, int skip_face = -1) {
  Part part;
  part.name = name;
  part.cloud = sample_box_open(dims, kSpacing, color, skip_face);
  const double z = z_center < 0.0 ? dims.z() / 2.0 : z_center;
  part.pose = Pose::from_translation(Eigen::Vector3d(cx, cy, z));
  return part;
}

JointDef make_joint(JointKind kind, int parent, int child, const Eigen::Vector3d& axis,
                    const Eigen::Vector3d& pivot_body, double lo, double hi) {
  JointDef j;
  j.kind = kind;
  j.parent = parent;
  j.child = child;
  j.axis = axis;
  j.pivot = pivot_body;
  j.limits[0] = lo;
  j.limits[1] = hi;
  j.value = 0.0;
  return j;
}

// Two-part layouts used by the articulation-detection scenes; inner faces
// sit 2 cm apart with the linkage at the origin.
KinematicScene make_pair(int geometry, JointKind kind) {
  KinematicScene scene;
  switch (geometry) {
    case 0:
      scene.parts.push_back(
          make_part("part-a", {0.10, 0.06, 0.04}, -0.06, 0.0, kPalette[0]));
      scene.parts.push_back(
          make_part("part-b", {0.10, 0.06, 0.04}, 0.06, 0.0, kPalette[1]));
      break;
    case 1:
      scene.parts.push_back(
          make_part("part-a", {0.12, 0.05, 0.015}, -0.07, 0.0, kPalette[0]));
      scene.parts.push_back(
          make_part("part-b", {0.08, 0.08, 0.05}, 0.05, 0.0, kPalette[1]));
      break;
    default:
      scene.parts.push_back(
          make_part("part-a", {0.09, 0.07, 0.04}, -0.055, 0.0, kPalette[0]));
      scene.parts.push_back(
          make_part("part-b", {0.14, 0.05, 0.02}, 0.08, 0.0, kPalette[1]));
      break;
  }

  const Eigen::Vector3d parent_t = scene.parts[0].pose.translation;
  switch (kind) {
    case JointKind::kRigid:
      scene.joints.push_back(make_joint(JointKind::kRigid, 0, 1, Eigen::Vector3d::UnitZ(),
                                        Eigen::Vector3d::Zero(), 0.0, 0.0));
      break;
    case JointKind::kRevolute:
      scene.joints.push_back(make_joint(JointKind::kRevolute, 0, 1, Eigen::Vector3d::UnitZ(),
                                        -parent_t, -2.5, 2.5));
      break;
    case JointKind::kPrismatic:
      scene.joints.push_back(make_joint(JointKind::kPrismatic, 0, 1, Eigen::Vector3d::UnitX(),
                                        Eigen::Vector3d::Zero(), 0.0, 0.20));
      break;
  }
  scene.finalize();
  return scene;
}

}  // namespace

std::vector<std::string> builtin_scene_names() {
  return {"single-box",      "single-plate",     "pair-rigid-0",     "pair-rigid-1",
          "pair-rigid-2",    "pair-revolute-0",  "pair-revolute-1",  "pair-revolute-2",
          "pair-prismatic-0", "pair-prismatic-1", "pair-prismatic-2", "overlap-revolute",
          "drawer-like",     "glasses-like",     "dishwasher-like",  "blade-like"};
}

KinematicScene builtin_scene(const std::string& name) {
  KinematicScene scene;

  if (name == "single-box") {
    scene.parts.push_back(make_part("box", {0.12, 0.08, 0.05}, 0.0, 0.0, kPalette[0]));
    scene.finalize();
    return scene;
  }
  if (name == "single-plate") {
    scene.parts.push_back(make_part("plate", {0.10, 0.04, 0.012}, 0.0, 0.0, kPalette[0]));
    scene.finalize();
    return scene;
  }
  for (int g = 0; g < 3; ++g) {
    const std::string suffix = "-" + std::to_string(g);
    if (name == "pair-rigid" + suffix) return make_pair(g, JointKind::kRigid);
    if (name == "pair-revolute" + suffix) return make_pair(g, JointKind::kRevolute);
    if (name == "pair-prismatic" + suffix) return make_pair(g, JointKind::kPrismatic);
  }
  if (name == "overlap-revolute") {
    scene.parts.push_back(make_part("base", {0.12, 0.07, 0.015}, 0.0, 0.0, kPalette[0]));
    scene.parts.push_back(
        make_part("top", {0.11, 0.05, 0.015}, 0.02, 0.0, kPalette[1], 0.0225));
    // Hinge peg inside the overlap region.
    const Eigen::Vector3d pivot_body =
        Eigen::Vector3d(0.04, 0.0, 0.0) - scene.parts[0].pose.translation;
    scene.joints.push_back(
        make_joint(JointKind::kRevolute, 0, 1, Eigen::Vector3d::UnitZ(), pivot_body, -2.0, 2.0));
    scene.finalize();
    return scene;
  }
  if (name == "drawer-like") {
    scene.parts.push_back(
        make_part("case", {0.20, 0.12, 0.08}, 0.0, 0.0, kPalette[0], -1.0, /*skip +x*/ 0));
    scene.parts.push_back(make_part("slider", {0.18, 0.10, 0.05}, 0.06, 0.0, kPalette[1]));
    scene.joints.push_back(make_joint(JointKind::kPrismatic, 0, 1, Eigen::Vector3d::UnitX(),
                                      Eigen::Vector3d::Zero(), 0.0, 0.15));
    scene.finalize();
    return scene;
  }
  if (name == "glasses-like") {
    scene.parts.push_back(make_part("frame", {0.04, 0.14, 0.01}, 0.0, 0.0, kPalette[0]));
    scene.parts.push_back(make_part("temple-a", {0.12, 0.03, 0.01}, 0.08, 0.055, kPalette[1]));
    scene.parts.push_back(make_part("temple-b", {0.12, 0.03, 0.01}, 0.08, -0.055, kPalette[2]));
    const Eigen::Vector3d frame_t = scene.parts[0].pose.translation;
    scene.joints.push_back(make_joint(JointKind::kRevolute, 0, 1, Eigen::Vector3d::UnitZ(),
                                      Eigen::Vector3d(0.02, 0.055, 0.0) - frame_t, 0.0, 1.2));
    scene.joints.push_back(make_joint(JointKind::kRevolute, 0, 2, Eigen::Vector3d::UnitZ(),
                                      Eigen::Vector3d(0.02, -0.055, 0.0) - frame_t, -1.2, 0.0));
    scene.finalize();
    return scene;
  }
  if (name == "dishwasher-like") {
    scene.parts.push_back(make_part("body", {0.16, 0.12, 0.10}, 0.0, -0.02, kPalette[0]));
    scene.parts.push_back(
        make_part("door", {0.14, 0.015, 0.09}, 0.0, 0.0475, kPalette[1], 0.045));
    const Eigen::Vector3d pivot_body =
        Eigen::Vector3d(0.0, 0.0475, 0.005) - scene.parts[0].pose.translation;
    // Negative-x axis so positive values tip the door outward.
    scene.joints.push_back(make_joint(JointKind::kRevolute, 0, 1,
                                      -Eigen::Vector3d::UnitX(), pivot_body, 0.0, 1.4));
    scene.finalize();
    return scene;
  }
  if (name == "blade-like") {
    scene.parts.push_back(make_part("handle", {0.10, 0.035, 0.02}, -0.03, 0.0, kPalette[0]));
    scene.parts.push_back(
        make_part("blade", {0.12, 0.025, 0.008}, 0.06, 0.0, kPalette[1], 0.01));
    scene.joints.push_back(make_joint(JointKind::kPrismatic, 0, 1, Eigen::Vector3d::UnitX(),
                                      Eigen::Vector3d::Zero(), 0.0, 0.10));
    scene.finalize();
    return scene;
  }
  throw UnknownScene(name);
}

namespace {

Eigen::Vector3d parse_vec3(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 3)
    throw ConfigError("expected a 3-element array", path);
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

Pose parse_pose(const json& j, const std::string& path) {
  Pose pose;
  if (j.contains("t")) pose.translation = parse_vec3(j["t"], path + ".t");
  if (j.contains("q")) {
    const auto& q = j["q"];
    if (!q.is_array() || q.size() != 4)
      throw ConfigError("expected quaternion [w,x,y,z]", path + ".q");
    Eigen::Quaterniond quat(q[0].get<double>(), q[1].get<double>(), q[2].get<double>(),
                            q[3].get<double>());
    if (quat.norm() < 1e-9) throw ConfigError("zero quaternion", path + ".q");
    pose.rotation = quat.normalized().toRotationMatrix();
  }
  return pose;
}

}  // namespace

namespace {

CameraModel camera_from_json(const json& j) {
  CameraModel cam;
  const std::string kind = j.value("kind", "top_down");
  if (kind == "top_down") {
    cam = CameraModel::top_down(j.value("height", 1.2));
  } else if (kind == "angled_45") {
    cam = CameraModel::angled_45(j.value("distance", 1.2));
  } else if (kind == "pose") {
    if (!j.contains("pose")) throw ConfigError("missing field", "camera.pose");
    cam.pose = parse_pose(j["pose"], "camera.pose");
  } else {
    throw ConfigError("unknown camera kind '" + kind + "'", "camera.kind");
  }
  cam.grid_resolution = j.value("grid_resolution", 160);
  cam.noise_sigma = j.value("noise_sigma", 0.0);
  cam.dropout_prob = j.value("dropout_prob", 0.0);
  if (cam.noise_sigma < 0.0) throw ConfigError("noise_sigma must be >= 0", "camera.noise_sigma");
  if (cam.dropout_prob < 0.0 || cam.dropout_prob >= 1.0)
    throw ConfigError("dropout_prob must be in [0,1)", "camera.dropout_prob");
  cam.seed = j.value("seed", 0ULL);
  return cam;
}

}  // namespace

KinematicScene scene_from_config(const std::string& json_text) {
  return scene_from_config(json_text, "");
}

KinematicScene scene_from_config(const std::string& json_text, const std::string& base_dir) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("invalid JSON: ") + e.what(), "<root>");
  }

  KinematicScene scene;
  if (root.contains("builtin")) {
    scene = builtin_scene(root["builtin"].get<std::string>());
  } else {
    if (!root.contains("parts") || !root["parts"].is_array() || root["parts"].empty())
      throw ConfigError("missing or empty field", "parts");

    int part_idx = 0;
    for (const auto& pj : root["parts"]) {
      const std::string path = "parts[" + std::to_string(part_idx) + "]";
      Part part;
      part.name = pj.value("name", "part-" + std::to_string(part_idx));
      const Eigen::Vector3d color = pj.contains("color")
                                        ? parse_vec3(pj["color"], path + ".color")
                                        : kPalette[part_idx % 4];
      if (pj.contains("primitive")) {
        const auto& prim = pj["primitive"];
        const std::string kind = prim.value("kind", "box");
        if (kind != "box" && kind != "plate")
          throw ConfigError("unknown primitive kind '" + kind + "'", path + ".primitive.kind");
        if (!prim.contains("dims"))
          throw ConfigError("missing field", path + ".primitive.dims");
        const Eigen::Vector3d dims = parse_vec3(prim["dims"], path + ".primitive.dims");
        part.cloud = sample_box_open(dims, prim.value("spacing", kSpacing), color,
                                     prim.value("skip_face", -1));
      } else if (pj.contains("ply_path")) {
        std::filesystem::path p = pj["ply_path"].get<std::string>();
        if (p.is_relative() && !base_dir.empty()) p = std::filesystem::path(base_dir) / p;
        part.cloud = load_ply(p.string());
        if (!part.cloud.has_colors())
          part.cloud.colors.assign(part.cloud.size(), color);
      } else {
        throw ConfigError("part needs 'primitive' or 'ply_path'", path);
      }
      if (pj.contains("pose")) part.pose = parse_pose(pj["pose"], path + ".pose");
      if (pj.contains("com_offset"))
        part.com_offset = parse_vec3(pj["com_offset"], path + ".com_offset");
      scene.parts.push_back(std::move(part));
      ++part_idx;
    }

    int joint_idx = 0;
    for (const auto& jj : root.value("joints", json::array())) {
      const std::string path = "joints[" + std::to_string(joint_idx) + "]";
      JointDef joint;
      const std::string kind = jj.value("kind", "");
      if (kind == "rigid") joint.kind = JointKind::kRigid;
      else if (kind == "revolute") joint.kind = JointKind::kRevolute;
      else if (kind == "prismatic") joint.kind = JointKind::kPrismatic;
      else throw ConfigError("joint kind must be rigid|revolute|prismatic", path + ".kind");

      if (!jj.contains("parent")) throw ConfigError("missing field", path + ".parent");
      if (!jj.contains("child")) throw ConfigError("missing field", path + ".child");
      joint.parent = jj["parent"].get<int>();
      joint.child = jj["child"].get<int>();
      const int n = static_cast<int>(scene.parts.size());
      if (joint.parent < 0 || joint.parent >= n)
        throw ConfigError("part index out of range", path + ".parent");
      if (joint.child < 0 || joint.child >= n || joint.child == joint.parent)
        throw ConfigError("part index out of range", path + ".child");

      if (joint.kind != JointKind::kRigid) {
        if (!jj.contains("axis")) throw ConfigError("missing field", path + ".axis");
        joint.axis = parse_vec3(jj["axis"], path + ".axis");
        const double norm = joint.axis.norm();
        if (norm < 1e-9) throw ConfigError("axis must be non-zero", path + ".axis");
        joint.axis /= norm;
        if (jj.contains("limits")) {
          const auto& lim = jj["limits"];
          if (!lim.is_array() || lim.size() != 2)
            throw ConfigError("expected [lo, hi]", path + ".limits");
          joint.limits[0] = lim[0].get<double>();
          joint.limits[1] = lim[1].get<double>();
          if (joint.limits[0] > joint.limits[1])
            throw ConfigError("lo must not exceed hi", path + ".limits");
        }
        joint.value = jj.value("value", 0.0);
        if (joint.value < joint.limits[0] || joint.value > joint.limits[1])
          throw ConfigError("value outside limits", path + ".value");
      }
      if (jj.contains("pivot")) joint.pivot = parse_vec3(jj["pivot"], path + ".pivot");
      scene.joints.push_back(joint);
      ++joint_idx;
    }
  }

  scene.with_table = root.value("with_table", true);
  scene.kappa_com = root.value("kappa_com", 2.0);
  scene.finalize();
  return scene;
}

SceneFile load_scene_file(const std::string& json_text, const std::string& base_dir) {
  SceneFile file;
  file.scene = scene_from_config(json_text, base_dir);

  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("invalid JSON: ") + e.what(), "<root>");
  }
  if (root.contains("camera")) file.camera = camera_from_json(root["camera"]);
  file.seed = root.value("seed", 0ULL);
  return file;
}

}  // namespace artreg

