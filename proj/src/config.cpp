#include "artreg/config.hpp"

#include <set>

namespace artreg {

using nlohmann::json;

namespace {

void reject_unknown(const json& j, const std::set<std::string>& known,
                    const std::string& prefix) {
  for (const auto& [key, value] : j.items())
    if (!known.count(key)) throw ConfigError("unknown config key", prefix + key);
}

}  // namespace

RunConfig default_run_config() { return RunConfig{}; }

RunConfig load_run_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("invalid JSON: ") + e.what(), "<root>");
  }

  RunConfig cfg;
  reject_unknown(root, {"seed", "segmentation", "ukf", "sim", "controller", "detection"},
                 "");

  if (root.contains("seed")) {
    cfg.has_seed = true;
    cfg.seed = root["seed"].get<std::uint64_t>();
    cfg.pipeline.seed = cfg.seed;
  }

  if (root.contains("segmentation")) {
    const auto& s = root["segmentation"];
    reject_unknown(s,
                   {"plane_dist_thresh", "ransac_iterations", "k_neighbors", "std_ratio",
                    "normal_angle_deg", "color_thresh", "neighbor_radius",
                    "min_segment_size", "tool_margin"},
                   "segmentation.");
    auto& seg = cfg.pipeline.segmentation;
    seg.plane_dist_thresh = s.value("plane_dist_thresh", seg.plane_dist_thresh);
    seg.ransac_iterations = s.value("ransac_iterations", seg.ransac_iterations);
    seg.outlier_k_neighbors = s.value("k_neighbors", seg.outlier_k_neighbors);
    seg.outlier_std_ratio = s.value("std_ratio", seg.outlier_std_ratio);
    if (s.contains("normal_angle_deg"))
      seg.normal_angle_thresh = s["normal_angle_deg"].get<double>() * kPi / 180.0;
    seg.color_thresh = s.value("color_thresh", seg.color_thresh);
    seg.neighbor_radius = s.value("neighbor_radius", seg.neighbor_radius);
    seg.min_segment_size = s.value("min_segment_size", seg.min_segment_size);
    seg.tool_margin = s.value("tool_margin", seg.tool_margin);
  }

  if (root.contains("ukf")) {
    const auto& u = root["ukf"];
    reject_unknown(u,
                   {"alpha", "beta", "kappa", "q_diag", "r_scalar", "observation_cap",
                    "association_gate", "iterations_per_frame"},
                   "ukf.");
    cfg.pipeline.ukf.alpha = u.value("alpha", cfg.pipeline.ukf.alpha);
    cfg.pipeline.ukf.beta = u.value("beta", cfg.pipeline.ukf.beta);
    cfg.pipeline.ukf.kappa = u.value("kappa", cfg.pipeline.ukf.kappa);
    if (u.contains("q_diag")) {
      const auto& q = u["q_diag"];
      if (!q.is_array() || q.size() != 6)
        throw ConfigError("expected 6 diagonal entries", "ukf.q_diag");
      for (int i = 0; i < 6; ++i) {
        cfg.pipeline.q_diag[i] = q[i].get<double>();
        if (cfg.pipeline.q_diag[i] < 0.0)
          throw ConfigError("process noise must be non-negative", "ukf.q_diag");
      }
    }
    cfg.pipeline.r_scalar = u.value("r_scalar", cfg.pipeline.r_scalar);
    if (cfg.pipeline.r_scalar <= 0.0)
      throw ConfigError("r_scalar must be positive", "ukf.r_scalar");
    cfg.pipeline.observation_cap = u.value("observation_cap", cfg.pipeline.observation_cap);
    cfg.pipeline.association_gate = u.value("association_gate", cfg.pipeline.association_gate);
    cfg.pipeline.iterations_per_frame =
        u.value("iterations_per_frame", cfg.pipeline.iterations_per_frame);
  }

  if (root.contains("sim")) {
    const auto& s = root["sim"];
    reject_unknown(s, {"noise_sigma", "dropout", "kappa_com", "grid_resolution", "substep"},
                   "sim.");
    cfg.sim_noise_sigma = s.value("noise_sigma", cfg.sim_noise_sigma);
    cfg.sim_dropout = s.value("dropout", cfg.sim_dropout);
    cfg.kappa_com = s.value("kappa_com", cfg.kappa_com);
    cfg.grid_resolution = s.value("grid_resolution", cfg.grid_resolution);
    cfg.pipeline.action_substep = s.value("substep", cfg.pipeline.action_substep);
  }

  if (root.contains("controller")) {
    const auto& c = root["controller"];
    reject_unknown(c, {"kp", "ki", "kd", "saturation", "tolerance", "max_increments"},
                   "controller.");
    cfg.pid.k_p = c.value("kp", cfg.pid.k_p);
    cfg.pid.k_i = c.value("ki", cfg.pid.k_i);
    cfg.pid.k_d = c.value("kd", cfg.pid.k_d);
    cfg.pid.saturation = c.value("saturation", cfg.pid.saturation);
    cfg.goal_tolerance = c.value("tolerance", cfg.goal_tolerance);
    if (cfg.goal_tolerance <= 0.0)
      throw ConfigError("tolerance must be positive", "controller.tolerance");
    cfg.max_increments = c.value("max_increments", cfg.max_increments);
  }

  if (root.contains("detection")) {
    const auto& d = root["detection"];
    reject_unknown(d, {"trans_thresh", "rot_thresh_deg", "zeta", "max_actions"},
                   "detection.");
    cfg.detection.trans = d.value("trans_thresh", cfg.detection.trans);
    if (d.contains("rot_thresh_deg"))
      cfg.detection.rot = d["rot_thresh_deg"].get<double>() * kPi / 180.0;
    cfg.detection.zeta = d.value("zeta", cfg.detection.zeta);
    cfg.max_actions = d.value("max_actions", cfg.max_actions);
  }

  return cfg;
}

json pose_to_json(const Pose& p) {
  Eigen::Quaterniond q(p.rotation);
  q.normalize();
  if (q.w() < 0.0) q.coeffs() = -q.coeffs();
  return json{{"t", {p.translation.x(), p.translation.y(), p.translation.z()}},
              {"q", {q.w(), q.x(), q.y(), q.z()}}};
}

Pose pose_from_json(const json& j, const std::string& path) {
  if (!j.contains("t") || !j.contains("q"))
    throw ConfigError("pose needs 't' and 'q'", path);
  const auto& t = j["t"];
  const auto& q = j["q"];
  if (!t.is_array() || t.size() != 3) throw ConfigError("expected [x,y,z]", path + ".t");
  if (!q.is_array() || q.size() != 4)
    throw ConfigError("expected [w,x,y,z]", path + ".q");
  Eigen::Quaterniond quat(q[0].get<double>(), q[1].get<double>(), q[2].get<double>(),
                          q[3].get<double>());
  if (quat.norm() < 1e-9) throw ConfigError("zero quaternion", path + ".q");
  return Pose(quat.normalized().toRotationMatrix(),
              Eigen::Vector3d(t[0].get<double>(), t[1].get<double>(), t[2].get<double>()));
}

json trajectory_report_to_json(const TrajectoryReport& report) {
  json iterations = json::array();
  for (const auto& it : report.iterations) {
    json estimates = json::array();
    for (const auto& p : it.estimates) estimates.push_back(pose_to_json(p));
    iterations.push_back(json{{"iteration", it.iteration},
                              {"part", it.part},
                              {"theta", it.theta},
                              {"c", it.correction},
                              {"contact", it.contact},
                              {"distances", it.distances},
                              {"estimates", estimates}});
  }
  return json{{"iterations", iterations},
              {"final_errors", report.final_errors},
              {"success", report.success},
              {"increments", report.increments}};
}

json detection_report_to_json(const DetectionResult& result) {
  json actions = json::array();
  for (const auto& rec : result.belief.action_log) {
    json deltas = json::array();
    for (const auto& d : rec.deltas)
      deltas.push_back(json{{"before", pose_to_json(d.before)},
                            {"after", pose_to_json(d.after)}});
    actions.push_back(
        json{{"kind", rec.action.kind == ActionKind::kPush ? "push" : "hold_pull"},
             {"part", rec.action.target_part},
             {"p", {rec.action.position.x(), rec.action.position.y(), rec.action.position.z()}},
             {"d", {rec.action.direction.x(), rec.action.direction.y(),
                    rec.action.direction.z()}},
             {"distance", rec.action.distance},
             {"deltas", deltas},
             {"verdict", to_string(rec.verdict)},
             {"hypothesis_after", to_string(rec.hypothesis_after)}});
  }
  return json{{"actions", actions},
              {"hypothesis", to_string(result.hypothesis)},
              {"consecutive_consistent", result.belief.consecutive_consistent},
              {"evidence",
               {{"revolute", result.belief.revolute_evidence},
                {"prismatic", result.belief.prismatic_evidence},
                {"rigid", result.belief.rigid_evidence},
                {"ambiguous", result.belief.ambiguous_count}}}};
}

}  // namespace artreg
