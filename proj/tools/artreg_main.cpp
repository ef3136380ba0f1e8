#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "artreg/bench.hpp"
#include "artreg/config.hpp"
#include "artreg/controller.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace artreg;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open file", path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  if (const fs::path parent = fs::path(path).parent_path(); !parent.empty())
    fs::create_directories(parent);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write file: " + path);
  out << content;
}

struct GlobalArgs {
  std::string config_path;
  std::string out_path;
  std::uint64_t seed = 0;
  bool seed_set = false;
  bool verbose = false;
};

RunConfig resolve_config(const GlobalArgs& args) {
  RunConfig cfg = args.config_path.empty() ? default_run_config()
                                           : load_run_config(read_file(args.config_path));
  if (args.seed_set) {
    cfg.has_seed = true;
    cfg.seed = args.seed;
    cfg.pipeline.seed = args.seed;
  }
  if (!cfg.has_seed)
    throw ConfigError("a seed is required (--seed or config \"seed\")", "seed");
  return cfg;
}

bool is_builtin(const std::string& name) {
  for (const auto& n : builtin_scene_names())
    if (n == name) return true;
  return false;
}

struct LoadedScene {
  KinematicScene scene;
  CameraModel camera;
};

LoadedScene load_scene(const std::string& scene_arg, const RunConfig& cfg) {
  LoadedScene out;
  if (is_builtin(scene_arg)) {
    out.scene = builtin_scene(scene_arg);
    out.camera = CameraModel::top_down();
    out.camera.noise_sigma = cfg.sim_noise_sigma;
    out.camera.dropout_prob = cfg.sim_dropout;
    out.camera.grid_resolution = cfg.grid_resolution;
    out.scene.kappa_com = cfg.kappa_com;
    return out;
  }
  if (!fs::exists(scene_arg))
    throw ConfigError("scene is neither a builtin name nor an existing file", scene_arg);
  const SceneFile file =
      load_scene_file(read_file(scene_arg), fs::path(scene_arg).parent_path().string());
  out.scene = file.scene;
  out.camera = file.camera;
  return out;
}

json run_result_to_json(const std::string& scene_name, const TrackRunResult& result,
                        std::uint64_t seed) {
  json frames = json::array();
  for (std::size_t f = 0; f < result.estimates.size(); ++f) {
    json objects = json::array();
    for (const auto& pose : result.estimates[f]) objects.push_back(pose_to_json(pose));
    frames.push_back(json{{"frame", f}, {"objects", objects}});
  }
  json out{{"scene", scene_name}, {"seed", seed}, {"frames", frames}};
  if (!result.errors.empty())
    out["summary"] = json{{"mean_error", result.mean_error}};
  return out;
}

int cmd_track(const GlobalArgs& g, const std::string& scene_arg,
              const std::string& frames_dir, const std::vector<std::string>& object_plys,
              int frames, const std::string& motion) {
  const RunConfig cfg = resolve_config(g);
  if (g.out_path.empty()) throw ConfigError("--out is required", "out");

  for (const auto& ply : object_plys)
    if (!fs::exists(ply)) {
      std::cerr << "error: object PLY not found: " << ply << "\n";
      return 2;
    }

  if (!frames_dir.empty()) {
    // Pre-recorded frame mode: one PLY per frame, models given explicitly.
    std::vector<fs::path> frame_files;
    for (const auto& entry : fs::directory_iterator(frames_dir))
      if (entry.path().extension() == ".ply") frame_files.push_back(entry.path());
    std::sort(frame_files.begin(), frame_files.end());
    if (frame_files.empty()) throw ConfigError("no .ply frames in directory", frames_dir);
    if (object_plys.empty())
      throw ConfigError("--objects is required with --frames-dir", "objects");

    std::vector<TrackState> states(object_plys.size());
    std::vector<std::unique_ptr<MeasurementModel>> models;
    for (std::size_t i = 0; i < object_plys.size(); ++i) {
      models.push_back(std::make_unique<MeasurementModel>(
          load_ply(object_plys[i]), cfg.pipeline.observation_cap,
          Rng(cfg.seed).fork(i).next_u64()));
      states[i].cov = cfg.pipeline.q_diag.asDiagonal();
      states[i].process_noise = cfg.pipeline.q_diag.asDiagonal();
      states[i].r_scalar = cfg.pipeline.r_scalar;
    }

    json frames_json = json::array();
    SegmentationConfig seg = cfg.pipeline.segmentation;
    seg.seed = cfg.seed;
    for (std::size_t f = 0; f < frame_files.size(); ++f) {
      const PointCloud cloud = load_ply(frame_files[f].string());
      const SegmentSet segments = segment_scene(cloud, seg);
      json objects = json::array();
      for (std::size_t i = 0; i < models.size(); ++i) {
        for (int it = 0; it < cfg.pipeline.iterations_per_frame; ++it) {
          const auto step = track_step(states[i], segments, *models[i], std::nullopt,
                                       cfg.pipeline.ukf, cfg.pipeline.association_gate);
          states[i] = step.state;
          if (!step.associated) break;
        }
        objects.push_back(pose_to_json(states[i].mean));
      }
      frames_json.push_back(json{{"frame", f}, {"objects", objects}});
    }
    const json out{{"frames", frames_json}, {"seed", cfg.seed}};
    write_file(g.out_path, out.dump(1) + "\n");
    return 0;
  }

  LoadedScene loaded = load_scene(scene_arg, cfg);
  TrackedWorld world(loaded.scene, loaded.camera, cfg.pipeline);
  world.initialize();

  TrackRunOptions options;
  options.frames = frames;
  options.seed = Rng(cfg.seed).fork(0x7124).next_u64();
  if (motion == "static") options.motion = TrackRunOptions::Motion::kStatic;
  else if (motion == "random-walk") options.motion = TrackRunOptions::Motion::kRandomWalk;
  else throw ConfigError("motion must be static|random-walk", "motion");

  const TrackRunResult result = run_tracking(world, options);
  write_file(g.out_path, run_result_to_json(scene_arg, result, cfg.seed).dump(1) + "\n");
  if (g.verbose) std::cerr << "mean tracking error: " << result.mean_error << " m\n";
  return 0;
}

int cmd_detect(const GlobalArgs& g, const std::string& scene_arg) {
  const RunConfig cfg = resolve_config(g);
  if (g.out_path.empty()) throw ConfigError("--out is required", "out");

  LoadedScene loaded = load_scene(scene_arg, cfg);
  TrackedWorld world(loaded.scene, loaded.camera, cfg.pipeline);
  world.initialize();

  json report;
  int exit_code = 0;
  try {
    const DetectionResult result = detect(world, cfg.max_actions, cfg.detection);
    report = detection_report_to_json(result);
    report["exhausted"] = false;
  } catch (const BudgetExhausted& e) {
    DetectionResult partial{e.belief.hypothesis, e.belief};
    report = detection_report_to_json(partial);
    report["exhausted"] = true;
    exit_code = 1;
  }
  write_file(g.out_path, report.dump(1) + "\n");
  if (g.verbose) std::cerr << "hypothesis: " << report["hypothesis"] << "\n";
  return exit_code;
}

int cmd_push(const GlobalArgs& g, const std::string& scene_arg, const std::string& goal_path) {
  const RunConfig cfg = resolve_config(g);
  if (g.out_path.empty()) throw ConfigError("--out is required", "out");

  json goal_json;
  try {
    goal_json = json::parse(read_file(goal_path));
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("invalid JSON: ") + e.what(), goal_path);
  }
  GoalSpec goal;
  goal.tolerance = goal_json.value("tolerance", cfg.goal_tolerance);
  if (!goal_json.contains("targets") || !goal_json["targets"].is_array())
    throw ConfigError("missing field", "targets");
  for (std::size_t i = 0; i < goal_json["targets"].size(); ++i)
    goal.targets.push_back(
        pose_from_json(goal_json["targets"][i], "targets[" + std::to_string(i) + "]"));
  const std::string mode = goal_json.value("mode", "push");

  LoadedScene loaded = load_scene(scene_arg, cfg);
  TrackedWorld world(loaded.scene, loaded.camera, cfg.pipeline);
  world.initialize();

  json report;
  int exit_code = 0;
  try {
    const TrajectoryReport traj = mode == "pull"
                                      ? pull_to_goal(world, goal)
                                      : push_to_goal(world, goal, cfg.max_increments);
    report = trajectory_report_to_json(traj);
  } catch (const ControlBudgetExhausted& e) {
    report = trajectory_report_to_json(e.report);
    exit_code = 1;
  }
  write_file(g.out_path, report.dump(1) + "\n");
  return exit_code;
}

int cmd_bench(const GlobalArgs& g, const std::vector<std::string>& objects, int trials,
              const std::string& csv_path, bool timings) {
  const RunConfig cfg = resolve_config(g);
  if (g.out_path.empty()) throw ConfigError("--out is required", "out");

  BenchOptions options;
  if (!objects.empty()) options.objects = objects;
  options.trials_per_object = trials;
  options.camera_noise_sigma = cfg.sim_noise_sigma;
  options.camera_dropout = cfg.sim_dropout;
  options.seed = cfg.seed;

  const BenchReport report = run_benchmark(options);

  json trials_json = json::array();
  for (const auto& t : report.trials) {
    json row{{"object", t.object},
             {"trial", t.trial},
             {"joint_values", t.joint_values},
             {"part_adi", t.part_adi},
             {"failed", t.failed}};
    if (timings) row["runtime_s"] = t.runtime_s;
    trials_json.push_back(row);
  }
  json per_object = json::object();
  for (const auto& [name, agg] : report.per_object)
    per_object[name] = json{{"mean", agg.mean}, {"median", agg.median}, {"std", agg.stddev}};
  const json out{{"seed", cfg.seed},
                 {"trials", trials_json},
                 {"aggregates",
                  {{"overall",
                    {{"mean", report.overall.mean},
                     {"median", report.overall.median},
                     {"std", report.overall.stddev}}},
                   {"per_object", per_object}}}};
  write_file(g.out_path, out.dump(1) + "\n");

  if (!csv_path.empty()) {
    std::ostringstream csv;
    csv << "object,trial,part,adi_m\n";
    char buf[64];
    for (const auto& t : report.trials)
      for (std::size_t p = 0; p < t.part_adi.size(); ++p) {
        std::snprintf(buf, sizeof(buf), "%.17g", t.part_adi[p]);
        csv << t.object << "," << t.trial << "," << p << "," << buf << "\n";
      }
    write_file(csv_path, csv.str());
  }
  if (g.verbose)
    std::cerr << "overall ADI mean " << report.overall.mean << " m, median "
              << report.overall.median << " m\n";
  return 0;
}

int cmd_simgen(const GlobalArgs& g, const std::string& name) {
  const RunConfig cfg = resolve_config(g);
  if (g.out_path.empty()) throw ConfigError("--out is required", "out");

  const KinematicScene scene = builtin_scene(name);
  fs::create_directories(g.out_path);

  json parts = json::array();
  for (const auto& part : scene.parts) {
    const std::string ply_name = part.name + ".ply";
    save_ply((fs::path(g.out_path) / ply_name).string(), part.cloud);
    parts.push_back(json{{"name", part.name},
                         {"ply_path", ply_name},
                         {"pose", pose_to_json(part.pose)},
                         {"com_offset",
                          {part.com_offset.x(), part.com_offset.y(), part.com_offset.z()}}});
  }
  json joints = json::array();
  for (const auto& j : scene.joints) {
    const char* kind = j.kind == JointKind::kRigid
                           ? "rigid"
                           : (j.kind == JointKind::kRevolute ? "revolute" : "prismatic");
    joints.push_back(json{{"kind", kind},
                          {"parent", j.parent},
                          {"child", j.child},
                          {"axis", {j.axis.x(), j.axis.y(), j.axis.z()}},
                          {"pivot", {j.pivot.x(), j.pivot.y(), j.pivot.z()}},
                          {"limits", {j.limits[0], j.limits[1]}},
                          {"value", j.value}});
  }
  const json scene_json{{"parts", parts},
                        {"joints", joints},
                        {"camera",
                         {{"kind", "top_down"},
                          {"noise_sigma", cfg.sim_noise_sigma},
                          {"dropout_prob", cfg.sim_dropout},
                          {"grid_resolution", cfg.grid_resolution}}},
                        {"kappa_com", cfg.kappa_com},
                        {"seed", cfg.seed}};
  write_file((fs::path(g.out_path) / "scene.json").string(), scene_json.dump(1) + "\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ArtReg: SE(3) manifold-UKF pose tracking, articulation detection, and "
               "goal-driven manipulation against a built-in scene simulator"};
  app.require_subcommand(1);

  GlobalArgs g;
  app.add_option("--seed", g.seed, "Run seed (required here or in the config)")
      ->each([&](const std::string&) { g.seed_set = true; });
  app.add_option("--config", g.config_path, "JSON run config");
  app.add_option("--out", g.out_path, "Output path (directory for simgen)");
  app.add_flag("--verbose", g.verbose, "Chatty progress on stderr");

  auto* track = app.add_subcommand("track", "Track objects through a simulated sequence");
  std::string track_scene = "single-box", frames_dir, motion = "random-walk";
  std::vector<std::string> object_plys;
  int frames = 50;
  track->add_option("--scene", track_scene, "Builtin scene name or scene JSON path");
  track->add_option("--frames-dir", frames_dir, "Directory of per-frame PLY clouds");
  track->add_option("--objects", object_plys, "Object model PLYs (frame-dir mode)");
  track->add_option("--frames", frames, "Number of simulated frames");
  track->add_option("--motion", motion, "static | random-walk");

  auto* detect_cmd = app.add_subcommand("detect", "Interactive articulation detection");
  std::string detect_scene = "pair-revolute-0";
  detect_cmd->add_option("--scene", detect_scene, "Builtin scene name or scene JSON path");

  auto* push = app.add_subcommand("push", "Goal-driven manipulation to target poses");
  std::string push_scene = "single-box", goal_path;
  push->add_option("--scene", push_scene, "Builtin scene name or scene JSON path");
  push->add_option("--goal", goal_path, "Goal JSON (targets, tolerance, mode)")->required();

  auto* bench = app.add_subcommand("bench", "ADI benchmark over articulated objects");
  std::vector<std::string> bench_objects;
  std::string csv_path;
  int trials = 10;
  bool timings = false;
  bench->add_option("--objects", bench_objects, "Builtin object names");
  bench->add_option("--trials", trials, "Trials per object");
  bench->add_option("--csv", csv_path, "Also write per-part rows as CSV");
  bench->add_flag("--timings", timings, "Include wall-clock runtimes in the report");

  auto* simgen = app.add_subcommand("simgen", "Write a builtin scene as PLYs + scene.json");
  std::string simgen_name = "drawer-like";
  simgen->add_option("--name", simgen_name, "Builtin scene name");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*track) return cmd_track(g, track_scene, frames_dir, object_plys, frames, motion);
    if (*detect_cmd) return cmd_detect(g, detect_scene);
    if (*push) return cmd_push(g, push_scene, goal_path);
    if (*bench) return cmd_bench(g, bench_objects, trials, csv_path, timings);
    if (*simgen) return cmd_simgen(g, simgen_name);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
