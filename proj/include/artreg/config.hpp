#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "artreg/articulation.hpp"
#include "artreg/controller.hpp"
#include "artreg/pipeline.hpp"

namespace artreg {

// One JSON config for every knob; unknown keys are rejected so typos fail
// loudly. All values have documented defaults except the seed, which must
// come from the config or the --seed flag.
struct RunConfig {
  bool has_seed = false;
  std::uint64_t seed = 0;

  PipelineConfig pipeline;

  double sim_noise_sigma = 0.0;
  double sim_dropout = 0.0;
  double kappa_com = 2.0;
  int grid_resolution = 160;

  PidState pid;
  double goal_tolerance = 0.02;
  int max_increments = 100;

  DetectionThresholds detection;
  int max_actions = 12;
};

RunConfig load_run_config(const std::string& json_text);
RunConfig default_run_config();

nlohmann::json pose_to_json(const Pose& p);
Pose pose_from_json(const nlohmann::json& j, const std::string& path);

nlohmann::json trajectory_report_to_json(const TrajectoryReport& report);
nlohmann::json detection_report_to_json(const DetectionResult& result);

}  // namespace artreg
