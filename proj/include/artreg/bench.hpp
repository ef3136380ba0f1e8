#pragma once

#include <map>
#include <string>
#include <vector>

#include "artreg/pipeline.hpp"

namespace artreg {

// Average distance of model points with indistinguishable views: mean over
// gt-transformed model points of the distance to the closest est-transformed
// model point.
double adi(const PointCloud& model, const Pose& gt, const Pose& est);

// Per-part planar L2 error between final and target positions.
std::vector<double> goal_l2(const std::vector<Eigen::Vector2d>& final_xy,
                            const std::vector<Eigen::Vector2d>& target_xy);

struct BenchTrial {
  std::string object;
  int trial = 0;
  std::vector<double> joint_values;
  std::vector<double> part_adi;  // m, per link
  double runtime_s = 0.0;
  bool failed = false;
};

struct BenchAggregate {
  double mean = 0.0;
  double median = 0.0;
  double stddev = 0.0;
};

BenchAggregate aggregate(const std::vector<double>& values);

struct BenchReport {
  std::vector<BenchTrial> trials;
  BenchAggregate overall;
  std::map<std::string, BenchAggregate> per_object;

  std::vector<double> all_part_errors() const;
};

struct BenchOptions {
  std::vector<std::string> objects = {"drawer-like", "glasses-like", "dishwasher-like",
                                      "blade-like"};
  int trials_per_object = 10;
  double init_perturb_trans = 0.03;               // m
  double init_perturb_rot = 10.0 * kPi / 180.0;   // rad
  int max_iterations = 50;
  double camera_noise_sigma = 0.0;
  double camera_dropout = 0.0;
  std::uint64_t seed = 1;
};

// Joint-sampled pose benchmark: each trial draws joint values uniformly in
// their range, renders the object from a 45 degree view, starts each link
// filter at a perturbed pose and tracks to convergence, then scores ADI per
// link. Trials that raise errors are marked failed instead of aborting.
BenchReport run_benchmark(const BenchOptions& options);

}  // namespace artreg
