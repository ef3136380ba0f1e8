#pragma once

#include <optional>
#include <vector>

#include "artreg/cloud.hpp"

namespace artreg {

// Plane ax + by + cz + d = 0 with unit normal (a,b,c).
struct PlaneModel {
  Eigen::Vector3d normal = Eigen::Vector3d::UnitZ();
  double d = 0.0;

  double distance(const Eigen::Vector3d& p) const { return std::abs(normal.dot(p) + d); }
};

// Disjoint per-part clouds plus a label for every input point
// (segment index, or kDiscarded).
struct SegmentSet {
  static constexpr int kDiscarded = -1;

  std::vector<PointCloud> segments;
  std::vector<int> labels;
};

struct SegmentationConfig {
  double plane_dist_thresh = 0.005;       // m
  int ransac_iterations = 200;
  int outlier_k_neighbors = 16;
  double outlier_std_ratio = 1.5;
  double normal_angle_thresh = 8.0 * kPi / 180.0;
  double color_thresh = 0.15;             // Euclidean in RGB
  double neighbor_radius = 0.015;         // m
  int min_segment_size = 30;
  double tool_margin = 0.01;              // m
  std::uint64_t seed = 0;
};

std::pair<PlaneModel, std::vector<bool>> ransac_plane(const PointCloud& cloud,
                                                      double dist_thresh, int iterations,
                                                      std::uint64_t seed);

PointCloud remove_outliers(const PointCloud& cloud, int k_neighbors, double std_ratio);

PointCloud cull_tool_points(const PointCloud& cloud, const OrientedBox& tool_box,
                            double margin);

// Region growing over a radius graph. A point joins a region when its normal
// stays within normal_angle_thresh of the region seed's normal and (when
// colors are present) its color stays within color_thresh of the seed's.
// Adjacent regions whose mean colors differ by less than color_thresh are
// merged afterwards; regions below min_segment_size are discarded.
// Seeds are taken in ascending order of local surface curvature. Normals are
// estimated by local PCA when the cloud has none.
SegmentSet region_grow(const PointCloud& cloud, double normal_angle_thresh,
                       double color_thresh, double neighbor_radius, int min_segment_size);

// Plane removal, optional tool culling, statistical outlier removal, region
// growing. Labels map back to the raw input cloud.
SegmentSet segment_scene(const PointCloud& cloud, const SegmentationConfig& config,
                         const std::optional<OrientedBox>& tool_box = std::nullopt);

// Local-PCA normals (k nearest neighbors), oriented so the largest-magnitude
// component of each normal is positive.
std::vector<Eigen::Vector3d> estimate_normals(const PointCloud& cloud, int k_neighbors);

}  // namespace artreg
