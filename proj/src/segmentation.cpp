#include "artreg/segmentation.hpp"

#include <algorithm>
#include <functional>
#include <numeric>

#include <Eigen/Eigenvalues>

#include "artreg/kdtree.hpp"

namespace artreg {

namespace {

std::vector<int> outlier_keep_indices(const PointCloud& cloud, int k_neighbors,
                                      double std_ratio) {
  const int n = static_cast<int>(cloud.size());
  KdTree tree(cloud.points);
  std::vector<double> mean_dist(n);
  for (int i = 0; i < n; ++i) {
    const auto nn = tree.k_nearest(cloud.points[i], k_neighbors + 1);  // includes self
    double sum = 0.0;
    int count = 0;
    for (int j : nn) {
      if (j == i) continue;
      sum += (cloud.points[j] - cloud.points[i]).norm();
      ++count;
    }
    mean_dist[i] = count > 0 ? sum / count : 0.0;
  }
  double mean = std::accumulate(mean_dist.begin(), mean_dist.end(), 0.0) / n;
  double var = 0.0;
  for (double d : mean_dist) var += (d - mean) * (d - mean);
  const double cutoff = mean + std_ratio * std::sqrt(var / n);

  std::vector<int> keep;
  keep.reserve(n);
  for (int i = 0; i < n; ++i)
    if (mean_dist[i] <= cutoff) keep.push_back(i);
  return keep;
}

}  // namespace

std::pair<PlaneModel, std::vector<bool>> ransac_plane(const PointCloud& cloud,
                                                      double dist_thresh, int iterations,
                                                      std::uint64_t seed) {
  const int n = static_cast<int>(cloud.size());
  if (n < 3) throw DegenerateCloud("ransac_plane needs at least 3 points");

  Rng rng(seed);
  PlaneModel best;
  bool found = false;
  int best_inliers = -1;
  double best_mean_dist = 0.0;

  auto evaluate = [&](const PlaneModel& plane) {
    int inliers = 0;
    double dist_sum = 0.0;
    for (const auto& p : cloud.points) {
      const double d = plane.distance(p);
      if (d <= dist_thresh) {
        ++inliers;
        dist_sum += d;
      }
    }
    const double mean = inliers > 0 ? dist_sum / inliers : 0.0;
    if (inliers > best_inliers ||
        (inliers == best_inliers && mean < best_mean_dist)) {
      best = plane;
      best_inliers = inliers;
      best_mean_dist = mean;
      found = true;
    }
  };

  for (int it = 0; it < iterations; ++it) {
    const int a = rng.uniform_int(n);
    int b = rng.uniform_int(n);
    int c = rng.uniform_int(n);
    if (a == b || a == c || b == c) continue;
    const Eigen::Vector3d u = cloud.points[b] - cloud.points[a];
    const Eigen::Vector3d v = cloud.points[c] - cloud.points[a];
    Eigen::Vector3d normal = u.cross(v);
    const double norm = normal.norm();
    if (norm < 1e-12) continue;  // collinear sample
    normal /= norm;
    int max_entry;
    normal.cwiseAbs().maxCoeff(&max_entry);
    if (normal[max_entry] < 0.0) normal = -normal;

    PlaneModel plane;
    plane.normal = normal;
    plane.d = -normal.dot(cloud.points[a]);
    evaluate(plane);
  }

  if (!found) {
    // Seeded sampling may have missed every valid triple on tiny inputs;
    // fall back to scanning triples before declaring the cloud degenerate.
    for (int a = 0; a < n && !found; ++a)
      for (int b = a + 1; b < n && !found; ++b)
        for (int c = b + 1; c < n && !found; ++c) {
          Eigen::Vector3d normal =
              (cloud.points[b] - cloud.points[a]).cross(cloud.points[c] - cloud.points[a]);
          const double norm = normal.norm();
          if (norm < 1e-12) continue;
          normal /= norm;
          int max_entry;
          normal.cwiseAbs().maxCoeff(&max_entry);
          if (normal[max_entry] < 0.0) normal = -normal;
          PlaneModel plane;
          plane.normal = normal;
          plane.d = -normal.dot(cloud.points[a]);
          evaluate(plane);
        }
    if (!found) throw DegenerateCloud("no non-collinear point triple");
  }

  std::vector<bool> inlier_mask(n, false);
  for (int i = 0; i < n; ++i)
    inlier_mask[i] = best.distance(cloud.points[i]) <= dist_thresh;
  return {best, inlier_mask};
}

PointCloud remove_outliers(const PointCloud& cloud, int k_neighbors, double std_ratio) {
  const int n = static_cast<int>(cloud.size());
  if (n == 0) throw EmptyCloud("remove_outliers on empty cloud");
  if (n <= k_neighbors) return cloud;
  return cloud.select(outlier_keep_indices(cloud, k_neighbors, std_ratio));
}

PointCloud cull_tool_points(const PointCloud& cloud, const OrientedBox& tool_box,
                            double margin) {
  std::vector<int> keep;
  keep.reserve(cloud.size());
  for (int i = 0; i < static_cast<int>(cloud.size()); ++i)
    if (!tool_box.contains(cloud.points[i], margin)) keep.push_back(i);
  return cloud.select(keep);
}

std::vector<Eigen::Vector3d> estimate_normals(const PointCloud& cloud, int k_neighbors) {
  const int n = static_cast<int>(cloud.size());
  KdTree tree(cloud.points);
  std::vector<Eigen::Vector3d> normals(n);
  for (int i = 0; i < n; ++i) {
    const auto nn = tree.k_nearest(cloud.points[i], std::min(k_neighbors + 1, n));
    Eigen::Vector3d mean = Eigen::Vector3d::Zero();
    for (int j : nn) mean += cloud.points[j];
    mean /= static_cast<double>(nn.size());
    Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
    for (int j : nn) {
      const Eigen::Vector3d d = cloud.points[j] - mean;
      cov += d * d.transpose();
    }
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(cov);
    Eigen::Vector3d normal = eig.eigenvectors().col(0);
    int max_entry;
    normal.cwiseAbs().maxCoeff(&max_entry);
    if (normal[max_entry] < 0.0) normal = -normal;
    normals[i] = normal;
  }
  return normals;
}

namespace {

std::vector<double> local_curvature(const PointCloud& cloud, const KdTree& tree,
                                    double radius) {
  const int n = static_cast<int>(cloud.size());
  std::vector<double> curvature(n, 0.0);
  for (int i = 0; i < n; ++i) {
    const auto nn = tree.radius_search(cloud.points[i], radius);
    if (nn.size() < 3) continue;
    Eigen::Vector3d mean = Eigen::Vector3d::Zero();
    for (int j : nn) mean += cloud.points[j];
    mean /= static_cast<double>(nn.size());
    Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
    for (int j : nn) {
      const Eigen::Vector3d d = cloud.points[j] - mean;
      cov += d * d.transpose();
    }
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(cov);
    const double total = eig.eigenvalues().sum();
    curvature[i] = total > 1e-18 ? eig.eigenvalues()[0] / total : 0.0;
  }
  return curvature;
}

}  // namespace

SegmentSet region_grow(const PointCloud& cloud, double normal_angle_thresh,
                       double color_thresh, double neighbor_radius,
                       int min_segment_size) {
  const int n = static_cast<int>(cloud.size());
  if (n == 0) throw EmptyCloud("region_grow on empty cloud");

  std::vector<Eigen::Vector3d> normals =
      cloud.has_normals() ? cloud.normals : estimate_normals(cloud, 16);
  const bool use_color = cloud.has_colors();

  KdTree tree(cloud.points);
  const std::vector<double> curvature = local_curvature(cloud, tree, neighbor_radius);

  std::vector<int> seed_order(n);
  std::iota(seed_order.begin(), seed_order.end(), 0);
  std::stable_sort(seed_order.begin(), seed_order.end(),
                   [&](int a, int b) { return curvature[a] < curvature[b]; });

  const double cos_thresh = std::cos(normal_angle_thresh);
  std::vector<int> region_of(n, -1);
  int region_count = 0;

  for (int seed : seed_order) {
    if (region_of[seed] >= 0) continue;
    const int region = region_count++;
    const Eigen::Vector3d seed_normal = normals[seed];
    const Eigen::Vector3d seed_color = use_color ? cloud.colors[seed] : Eigen::Vector3d::Zero();

    std::vector<int> frontier{seed};
    region_of[seed] = region;
    while (!frontier.empty()) {
      const int p = frontier.back();
      frontier.pop_back();
      for (int q : tree.radius_search(cloud.points[p], neighbor_radius)) {
        if (region_of[q] >= 0) continue;
        // Angle between normal lines; orientation flips are irrelevant.
        if (std::abs(normals[q].dot(seed_normal)) < cos_thresh) continue;
        if (use_color && (cloud.colors[q] - seed_color).norm() >= color_thresh) continue;
        region_of[q] = region;
        frontier.push_back(q);
      }
    }
  }

  // Merge pass: adjacent regions with similar mean color collapse together.
  std::vector<int> parent(region_count);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };

  if (use_color && region_count > 1) {
    std::vector<Eigen::Vector3d> color_sum(region_count, Eigen::Vector3d::Zero());
    std::vector<int> counts(region_count, 0);
    for (int i = 0; i < n; ++i) {
      color_sum[region_of[i]] += cloud.colors[i];
      ++counts[region_of[i]];
    }
    std::vector<Eigen::Vector3d> mean_color(region_count);
    for (int r = 0; r < region_count; ++r) mean_color[r] = color_sum[r] / counts[r];

    // Adjacency from the same radius graph used for growing.
    std::vector<std::pair<int, int>> edges;
    for (int i = 0; i < n; ++i) {
      for (int j : tree.radius_search(cloud.points[i], neighbor_radius)) {
        const int a = region_of[i], b = region_of[j];
        if (a < b) edges.emplace_back(a, b);
      }
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

    bool changed = true;
    while (changed) {
      changed = false;
      for (const auto& [a, b] : edges) {
        const int ra = find(a), rb = find(b);
        if (ra == rb) continue;
        if ((mean_color[ra] - mean_color[rb]).norm() < color_thresh) {
          const int keep = std::min(ra, rb), gone = std::max(ra, rb);
          parent[gone] = keep;
          mean_color[keep] =
              (mean_color[keep] * counts[keep] + mean_color[gone] * counts[gone]) /
              (counts[keep] + counts[gone]);
          counts[keep] += counts[gone];
          changed = true;
        }
      }
    }
  }

  std::vector<int> merged_of(n);
  for (int i = 0; i < n; ++i) merged_of[i] = find(region_of[i]);

  std::vector<int> region_size(region_count, 0);
  for (int i = 0; i < n; ++i) ++region_size[merged_of[i]];

  // Renumber surviving regions by first appearance in input order.
  std::vector<int> final_id(region_count, SegmentSet::kDiscarded);
  int next_id = 0;
  for (int i = 0; i < n; ++i) {
    const int r = merged_of[i];
    if (region_size[r] >= min_segment_size && final_id[r] == SegmentSet::kDiscarded)
      final_id[r] = next_id++;
  }

  SegmentSet out;
  out.labels.resize(n);
  out.segments.resize(next_id);
  std::vector<std::vector<int>> members(next_id);
  for (int i = 0; i < n; ++i) {
    const int id = final_id[merged_of[i]];
    out.labels[i] = id;
    if (id >= 0) members[id].push_back(i);
  }
  for (int s = 0; s < next_id; ++s) out.segments[s] = cloud.select(members[s]);
  return out;
}

SegmentSet segment_scene(const PointCloud& cloud, const SegmentationConfig& config,
                         const std::optional<OrientedBox>& tool_box) {
  const int n = static_cast<int>(cloud.size());
  SegmentSet out;
  out.labels.assign(n, SegmentSet::kDiscarded);
  if (n == 0) return out;

  // Stage indices track each surviving point back to the raw input.
  std::vector<int> live(n);
  std::iota(live.begin(), live.end(), 0);
  PointCloud work = cloud;

  if (n >= 3) {
    const auto [plane, inliers] = ransac_plane(work, config.plane_dist_thresh,
                                               config.ransac_iterations, config.seed);
    std::vector<int> keep;
    for (int i = 0; i < static_cast<int>(work.size()); ++i)
      if (!inliers[i]) keep.push_back(i);
    std::vector<int> next_live;
    for (int i : keep) next_live.push_back(live[i]);
    live = std::move(next_live);
    work = work.select(keep);
  }

  if (tool_box && !work.empty()) {
    std::vector<int> keep;
    for (int i = 0; i < static_cast<int>(work.size()); ++i)
      if (!tool_box->contains(work.points[i], config.tool_margin)) keep.push_back(i);
    std::vector<int> next_live;
    for (int i : keep) next_live.push_back(live[i]);
    live = std::move(next_live);
    work = work.select(keep);
  }

  if (!work.empty() && static_cast<int>(work.size()) > config.outlier_k_neighbors) {
    const auto keep =
        outlier_keep_indices(work, config.outlier_k_neighbors, config.outlier_std_ratio);
    std::vector<int> next_live;
    for (int i : keep) next_live.push_back(live[i]);
    live = std::move(next_live);
    work = work.select(keep);
  }

  if (work.empty()) return out;

  const SegmentSet grown =
      region_grow(work, config.normal_angle_thresh, config.color_thresh,
                  config.neighbor_radius, config.min_segment_size);
  out.segments = grown.segments;
  for (std::size_t i = 0; i < live.size(); ++i) out.labels[live[i]] = grown.labels[i];
  return out;
}

}  // namespace artreg
