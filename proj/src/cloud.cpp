#include "artreg/cloud.hpp"

#include <algorithm>
#include <numeric>

#include <Eigen/Eigenvalues>

#include "artreg/kdtree.hpp"

namespace artreg {

void PointCloud::append(const PointCloud& other) {
  // Attribute channels survive only when both sides carry them.
  if (!empty() && has_colors() != other.has_colors()) colors.clear();
  if (!empty() && has_normals() != other.has_normals()) normals.clear();
  if (empty()) {
    *this = other;
    return;
  }
  points.insert(points.end(), other.points.begin(), other.points.end());
  if (has_colors()) colors.insert(colors.end(), other.colors.begin(), other.colors.end());
  if (has_normals())
    normals.insert(normals.end(), other.normals.begin(), other.normals.end());
}

PointCloud PointCloud::select(const std::vector<int>& indices) const {
  PointCloud out;
  out.points.reserve(indices.size());
  for (int i : indices) out.points.push_back(points[i]);
  if (has_colors()) {
    out.colors.reserve(indices.size());
    for (int i : indices) out.colors.push_back(colors[i]);
  }
  if (has_normals()) {
    out.normals.reserve(indices.size());
    for (int i : indices) out.normals.push_back(normals[i]);
  }
  return out;
}

std::pair<int, double> nearest_neighbor(const Eigen::Vector3d& query,
                                        const PointCloud& cloud) {
  if (cloud.empty()) throw EmptyCloud();
  KdTree tree(cloud.points);
  const auto r = tree.nearest(query);
  return {r.index, r.distance};
}

OrientedBox compute_obb(const PointCloud& cloud) {
  if (cloud.empty()) throw DegenerateCloud("compute_obb on empty cloud");

  const Eigen::Vector3d mean = centroid(cloud);
  OrientedBox box;
  if (cloud.size() == 1) {
    box.center = mean;
    return box;  // world axes, zero extents
  }

  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (const auto& p : cloud.points) {
    const Eigen::Vector3d d = p - mean;
    cov += d * d.transpose();
  }
  cov /= static_cast<double>(cloud.size());

  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(cov);
  // Eigen returns ascending eigenvalues; start with descending order.
  Eigen::Vector3d axes[3] = {eig.eigenvectors().col(2), eig.eigenvectors().col(1),
                             eig.eigenvectors().col(0)};

  Eigen::Vector3d lo, hi;
  for (int i = 0; i < 3; ++i) {
    double mn = axes[i].dot(cloud.points[0] - mean), mx = mn;
    for (const auto& p : cloud.points) {
      const double t = axes[i].dot(p - mean);
      mn = std::min(mn, t);
      mx = std::max(mx, t);
    }
    lo[i] = mn;
    hi[i] = mx;
  }

  int order[3] = {0, 1, 2};
  std::stable_sort(order, order + 3,
                   [&](int a, int b) { return hi[a] - lo[a] > hi[b] - lo[b]; });

  box.center = mean;
  for (int i = 0; i < 3; ++i) {
    const int k = order[i];
    Eigen::Vector3d axis = axes[k];
    int max_entry;
    axis.cwiseAbs().maxCoeff(&max_entry);
    if (axis[max_entry] < 0.0) axis = -axis;
    box.axes[i] = axis;
    box.extents[i] = 0.5 * (hi[k] - lo[k]);
    // Center shifts with the midpoint of the projection interval so that an
    // asymmetric cloud still gets a tight box.
    box.center += axes[k] * (0.5 * (hi[k] + lo[k]));
  }
  return box;
}

PointCloud transform_cloud(const PointCloud& cloud, const Pose& p) {
  PointCloud out = cloud;
  for (auto& pt : out.points) pt = apply(p, pt);
  for (auto& n : out.normals) n = p.rotation * n;
  return out;
}

PointCloud subsample(const PointCloud& cloud, std::size_t n, std::uint64_t seed) {
  if (cloud.empty()) throw EmptyCloud("subsample on empty cloud");
  if (n >= cloud.size()) return cloud;

  Rng rng(seed);
  std::vector<int> idx(cloud.size());
  std::iota(idx.begin(), idx.end(), 0);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = i + rng.uniform_int(static_cast<int>(cloud.size() - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(n);
  std::sort(idx.begin(), idx.end());
  return cloud.select(idx);
}

Eigen::Vector3d centroid(const PointCloud& cloud) {
  if (cloud.empty()) throw EmptyCloud("centroid on empty cloud");
  Eigen::Vector3d sum = Eigen::Vector3d::Zero();
  for (const auto& p : cloud.points) sum += p;
  return sum / static_cast<double>(cloud.size());
}

}  // namespace artreg
