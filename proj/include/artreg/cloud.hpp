#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "artreg/common.hpp"
#include "artreg/liegroup.hpp"

namespace artreg {

// Positions with optional per-point color ([0,1] RGB) and unit normals.
// colors/normals are either empty or the same length as points.
struct PointCloud {
  std::vector<Eigen::Vector3d> points;
  std::vector<Eigen::Vector3d> colors;
  std::vector<Eigen::Vector3d> normals;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
  bool has_colors() const { return !colors.empty(); }
  bool has_normals() const { return !normals.empty(); }

  void append(const PointCloud& other);
  PointCloud select(const std::vector<int>& indices) const;
};

struct OrientedBox {
  Eigen::Vector3d center = Eigen::Vector3d::Zero();
  // Orthonormal, ordered so extents[0] >= extents[1] >= extents[2].
  Eigen::Vector3d axes[3] = {Eigen::Vector3d::UnitX(), Eigen::Vector3d::UnitY(),
                             Eigen::Vector3d::UnitZ()};
  Eigen::Vector3d extents = Eigen::Vector3d::Zero();  // half-lengths

  bool contains(const Eigen::Vector3d& p, double margin = 0.0) const {
    const Eigen::Vector3d d = p - center;
    for (int i = 0; i < 3; ++i)
      if (std::abs(axes[i].dot(d)) > extents[i] + margin) return false;
    return true;
  }
};

std::pair<int, double> nearest_neighbor(const Eigen::Vector3d& query,
                                        const PointCloud& cloud);

// PCA box. Axes are covariance eigenvectors sorted by projected extent,
// each flipped so its largest-magnitude entry is positive; the stable sort
// keeps eigenvalue order on exact extent ties.
OrientedBox compute_obb(const PointCloud& cloud);

PointCloud transform_cloud(const PointCloud& cloud, const Pose& p);
PointCloud subsample(const PointCloud& cloud, std::size_t n, std::uint64_t seed);
Eigen::Vector3d centroid(const PointCloud& cloud);

// ASCII PLY with float x,y,z and optional uchar red,green,blue /
// float nx,ny,nz properties.
PointCloud load_ply(const std::string& path);
void save_ply(const std::string& path, const PointCloud& cloud);

}  // namespace artreg
