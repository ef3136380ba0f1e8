#pragma once

#include <vector>

#include <Eigen/Core>

#include "artreg/common.hpp"

namespace artreg {

// Exact nearest-neighbor index over a fixed set of 3D points. Median-split
// tree with small leaves; results match a brute-force scan, with ties broken
// toward the lowest point index.
class KdTree {
 public:
  explicit KdTree(const std::vector<Eigen::Vector3d>& points);

  struct Result {
    int index = -1;
    double distance = 0.0;
  };

  Result nearest(const Eigen::Vector3d& query) const;

  // Indices of all points within `radius` of `query`, ascending.
  std::vector<int> radius_search(const Eigen::Vector3d& query, double radius) const;

  // Indices of the k nearest points, nearest first (ties by lower index).
  std::vector<int> k_nearest(const Eigen::Vector3d& query, int k) const;

  std::size_t size() const { return points_.size(); }

 private:
  struct Node {
    int axis = -1;          // -1 marks a leaf
    double split = 0.0;
    int left = -1, right = -1;
    int begin = 0, end = 0;  // leaf range into order_
  };

  int build(int begin, int end);
  void nearest_rec(int node, const Eigen::Vector3d& q, Result& best) const;
  void radius_rec(int node, const Eigen::Vector3d& q, double r2,
                  std::vector<int>& out) const;

  std::vector<Eigen::Vector3d> points_;
  std::vector<int> order_;
  std::vector<Node> nodes_;
  int root_ = -1;
};

}  // namespace artreg
