#include "artreg/kdtree.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace artreg {

namespace {
constexpr int kLeafSize = 16;
}

KdTree::KdTree(const std::vector<Eigen::Vector3d>& points) : points_(points) {
  order_.resize(points_.size());
  std::iota(order_.begin(), order_.end(), 0);
  if (!points_.empty()) {
    nodes_.reserve(2 * points_.size() / kLeafSize + 8);
    root_ = build(0, static_cast<int>(points_.size()));
  }
}

int KdTree::build(int begin, int end) {
  const int id = static_cast<int>(nodes_.size());
  nodes_.emplace_back();

  if (end - begin <= kLeafSize) {
    nodes_[id].begin = begin;
    nodes_[id].end = end;
    return id;
  }

  Eigen::Vector3d lo = points_[order_[begin]], hi = lo;
  for (int i = begin + 1; i < end; ++i) {
    lo = lo.cwiseMin(points_[order_[i]]);
    hi = hi.cwiseMax(points_[order_[i]]);
  }
  int axis;
  (hi - lo).maxCoeff(&axis);

  const int mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](int a, int b) { return points_[a][axis] < points_[b][axis]; });

  nodes_[id].axis = axis;
  nodes_[id].split = points_[order_[mid]][axis];
  nodes_[id].left = build(begin, mid);
  nodes_[id].right = build(mid, end);
  return id;
}

KdTree::Result KdTree::nearest(const Eigen::Vector3d& query) const {
  if (points_.empty()) throw EmptyCloud("nearest neighbor on empty cloud");
  Result best;
  best.distance = std::numeric_limits<double>::infinity();
  nearest_rec(root_, query, best);
  best.distance = std::sqrt(best.distance);
  return best;
}

void KdTree::nearest_rec(int node, const Eigen::Vector3d& q, Result& best) const {
  const Node& n = nodes_[node];
  if (n.axis < 0) {
    for (int i = n.begin; i < n.end; ++i) {
      const int idx = order_[i];
      const double d2 = (points_[idx] - q).squaredNorm();
      if (d2 < best.distance || (d2 == best.distance && idx < best.index)) {
        best.distance = d2;
        best.index = idx;
      }
    }
    return;
  }
  const double delta = q[n.axis] - n.split;
  const int near = delta < 0.0 ? n.left : n.right;
  const int far = delta < 0.0 ? n.right : n.left;
  nearest_rec(near, q, best);
  if (delta * delta <= best.distance) nearest_rec(far, q, best);
}

std::vector<int> KdTree::radius_search(const Eigen::Vector3d& query, double radius) const {
  std::vector<int> out;
  if (points_.empty()) return out;
  radius_rec(root_, query, radius * radius, out);
  std::sort(out.begin(), out.end());
  return out;
}

void KdTree::radius_rec(int node, const Eigen::Vector3d& q, double r2,
                        std::vector<int>& out) const {
  const Node& n = nodes_[node];
  if (n.axis < 0) {
    for (int i = n.begin; i < n.end; ++i) {
      const int idx = order_[i];
      if ((points_[idx] - q).squaredNorm() <= r2) out.push_back(idx);
    }
    return;
  }
  const double delta = q[n.axis] - n.split;
  if (delta < 0.0 || delta * delta <= r2) radius_rec(n.left, q, r2, out);
  if (delta >= 0.0 || delta * delta <= r2) radius_rec(n.right, q, r2, out);
}

std::vector<int> KdTree::k_nearest(const Eigen::Vector3d& query, int k) const {
  // Heap-free variant: grow a search radius until k hits, then sort. The
  // clouds here are small enough that simplicity wins over a k-NN heap walk.
  if (points_.empty() || k <= 0) return {};
  k = std::min<int>(k, static_cast<int>(points_.size()));

  const Result nn = nearest(query);
  double radius = std::max(nn.distance * 2.0, 1e-6);
  std::vector<int> found;
  for (int iter = 0; iter < 64; ++iter) {
    found = radius_search(query, radius);
    if (static_cast<int>(found.size()) >= k) break;
    radius *= 2.0;
  }
  std::sort(found.begin(), found.end(), [&](int a, int b) {
    const double da = (points_[a] - query).squaredNorm();
    const double db = (points_[b] - query).squaredNorm();
    if (da != db) return da < db;
    return a < b;
  });
  found.resize(k);
  return found;
}

}  // namespace artreg
