#include "artreg/registration.hpp"

#include "artreg/segmentation.hpp"

namespace artreg {

Eigen::VectorXd ObservationBatch::stacked() const {
  Eigen::VectorXd y(3 * points.size());
  for (std::size_t i = 0; i < points.size(); ++i) y.segment<3>(3 * i) = points[i];
  return y;
}

MeasurementModel::MeasurementModel(PointCloud object_model, int cap, std::uint64_t seed)
    : model_(std::move(object_model)), cap_(cap), seed_(seed) {
  if (model_.empty()) throw EmptyCloud("measurement model needs a non-empty object cloud");
  tree_ = std::make_unique<KdTree>(model_.points);
}

std::vector<Eigen::Vector3d> MeasurementModel::correspondences(
    const Pose& sigma_pose, const ObservationBatch& scene) const {
  if (scene.empty()) throw EmptyCloud("correspondence search on empty scene");
  const Pose inv = inverse(sigma_pose);
  std::vector<Eigen::Vector3d> out;
  out.reserve(scene.size());
  for (const auto& s : scene.points) {
    const auto hit = tree_->nearest(apply(inv, s));
    out.push_back(apply(sigma_pose, model_.points[hit.index]));
  }
  return out;
}

Eigen::VectorXd MeasurementModel::predict_stacked(const Pose& sigma_pose,
                                                  const ObservationBatch& scene) const {
  const auto pts = correspondences(sigma_pose, scene);
  Eigen::VectorXd h(3 * pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) h.segment<3>(3 * i) = pts[i];
  return h;
}

int associate_segment(const Pose& predicted_pose, const PointCloud& object_model,
                      const SegmentSet& segments, double gate) {
  if (segments.segments.empty()) throw NoSegmentAssociated();
  const Eigen::Vector3d predicted = apply(predicted_pose, centroid(object_model));

  int best = -1;
  double best_dist = 0.0;
  for (std::size_t i = 0; i < segments.segments.size(); ++i) {
    if (segments.segments[i].empty()) continue;
    const double d = (centroid(segments.segments[i]) - predicted).norm();
    if (best < 0 || d < best_dist) {
      best = static_cast<int>(i);
      best_dist = d;
    }
  }
  if (best < 0 || best_dist > gate) throw NoSegmentAssociated();
  return best;
}

ObservationBatch fuse_tactile(const ObservationBatch& scene_obs, const PointCloud& contacts,
                              int cap, std::uint64_t seed) {
  ObservationBatch out;
  const int n_contacts = static_cast<int>(contacts.size());
  const int scene_budget = std::max(0, cap - n_contacts);

  if (static_cast<int>(scene_obs.size()) <= scene_budget) {
    out.points = scene_obs.points;
  } else if (scene_budget > 0) {
    PointCloud tmp;
    tmp.points = scene_obs.points;
    out.points = subsample(tmp, scene_budget, seed).points;
  }
  out.points.insert(out.points.end(), contacts.points.begin(), contacts.points.end());
  return out;
}

ObservationBatch make_observation(const PointCloud& segment, int cap, std::uint64_t seed) {
  ObservationBatch obs;
  if (static_cast<int>(segment.size()) > cap) {
    obs.points = subsample(segment, cap, seed).points;
  } else {
    obs.points = segment.points;
  }
  return obs;
}

}  // namespace artreg
