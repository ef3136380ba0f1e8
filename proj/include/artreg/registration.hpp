#pragma once

#include <memory>
#include <vector>

#include "artreg/cloud.hpp"
#include "artreg/kdtree.hpp"
#include "artreg/liegroup.hpp"

namespace artreg {

struct SegmentSet;  // segmentation.hpp

// Measurement vector: scene points stacked as y = {p1..pQ}.
struct ObservationBatch {
  std::vector<Eigen::Vector3d> points;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
  Eigen::VectorXd stacked() const;
};

// Correspondence-based measurement function h: for each scene point, the
// closest model point under a candidate pose. The model cloud is captured
// once; queries run against a fixed spatial index in the model frame, which
// is equivalent to searching the transformed model because rigid transforms
// preserve distances.
class MeasurementModel {
 public:
  MeasurementModel(PointCloud object_model, int cap, std::uint64_t seed);

  const PointCloud& object_model() const { return model_; }
  int cap() const { return cap_; }
  std::uint64_t seed() const { return seed_; }

  std::vector<Eigen::Vector3d> correspondences(const Pose& sigma_pose,
                                               const ObservationBatch& scene) const;

  // Stacked correspondences, the h(sigma) of the filter update.
  Eigen::VectorXd predict_stacked(const Pose& sigma_pose,
                                  const ObservationBatch& scene) const;

 private:
  PointCloud model_;
  int cap_;
  std::uint64_t seed_;
  std::unique_ptr<KdTree> tree_;
};

// Segment whose centroid is nearest to the predicted model centroid.
// Throws NoSegmentAssociated when the nearest centroid exceeds `gate`.
int associate_segment(const Pose& predicted_pose, const PointCloud& object_model,
                      const SegmentSet& segments, double gate);

// Concatenates contacts into the observation, then re-caps by seeded
// subsampling of the scene points only; contacts are never dropped.
ObservationBatch fuse_tactile(const ObservationBatch& scene_obs, const PointCloud& contacts,
                              int cap, std::uint64_t seed);

ObservationBatch make_observation(const PointCloud& segment, int cap, std::uint64_t seed);

}  // namespace artreg
