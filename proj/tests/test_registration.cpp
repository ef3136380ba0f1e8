#include <doctest.h>

#include "artreg/registration.hpp"
#include "artreg/segmentation.hpp"
#include "artreg/sim.hpp"

using namespace artreg;

namespace {

PointCloud random_cloud(Rng& rng, int n) {
  PointCloud cloud;
  for (int i = 0; i < n; ++i)
    cloud.points.emplace_back(rng.uniform(-0.1, 0.1), rng.uniform(-0.1, 0.1),
                              rng.uniform(-0.1, 0.1));
  return cloud;
}

// Exhaustive nearest transformed-model point, the oracle for h().
Eigen::Vector3d brute_force_correspondence(const PointCloud& model, const Pose& pose,
                                           const Eigen::Vector3d& scene_point) {
  int best = -1;
  double best_d2 = 0.0;
  for (int i = 0; i < static_cast<int>(model.size()); ++i) {
    const double d2 = (apply(pose, model.points[i]) - scene_point).squaredNorm();
    if (best < 0 || d2 < best_d2) {
      best = i;
      best_d2 = d2;
    }
  }
  return apply(pose, model.points[best]);
}

}  // namespace

TEST_CASE("correspondences are exact under perfect alignment") {
  Rng rng(21);
  const PointCloud model = random_cloud(rng, 300);
  const Pose truth = exp_se3(Twist(0.4 * rng.unit_vector(), Eigen::Vector3d(0.2, 0.1, 0.0)));

  MeasurementModel mm(model, 100, 1);
  ObservationBatch scene;
  const PointCloud sub = subsample(transform_cloud(model, truth), 80, 5);
  scene.points = sub.points;

  const auto matched = mm.correspondences(truth, scene);
  REQUIRE(matched.size() == scene.size());
  for (std::size_t i = 0; i < matched.size(); ++i)
    CHECK((matched[i] - scene.points[i]).norm() < 1e-12);
}

TEST_CASE("correspondences match the brute-force oracle") {
  Rng rng(22);
  const PointCloud model = random_cloud(rng, 400);
  MeasurementModel mm(model, 100, 1);

  for (int trial = 0; trial < 5; ++trial) {
    const Pose pose = exp_se3(Twist(rng.uniform(0, 1.5) * rng.unit_vector(),
                                    Eigen::Vector3d(rng.uniform(-0.2, 0.2),
                                                    rng.uniform(-0.2, 0.2), 0.0)));
    ObservationBatch scene;
    for (int i = 0; i < 60; ++i)
      scene.points.emplace_back(rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3),
                                rng.uniform(-0.3, 0.3));
    const auto matched = mm.correspondences(pose, scene);
    for (std::size_t i = 0; i < scene.size(); ++i)
      CHECK((matched[i] - brute_force_correspondence(model, pose, scene.points[i])).norm() <
            1e-12);
  }
}

TEST_CASE("normal-offset residuals recover the offset on a planar model") {
  // Plate in the y-z plane, candidate pose shifted 1 cm along its normal:
  // every matched point is the projection of the scene point onto the
  // shifted plane, so each residual is -1 cm along x.
  PointCloud model;
  for (int i = 0; i <= 60; ++i)
    for (int j = 0; j <= 60; ++j)
      model.points.emplace_back(0.0, -0.15 + i * 0.005, -0.15 + j * 0.005);
  MeasurementModel mm(model, 100, 1);

  const Pose offset = Pose::from_translation(Eigen::Vector3d(0.01, 0, 0));
  ObservationBatch scene;
  Rng rng(23);
  for (int i = 0; i < 50; ++i)
    scene.points.emplace_back(0.0, rng.uniform(-0.1, 0.1), rng.uniform(-0.1, 0.1));

  const auto matched = mm.correspondences(offset, scene);
  for (std::size_t i = 0; i < scene.size(); ++i) {
    const Eigen::Vector3d residual = scene.points[i] - matched[i];
    CHECK(residual.x() == doctest::Approx(-0.01));
    CHECK(std::abs(residual.y()) < 0.003);  // grid quantization
    CHECK(std::abs(residual.z()) < 0.003);
  }
}

TEST_CASE("correspondence tie breaks to the lower model index") {
  PointCloud model;
  model.points = {{-1, 0, 0}, {1, 0, 0}};
  MeasurementModel mm(model, 10, 1);
  ObservationBatch scene;
  scene.points = {{0, 0, 0}};
  const auto matched = mm.correspondences(Pose::identity(), scene);
  CHECK(matched[0].isApprox(Eigen::Vector3d(-1, 0, 0)));
}

TEST_CASE("associate_segment picks the gated nearest centroid") {
  PointCloud model;
  model.points = {{0, 0, 0}, {0.02, 0, 0}};

  SegmentSet segments;
  PointCloud near_seg, far_seg;
  near_seg.points = {{0.05, 0, 0}, {0.07, 0, 0}};
  far_seg.points = {{0.5, 0, 0}, {0.52, 0, 0}};
  segments.segments = {far_seg, near_seg};

  CHECK(associate_segment(Pose::identity(), model, segments, 0.3) == 1);

  SegmentSet only_near;
  only_near.segments = {near_seg};
  CHECK(associate_segment(Pose::identity(), model, only_near, 0.3) == 0);

  SegmentSet only_far;
  only_far.segments = {far_seg};
  CHECK_THROWS_AS(associate_segment(Pose::identity(), model, only_far, 0.3),
                  NoSegmentAssociated);

  // Permutation only relabels the winner.
  SegmentSet swapped;
  swapped.segments = {near_seg, far_seg};
  CHECK(associate_segment(Pose::identity(), model, swapped, 0.3) == 0);
}

TEST_CASE("fuse_tactile keeps contacts under the cap") {
  ObservationBatch scene;
  Rng rng(31);
  for (int i = 0; i < 100; ++i)
    scene.points.emplace_back(rng.uniform(-1, 1), rng.uniform(-1, 1), 0.0);

  PointCloud contacts;
  for (int i = 0; i < 5; ++i) contacts.points.emplace_back(10.0 + i, 0.0, 0.0);

  const ObservationBatch fused = fuse_tactile(scene, contacts, 100, 7);
  CHECK(fused.size() == 100);
  int found = 0;
  for (const auto& p : fused.points)
    if (p.x() >= 10.0) ++found;
  CHECK(found == 5);

  const ObservationBatch unchanged = fuse_tactile(scene, PointCloud{}, 100, 7);
  CHECK(unchanged.size() == scene.size());

  const ObservationBatch contacts_only = fuse_tactile(ObservationBatch{}, contacts, 100, 7);
  CHECK(contacts_only.size() == 5);
}
