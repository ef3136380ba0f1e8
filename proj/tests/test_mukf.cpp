#include <doctest.h>

#include <Eigen/Eigenvalues>

#include "artreg/mukf.hpp"
#include "artreg/segmentation.hpp"
#include "artreg/sim.hpp"

using namespace artreg;

namespace {

Matrix6d random_spd(Rng& rng, double scale) {
  Matrix6d a;
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) a(i, j) = rng.uniform(-1.0, 1.0);
  return scale * (a * a.transpose() + 0.1 * Matrix6d::Identity());
}

PointCloud box_model() {
  return sample_box(Eigen::Vector3d(0.12, 0.08, 0.05), 0.006, Eigen::Vector3d(1, 0, 0));
}

ObservationBatch full_view(const PointCloud& model, const Pose& truth, int n, int seed) {
  ObservationBatch obs;
  obs.points = subsample(transform_cloud(model, truth), n, seed).points;
  return obs;
}

}  // namespace

TEST_CASE("sigma weights match the closed form for alpha=1 kappa=0") {
  TrackState state;
  UkfParams params;  // alpha 1, beta 2, kappa 0
  const SigmaSet set = sigma_points(state, params);

  REQUIRE(set.w_m.size() == 13);
  CHECK(set.w_m[0] == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(set.w_c[0] == doctest::Approx(2.0));
  for (int i = 1; i < 13; ++i) {
    CHECK(set.w_m[i] == doctest::Approx(1.0 / 12.0));
    CHECK(set.w_c[i] == doctest::Approx(1.0 / 12.0));
  }
  CHECK(set.tangent_points[0].norm() == 0.0);
  for (int i = 0; i < 13; ++i)
    CHECK(set.manifold_points[i].matrix().isApprox(
        retract(state.mean, set.tangent_points[i]).matrix(), 1e-14));
}

TEST_CASE("mean weights sum to one for 20 seeded scaling triples") {
  Rng rng(51);
  TrackState state;
  for (int k = 0; k < 20; ++k) {
    UkfParams params;
    params.alpha = rng.uniform(0.3, 1.5);
    params.beta = rng.uniform(0.0, 3.0);
    params.kappa = rng.uniform(0.0, 2.0);
    const SigmaSet set = sigma_points(state, params);
    CHECK(std::abs(set.w_m.sum() - 1.0) < 1e-12);
  }
}

TEST_CASE("zero covariance collapses the sigma points onto the mean") {
  TrackState state;
  state.cov.setZero();
  const SigmaSet set = sigma_points(state, UkfParams{});
  for (const auto& p : set.manifold_points) {
    CHECK((p.translation - state.mean.translation).norm() < 1e-5);
    CHECK(rotation_angle(compose(inverse(state.mean), p)) < 1e-5);
  }
}

TEST_CASE("sigma deviations reconstruct the covariance") {
  Rng rng(52);
  for (int trial = 0; trial < 5; ++trial) {
    TrackState state;
    state.cov = random_spd(rng, 1e-3);
    UkfParams params;
    params.alpha = rng.uniform(0.5, 1.2);
    params.kappa = rng.uniform(0.0, 1.0);
    const SigmaSet set = sigma_points(state, params);

    const double w = 0.5 / (6.0 + params.lambda());
    Matrix6d rebuilt = Matrix6d::Zero();
    for (int i = 1; i < 13; ++i) {
      const Vector6d d = set.tangent_points[i].to_vector();
      rebuilt += w * d * d.transpose();
    }
    CHECK((rebuilt - state.cov).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("cholesky jitter escalates and eventually fails") {
  CHECK_NOTHROW(cholesky_with_jitter(Matrix6d::Zero()));
  Matrix6d negative = -Matrix6d::Identity();
  CHECK_THROWS_AS(cholesky_with_jitter(negative), CholeskyFailure);
}

TEST_CASE("predict keeps the mean and adds exactly Q") {
  Rng rng(53);
  TrackState state;
  state.mean = exp_se3(Twist(0.3 * rng.unit_vector(), Eigen::Vector3d(0.2, -0.1, 0.05)));
  state.cov = random_spd(rng, 2e-3);

  SUBCASE("Q = 0 preserves the covariance") {
    state.process_noise.setZero();
    const TrackState out = predict(state, UkfParams{});
    CHECK((out.cov - state.cov).cwiseAbs().maxCoeff() < 1e-9);
    CHECK(out.mean.matrix() == state.mean.matrix());  // bitwise random walk
  }

  SUBCASE("Q = q I grows the covariance by q I") {
    const double q = 4e-3;
    state.process_noise = q * Matrix6d::Identity();
    const TrackState out = predict(state, UkfParams{});
    CHECK((out.cov - (state.cov + q * Matrix6d::Identity())).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("zero innovation leaves the mean fixed and never grows the trace") {
  Rng rng(54);
  const PointCloud model = box_model();
  TrackState state;
  state.mean = exp_se3(Twist(0.2 * rng.unit_vector(), Eigen::Vector3d(0.1, 0.0, 0.02)));

  MeasurementModel mm(model, 100, 3);
  // Observation generated at exactly the current mean.
  const ObservationBatch obs = full_view(model, state.mean, 80, 9);

  const UpdateResult result = update(state, obs, mm, UkfParams{});
  CHECK((apply(result.state.mean, Eigen::Vector3d::Zero()) -
         apply(state.mean, Eigen::Vector3d::Zero()))
            .norm() < 5e-4);
  CHECK(result.state.cov.trace() <= state.cov.trace() + 1e-12);
}

TEST_CASE("static convergence: 2 cm offset corrected within 10 updates") {
  const PointCloud model = box_model();
  const Pose truth = Pose::from_translation(Eigen::Vector3d(0.05, -0.03, 0.0));

  TrackState state;
  state.mean = compose(truth, Pose::from_translation(Eigen::Vector3d(0.02, 0.0, 0.0)));
  state.cov = 1e-4 * Matrix6d::Identity();  // initial uncertainty at the offset scale

  MeasurementModel mm(model, 100, 5);
  // A static camera still delivers a fresh sample of the view each frame.
  for (int i = 0; i < 10; ++i) {
    const ObservationBatch obs = full_view(model, truth, 100, 11 + i);
    state = update(state, obs, mm, UkfParams{}).state;
  }

  const Eigen::Vector3d ref = centroid(model);
  const double error = (apply(state.mean, ref) - apply(truth, ref)).norm();
  CHECK(error < 1e-4);
}

TEST_CASE("huge measurement noise freezes the mean") {
  const PointCloud model = box_model();
  TrackState state;
  state.r_scalar = 1e9;
  MeasurementModel mm(model, 100, 7);
  const ObservationBatch obs =
      full_view(model, Pose::from_translation(Eigen::Vector3d(0.01, 0, 0)), 60, 13);

  const UpdateResult result = update(state, obs, mm, UkfParams{});
  const Eigen::Vector3d ref = centroid(model);
  CHECK((apply(result.state.mean, ref) - apply(state.mean, ref)).norm() < 1e-6);
}

TEST_CASE("covariance stays symmetric PSD over a 200-step run") {
  Rng rng(55);
  const PointCloud model = box_model();
  MeasurementModel mm(model, 60, 17);

  TrackState state;
  Pose truth;
  for (int step = 0; step < 200; ++step) {
    const Twist wiggle(0.02 * rng.unit_vector(),
                       Eigen::Vector3d(rng.uniform(-5e-3, 5e-3), rng.uniform(-5e-3, 5e-3), 0));
    truth = compose(exp_se3(wiggle), truth);

    state = predict(state, UkfParams{});
    const ObservationBatch obs = full_view(model, truth, 60, step);
    state = update(state, obs, mm, UkfParams{}).state;

    CHECK((state.cov - state.cov.transpose()).cwiseAbs().maxCoeff() < 1e-10);
    Eigen::SelfAdjointEigenSolver<Matrix6d> eig(state.cov);
    CHECK(eig.eigenvalues().minCoeff() >= -1e-10);
  }
}

TEST_CASE("track_step: static object converges; empty frame degrades softly") {
  const PointCloud model = box_model();
  MeasurementModel mm(model, 100, 19);

  SegmentSet frame;
  PointCloud seg = transform_cloud(model, Pose::from_translation({0.015, -0.01, 0.0}));
  frame.segments = {seg};

  TrackState state;
  TrackStepResult result;
  for (int i = 0; i < 10; ++i) {
    result = track_step(state, frame, mm, std::nullopt, UkfParams{});
    state = result.state;
  }
  CHECK(result.associated);
  const Eigen::Vector3d ref = centroid(model);
  CHECK((apply(state.mean, ref) - Eigen::Vector3d(0.015, -0.01, 0.0) - ref).norm() < 1e-3);

  // No segments: predicted state comes back flagged unassociated.
  SegmentSet empty;
  const TrackStepResult soft = track_step(state, empty, mm, std::nullopt, UkfParams{});
  CHECK_FALSE(soft.associated);
  CHECK(soft.state.mean.matrix() == state.mean.matrix());

  // All segments beyond the gate behave the same way.
  SegmentSet far;
  PointCloud far_seg = transform_cloud(model, Pose::from_translation({5.0, 0, 0}));
  far.segments = {far_seg};
  CHECK_FALSE(track_step(state, far, mm, std::nullopt, UkfParams{}).associated);
}

TEST_CASE("independent filters match isolated single-object runs exactly") {
  Rng rng(56);
  std::vector<PointCloud> models;
  std::vector<Pose> truths;
  for (int i = 0; i < 3; ++i) {
    PointCloud m = box_model();
    const Pose at = Pose::from_translation(Eigen::Vector3d(-0.3 + 0.3 * i, 0.1, 0.0));
    models.push_back(transform_cloud(m, at));
    truths.push_back(Pose::from_translation(Eigen::Vector3d(0.01 * (i + 1), -0.005 * i, 0)));
  }

  SegmentSet frame;
  for (int i = 0; i < 3; ++i)
    frame.segments.push_back(transform_cloud(models[i], truths[i]));

  // Joint run: three filters over the same frames.
  std::vector<TrackState> joint(3);
  std::vector<std::unique_ptr<MeasurementModel>> mms;
  for (int i = 0; i < 3; ++i) mms.push_back(std::make_unique<MeasurementModel>(models[i], 80, 100 + i));
  for (int step = 0; step < 5; ++step)
    for (int i = 0; i < 3; ++i)
      joint[i] = track_step(joint[i], frame, *mms[i], std::nullopt, UkfParams{}).state;

  // Isolated runs, same inputs.
  for (int i = 0; i < 3; ++i) {
    TrackState solo;
    MeasurementModel mm(models[i], 80, 100 + i);
    for (int step = 0; step < 5; ++step)
      solo = track_step(solo, frame, mm, std::nullopt, UkfParams{}).state;
    CHECK(solo.mean.matrix() == joint[i].mean.matrix());
    CHECK(solo.cov == joint[i].cov);
  }
}

TEST_CASE("update with tactile points fused stays consistent") {
  const PointCloud model = box_model();
  MeasurementModel mm(model, 100, 23);
  const Pose truth = Pose::from_translation(Eigen::Vector3d(0.02, 0.01, 0.0));

  SegmentSet frame;
  frame.segments = {transform_cloud(model, truth)};

  PointCloud contacts;
  for (int i = 0; i < 4; ++i)
    contacts.points.push_back(apply(truth, model.points[i * 50]));

  TrackState state;
  for (int i = 0; i < 8; ++i)
    state = track_step(state, frame, mm, contacts, UkfParams{}).state;
  const Eigen::Vector3d ref = centroid(model);
  // predict/update cycles plateau at the sigma-spread level set by Q.
  CHECK((apply(state.mean, ref) - apply(truth, ref)).norm() < 3e-3);
}
