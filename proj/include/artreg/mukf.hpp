#pragma once

#include <optional>

#include "artreg/liegroup.hpp"
#include "artreg/registration.hpp"

namespace artreg {

using Matrix6d = Eigen::Matrix<double, 6, 6>;
using Vector6d = Eigen::Matrix<double, 6, 1>;

// Per-object filter state. The covariance lives in the tangent space at the
// mean, blocks ordered [rotation; translation].
struct TrackState {
  Pose mean;
  Matrix6d cov = 1e-3 * Matrix6d::Identity();
  Matrix6d process_noise = 1e-3 * Matrix6d::Identity();  // Q
  double r_scalar = 1e-4;                                // per-coordinate, m^2
};

struct UkfParams {
  double alpha = 1.0;
  double beta = 2.0;
  double kappa = 0.0;
  static constexpr int kDim = 6;

  double lambda() const { return alpha * alpha * (kDim + kappa) - kDim; }
};

struct SigmaSet {
  std::vector<Twist> tangent_points;   // 2M+1, index 0 is zero
  std::vector<Pose> manifold_points;   // retract(mean, tangent_points[i])
  Eigen::VectorXd w_m;
  Eigen::VectorXd w_c;
};

SigmaSet sigma_points(const TrackState& state, const UkfParams& params);

// Random-walk prediction: the mean is carried through unchanged and the
// covariance is rebuilt from propagated state and noise sigma points.
TrackState predict(const TrackState& state, const UkfParams& params);

struct UpdateResult {
  TrackState state;
  double gain_norm = 0.0;
};

UpdateResult update(const TrackState& state, const ObservationBatch& meas,
                    const MeasurementModel& model, const UkfParams& params);

struct TrackStepResult {
  TrackState state;
  bool associated = false;
  int segment_index = -1;
};

// One tracking cycle: predict, associate a scene segment, build the capped
// observation (tactile contacts fused in when present), update.
// When no segment passes the gate the predicted state is returned with
// associated = false.
TrackStepResult track_step(const TrackState& state, const SegmentSet& scene_segments,
                           const MeasurementModel& model,
                           const std::optional<PointCloud>& tactile,
                           const UkfParams& params, double association_gate = 0.3);

// Cholesky factor of `m` with escalating diagonal jitter, 1e-12 up to 1e-6.
Matrix6d cholesky_with_jitter(const Matrix6d& m);

}  // namespace artreg
