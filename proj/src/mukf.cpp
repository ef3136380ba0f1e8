#include "artreg/mukf.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "artreg/segmentation.hpp"

namespace artreg {

namespace {

void symmetrize(Matrix6d& m) { m = 0.5 * (m + m.transpose()).eval(); }

// Keeps the covariance inside the PSD cone after the subtractive update.
void clamp_psd(Matrix6d& m) {
  Eigen::SelfAdjointEigenSolver<Matrix6d> eig(m);
  if (eig.eigenvalues().minCoeff() >= -1e-10) return;
  Vector6d vals = eig.eigenvalues().cwiseMax(0.0);
  m = eig.eigenvectors() * vals.asDiagonal() * eig.eigenvectors().transpose();
  symmetrize(m);
}

}  // namespace

Matrix6d cholesky_with_jitter(const Matrix6d& m) {
  double jitter = 0.0;
  for (int attempt = 0; attempt < 9; ++attempt) {
    Matrix6d candidate = m;
    if (jitter > 0.0) candidate += jitter * Matrix6d::Identity();
    Eigen::LLT<Matrix6d> llt(candidate);
    if (llt.info() == Eigen::Success) return llt.matrixL();
    jitter = jitter == 0.0 ? 1e-12 : jitter * 10.0;
    if (jitter > 1e-6) break;
  }
  throw CholeskyFailure();
}

SigmaSet sigma_points(const TrackState& state, const UkfParams& params) {
  constexpr int m = UkfParams::kDim;
  const double lambda = params.lambda();
  if (m + lambda <= 0.0)
    throw Error("invalid UKF scaling: M + lambda must be positive");

  const Matrix6d sqrt_cov = cholesky_with_jitter((m + lambda) * state.cov);

  SigmaSet set;
  set.tangent_points.resize(2 * m + 1);
  set.manifold_points.resize(2 * m + 1);
  set.tangent_points[0] = Twist();
  for (int i = 0; i < m; ++i) {
    const Vector6d col = sqrt_cov.col(i);
    set.tangent_points[1 + i] = Twist::from_vector(col);
    set.tangent_points[1 + m + i] = Twist::from_vector(-col);
  }
  for (int i = 0; i <= 2 * m; ++i)
    set.manifold_points[i] = retract(state.mean, set.tangent_points[i]);

  set.w_m.resize(2 * m + 1);
  set.w_c.resize(2 * m + 1);
  set.w_m[0] = lambda / (m + lambda);
  set.w_c[0] = lambda / (m + lambda) + (1.0 - params.alpha * params.alpha + params.beta);
  for (int i = 1; i <= 2 * m; ++i) set.w_m[i] = set.w_c[i] = 0.5 / (m + lambda);
  return set;
}

TrackState predict(const TrackState& state, const UkfParams& params) {
  constexpr int m = UkfParams::kDim;
  const double lambda = params.lambda();

  TrackState out = state;  // random walk: mean is unchanged

  // State sigma points through the identity process model.
  const SigmaSet set = sigma_points(state, params);
  Matrix6d p_state = Matrix6d::Zero();
  for (int i = 0; i <= 2 * m; ++i) {
    const Vector6d dev = inv_retract(out.mean, set.manifold_points[i]).to_vector();
    p_state += set.w_c[i] * dev * dev.transpose();
  }

  // Noise sigma points, the +/- columns of sqrt((M+lambda) Q).
  const Matrix6d sqrt_q = cholesky_with_jitter((m + lambda) * state.process_noise);
  Matrix6d p_noise = Matrix6d::Zero();
  const double w = 0.5 / (m + lambda);
  for (int i = 0; i < m; ++i) {
    const Vector6d col = sqrt_q.col(i);
    for (const double sign : {1.0, -1.0}) {
      const Pose propagated = retract(out.mean, Twist::from_vector(sign * col));
      const Vector6d dev = inv_retract(out.mean, propagated).to_vector();
      p_noise += w * dev * dev.transpose();
    }
  }

  out.cov = p_state + p_noise;
  symmetrize(out.cov);
  return out;
}

UpdateResult update(const TrackState& state, const ObservationBatch& meas,
                    const MeasurementModel& model, const UkfParams& params) {
  if (meas.empty()) throw EmptyCloud("update with empty observation");
  constexpr int m = UkfParams::kDim;
  const int dim = 3 * static_cast<int>(meas.size());

  const SigmaSet set = sigma_points(state, params);

  Eigen::MatrixXd h(dim, 2 * m + 1);
  for (int i = 0; i <= 2 * m; ++i)
    h.col(i) = model.predict_stacked(set.manifold_points[i], meas);

  const Eigen::VectorXd y_hat = h * set.w_m;

  Eigen::MatrixXd h_dev = h.colwise() - y_hat;
  Eigen::MatrixXd x_dev(m, 2 * m + 1);
  for (int i = 0; i <= 2 * m; ++i) x_dev.col(i) = set.tangent_points[i].to_vector();

  Eigen::MatrixXd p_yy = h_dev * set.w_c.asDiagonal() * h_dev.transpose();
  p_yy.diagonal().array() += state.r_scalar;
  const Eigen::MatrixXd p_xy = x_dev * set.w_c.asDiagonal() * h_dev.transpose();

  Eigen::LDLT<Eigen::MatrixXd> ldlt(p_yy);
  if (ldlt.info() != Eigen::Success || ldlt.rcond() < 1e-12) throw SingularInnovation();

  // K = P_xy P_yy^{-1}, solved against the symmetric factorization.
  const Eigen::MatrixXd gain = ldlt.solve(p_xy.transpose()).transpose();

  const Eigen::VectorXd innovation = meas.stacked() - y_hat;
  const Vector6d correction = gain * innovation;

  UpdateResult result;
  result.state = state;
  result.state.mean = retract(state.mean, Twist::from_vector(correction));
  result.state.cov = state.cov - gain * p_yy * gain.transpose();
  symmetrize(result.state.cov);
  clamp_psd(result.state.cov);
  result.gain_norm = gain.norm();
  return result;
}

TrackStepResult track_step(const TrackState& state, const SegmentSet& scene_segments,
                           const MeasurementModel& model,
                           const std::optional<PointCloud>& tactile,
                           const UkfParams& params, double association_gate) {
  TrackStepResult result;
  result.state = predict(state, params);

  int segment = -1;
  try {
    segment = associate_segment(result.state.mean, model.object_model(), scene_segments,
                                association_gate);
  } catch (const NoSegmentAssociated&) {
    return result;  // soft fallback: keep the predicted state
  }

  ObservationBatch obs =
      make_observation(scene_segments.segments[segment], model.cap(), model.seed());
  if (tactile && !tactile->empty())
    obs = fuse_tactile(obs, *tactile, model.cap(), model.seed());
  if (obs.empty()) return result;

  result.state = update(result.state, obs, model, params).state;
  result.associated = true;
  result.segment_index = segment;
  return result;
}

}  // namespace artreg
