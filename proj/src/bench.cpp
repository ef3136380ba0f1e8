#include "artreg/bench.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>

#include "artreg/kdtree.hpp"

namespace artreg {

double adi(const PointCloud& model, const Pose& gt, const Pose& est) {
  if (model.empty()) throw EmptyCloud("adi on empty model");
  std::vector<Eigen::Vector3d> est_points(model.size());
  for (std::size_t i = 0; i < model.size(); ++i) est_points[i] = apply(est, model.points[i]);
  KdTree tree(est_points);

  double sum = 0.0;
  for (const auto& p : model.points) sum += tree.nearest(apply(gt, p)).distance;
  return sum / static_cast<double>(model.size());
}

std::vector<double> goal_l2(const std::vector<Eigen::Vector2d>& final_xy,
                            const std::vector<Eigen::Vector2d>& target_xy) {
  if (final_xy.size() != target_xy.size()) throw PartCountMismatch();
  std::vector<double> errors(final_xy.size());
  for (std::size_t i = 0; i < final_xy.size(); ++i)
    errors[i] = (final_xy[i] - target_xy[i]).norm();
  return errors;
}

BenchAggregate aggregate(const std::vector<double>& values) {
  BenchAggregate agg;
  if (values.empty()) return agg;
  agg.mean = std::accumulate(values.begin(), values.end(), 0.0) / values.size();
  double var = 0.0;
  for (double v : values) var += (v - agg.mean) * (v - agg.mean);
  agg.stddev = std::sqrt(var / values.size());

  std::vector<double> sorted = values;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  agg.median = n % 2 == 1 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
  return agg;
}

std::vector<double> BenchReport::all_part_errors() const {
  std::vector<double> all;
  for (const auto& t : trials)
    if (!t.failed) all.insert(all.end(), t.part_adi.begin(), t.part_adi.end());
  return all;
}

namespace {

Pose perturbation(Rng& rng, double trans, double rot) {
  const Eigen::Vector3d axis = rng.unit_vector();
  const Eigen::Vector3d dir = rng.unit_vector();
  Twist xi;
  xi.omega = rot * axis;
  xi.v = trans * dir;
  return exp_se3(xi);
}

}  // namespace

BenchReport run_benchmark(const BenchOptions& options) {
  BenchReport report;
  Rng master(options.seed);

  UkfParams ukf;
  SegmentationConfig seg_cfg;
  const int observation_cap = 100;
  const double gate = 0.3;

  for (std::size_t obj_idx = 0; obj_idx < options.objects.size(); ++obj_idx) {
    const std::string& name = options.objects[obj_idx];
    for (int trial = 0; trial < options.trials_per_object; ++trial) {
      Rng rng = master.fork(obj_idx * 1000 + trial);
      BenchTrial record;
      record.object = name;
      record.trial = trial;

      const auto start = std::chrono::steady_clock::now();
      try {
        KinematicScene scene = builtin_scene(name);
        for (std::size_t j = 0; j < scene.joints.size(); ++j) {
          if (scene.joints[j].kind == JointKind::kRigid) continue;
          const double u = rng.uniform();
          const double value = scene.joints[j].limits[0] +
                               u * (scene.joints[j].limits[1] - scene.joints[j].limits[0]);
          set_joint_value(scene, static_cast<int>(j), value);
          record.joint_values.push_back(value);
        }
        const std::vector<Pose> gt = forward_kinematics(scene);

        CameraModel camera = CameraModel::angled_45();
        camera.noise_sigma = options.camera_noise_sigma;
        camera.dropout_prob = options.camera_dropout;
        camera.seed = rng.next_u64();
        const DepthSample sample = depth_sample(scene, camera);

        SegmentationConfig seg = seg_cfg;
        seg.seed = rng.next_u64();
        const SegmentSet segments = segment_scene(sample.cloud, seg);

        for (std::size_t link = 0; link < scene.parts.size(); ++link) {
          MeasurementModel model(scene.parts[link].cloud, observation_cap, rng.next_u64());
          TrackState state;
          state.mean = compose(gt[link], perturbation(rng, options.init_perturb_trans,
                                                      options.init_perturb_rot));

          for (int it = 0; it < options.max_iterations; ++it) {
            const Pose previous = state.mean;
            const auto step = track_step(state, segments, model, std::nullopt, ukf, gate);
            state = step.state;
            if (!step.associated) break;
            if (inv_retract(previous, state.mean).norm() < 1e-5) break;
          }
          record.part_adi.push_back(adi(scene.parts[link].cloud, gt[link], state.mean));
        }
      } catch (const Error&) {
        record.failed = true;
      }
      record.runtime_s =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      report.trials.push_back(std::move(record));
    }
  }

  report.overall = aggregate(report.all_part_errors());
  for (const auto& name : options.objects) {
    std::vector<double> values;
    for (const auto& t : report.trials)
      if (t.object == name && !t.failed)
        values.insert(values.end(), t.part_adi.begin(), t.part_adi.end());
    report.per_object[name] = aggregate(values);
  }
  return report;
}

}  // namespace artreg
