#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "artreg/actions.hpp"
#include "artreg/pipeline.hpp"

namespace artreg {

enum class Hypothesis { kUnknown, kRigid, kRevolute, kPrismatic };
const char* to_string(Hypothesis h);

enum class MotionVerdict {
  kRevoluteEvidence,
  kRigidOrPrismatic,
  kPrismaticEvidence,
  kRigidEvidence,
  kInconclusive
};
const char* to_string(MotionVerdict v);

// Tracked pose of one part before and after an action; `reference` is the
// body-frame point at which translation is measured (the model centroid).
struct MotionDelta {
  Pose before;
  Pose after;
  Eigen::Vector3d reference = Eigen::Vector3d::Zero();

  Eigen::Vector3d displacement() const {
    return apply(after, reference) - apply(before, reference);
  }
  Pose change() const { return compose(after, inverse(before)); }
};

struct DetectionThresholds {
  double trans = 0.01;              // m
  double rot = 5.0 * kPi / 180.0;   // rad
  double zeta = 0.01;               // m, contact offset from the box edge
};

struct ActionRecord {
  ActionSpec action;
  std::vector<MotionDelta> deltas;
  MotionVerdict verdict = MotionVerdict::kInconclusive;
  Hypothesis hypothesis_after = Hypothesis::kUnknown;
};

struct KinematicBelief {
  Hypothesis hypothesis = Hypothesis::kUnknown;
  int revolute_evidence = 0;
  int prismatic_evidence = 0;
  int rigid_evidence = 0;
  int ambiguous_count = 0;
  int consecutive_consistent = 0;
  std::vector<ActionRecord> action_log;
};

struct BudgetExhausted : Error {
  explicit BudgetExhausted(KinematicBelief b)
      : Error("action budget exhausted"), belief(std::move(b)) {}
  KinematicBelief belief;
};

// Detection push: along +/- V_y of the part's box, contacting the face near
// the V_x edge farther from `avoid_point` so the lever about any hidden
// linkage stays long. `top_surface` raises the contact to the top face for
// the single-segment probing case.
ActionSpec plan_push(const PointCloud& part_cloud,
                     const std::optional<Eigen::Vector3d>& avoid_point = std::nullopt,
                     double zeta = 0.01, bool top_surface = false);

// Bimanual plan: hold part 1 by pressing along its minor axis, grasp part 2
// at the far edge along its major axis and pull away from part 1.
std::pair<ActionSpec, ActionSpec> plan_hold_pull(const PointCloud& part1_cloud,
                                                 const PointCloud& part2_cloud,
                                                 double zeta = 0.01);

MotionVerdict classify_motion(const std::vector<MotionDelta>& deltas,
                              const ActionSpec& action, const DetectionThresholds& thr);

struct DetectionResult {
  Hypothesis hypothesis = Hypothesis::kUnknown;
  KinematicBelief belief;
};

// Greedy interactive-perception loop: pushes first, falls back to hold-pull
// when pushes stay ambiguous, terminates once the hypothesis has been stable
// for three consecutive actions. Throws BudgetExhausted (carrying the
// best-so-far belief) when max_actions runs out.
DetectionResult detect(TrackedWorld& world, int max_actions,
                       const DetectionThresholds& thr = {});

}  // namespace artreg
