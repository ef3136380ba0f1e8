#include "artreg/articulation.hpp"

#include <algorithm>

namespace artreg {

const char* to_string(Hypothesis h) {
  switch (h) {
    case Hypothesis::kUnknown: return "unknown";
    case Hypothesis::kRigid: return "rigid";
    case Hypothesis::kRevolute: return "revolute";
    case Hypothesis::kPrismatic: return "prismatic";
  }
  return "unknown";
}

const char* to_string(MotionVerdict v) {
  switch (v) {
    case MotionVerdict::kRevoluteEvidence: return "revolute_evidence";
    case MotionVerdict::kRigidOrPrismatic: return "rigid_or_prismatic";
    case MotionVerdict::kPrismaticEvidence: return "prismatic_evidence";
    case MotionVerdict::kRigidEvidence: return "rigid_evidence";
    case MotionVerdict::kInconclusive: return "inconclusive";
  }
  return "inconclusive";
}

namespace {

// Half-extent of the box along an arbitrary unit direction.
double support(const OrientedBox& box, const Eigen::Vector3d& dir) {
  double s = 0.0;
  for (int i = 0; i < 3; ++i) s += box.extents[i] * std::abs(dir.dot(box.axes[i]));
  return s;
}

Eigen::Vector3d in_plane_unit(const Eigen::Vector3d& v) {
  Eigen::Vector3d u = v;
  u.z() = 0.0;
  const double n = u.norm();
  if (n < 1e-6) throw DegenerateCloud("axis has no in-plane component");
  return u / n;
}

bool part_moved(const MotionDelta& d, const DetectionThresholds& thr) {
  return d.displacement().norm() >= thr.trans || rotation_angle(d.change()) >= thr.rot;
}

}  // namespace

ActionSpec plan_push(const PointCloud& part_cloud,
                     const std::optional<Eigen::Vector3d>& avoid_point, double zeta,
                     bool top_surface) {
  const OrientedBox box = compute_obb(part_cloud);
  if (box.extents[0] < 1e-3) throw DegenerateCloud("part too small to push");

  Eigen::Vector3d dir;
  try {
    dir = in_plane_unit(box.axes[1]);
  } catch (const DegenerateCloud&) {
    dir = in_plane_unit(box.axes[0]);  // V_y near-vertical; fall back to V_x
  }
  // Sign toward the workspace interior.
  const Eigen::Vector3d to_interior = -Eigen::Vector3d(box.center.x(), box.center.y(), 0.0);
  if (dir.dot(to_interior) < -1e-12) dir = -dir;

  const double e_d = support(box, dir);
  Eigen::Vector3d contact = box.center - dir * e_d;

  // Slide along the face toward one end, zeta short of the edge.
  const Eigen::Vector3d tangent(-dir.y(), dir.x(), 0.0);
  const double e_t = support(box, tangent);
  const double offset = std::max(e_t - zeta, 0.0);
  double sign = 1.0;
  if (avoid_point) {
    const double d_pos = (contact + offset * tangent - *avoid_point).squaredNorm();
    const double d_neg = (contact - offset * tangent - *avoid_point).squaredNorm();
    sign = d_pos >= d_neg ? 1.0 : -1.0;
  }
  contact += sign * offset * tangent;
  if (top_surface) contact.z() = box.center.z() + support(box, Eigen::Vector3d::UnitZ());

  ActionSpec action;
  action.kind = ActionKind::kPush;
  action.position = contact;
  action.direction = dir;
  action.distance = kDetectionPushDistance;
  return action;
}

std::pair<ActionSpec, ActionSpec> plan_hold_pull(const PointCloud& part1_cloud,
                                                 const PointCloud& part2_cloud,
                                                 double zeta) {
  const OrientedBox box1 = compute_obb(part1_cloud);
  const OrientedBox box2 = compute_obb(part2_cloud);
  if (box1.extents[0] < 1e-3 || box2.extents[0] < 1e-3)
    throw DegenerateCloud("part too small to grasp");

  // Pull along part 2's major axis, away from part 1.
  Eigen::Vector3d pull_dir = in_plane_unit(box2.axes[0]);
  const Eigen::Vector3d away = box2.center - box1.center;
  if (pull_dir.dot(away) < 0.0) pull_dir = -pull_dir;

  ActionSpec pull;
  pull.kind = ActionKind::kHoldPull;
  pull.direction = pull_dir;
  pull.position = box2.center + (support(box2, pull_dir) - zeta) * pull_dir;
  pull.distance = kDetectionPullDistance;

  // Hold presses along part 1's minor axis, at the edge diametrically
  // opposite the pull side.
  Eigen::Vector3d hold_dir = box1.axes[2];
  if (hold_dir.z() > 0.0) hold_dir = -hold_dir;
  ActionSpec hold;
  hold.kind = ActionKind::kHoldPull;
  hold.direction = hold_dir;
  hold.position = box1.center - (support(box1, pull_dir) - zeta) * pull_dir +
                  support(box1, Eigen::Vector3d::UnitZ()) * Eigen::Vector3d::UnitZ();
  hold.distance = 0.0;
  return {hold, pull};
}

MotionVerdict classify_motion(const std::vector<MotionDelta>& deltas,
                              const ActionSpec& action, const DetectionThresholds& thr) {
  if (deltas.size() < 2) return MotionVerdict::kInconclusive;

  if (action.kind == ActionKind::kPush) {
    const bool pushed_moved = part_moved(deltas[action.target_part], thr);
    bool others_moved = false;
    for (std::size_t i = 0; i < deltas.size(); ++i) {
      if (static_cast<int>(i) == action.target_part) continue;
      if (part_moved(deltas[i], thr)) others_moved = true;
    }

    if (pushed_moved && !others_moved) return MotionVerdict::kRevoluteEvidence;
    if (pushed_moved && others_moved) {
      // Both moved: rigid or prismatic if the relative pose survived.
      bool relative_preserved = true;
      const int a = action.target_part;
      for (std::size_t i = 0; i < deltas.size(); ++i) {
        if (static_cast<int>(i) == a) continue;
        const Pose rel_before = compose(inverse(deltas[a].before), deltas[i].before);
        const Pose rel_after = compose(inverse(deltas[a].after), deltas[i].after);
        const Pose change = compose(rel_after, inverse(rel_before));
        if (change.translation.norm() >= thr.trans || rotation_angle(change) >= thr.rot)
          relative_preserved = false;
      }
      if (relative_preserved) return MotionVerdict::kRigidOrPrismatic;
    }
    return MotionVerdict::kInconclusive;
  }

  // Hold-pull: look at relative displacement along the pull axis.
  const int pulled = action.target_part;
  const int held = pulled == 0 ? 1 : 0;
  const Eigen::Vector3d rel =
      deltas[pulled].displacement() - deltas[held].displacement();
  const double along = std::abs(rel.dot(action.direction));
  return along >= thr.trans ? MotionVerdict::kPrismaticEvidence
                            : MotionVerdict::kRigidEvidence;
}

namespace {

Hypothesis leading_hypothesis(const KinematicBelief& b) {
  // Hold-pull verdicts settle rigid-vs-prismatic; push ambiguity counts for
  // neither. Ties stay unknown.
  const int rev = b.revolute_evidence;
  const int pri = b.prismatic_evidence;
  const int rig = b.rigid_evidence;
  if (rev == 0 && pri == 0 && rig == 0) return Hypothesis::kUnknown;
  if (pri > rig && pri >= rev) return Hypothesis::kPrismatic;
  if (rig > pri && rig >= rev) return Hypothesis::kRigid;
  if (rev > pri && rev > rig) return Hypothesis::kRevolute;
  return Hypothesis::kUnknown;
}

}  // namespace

DetectionResult detect(TrackedWorld& world, int max_actions, const DetectionThresholds& thr) {
  const int n = world.object_count();
  KinematicBelief belief;

  enum class Phase { kPush, kHoldPull };
  Phase phase = Phase::kPush;
  int next_push = 0;
  int consecutive_ambiguous = 0;

  for (int k = 0; k < max_actions; ++k) {
    std::vector<MotionDelta> deltas(n);
    for (int i = 0; i < n; ++i) {
      deltas[i].before = world.estimated_pose(i);
      deltas[i].reference = centroid(world.model(i));
    }

    ActionRecord record;
    if (phase == Phase::kPush || n < 2) {
      std::optional<Eigen::Vector3d> avoid;
      if (n >= 2) {
        const int other = (next_push + 1) % n;
        avoid = centroid(world.estimated_cloud(other));
      }
      ActionSpec push = plan_push(world.estimated_cloud(next_push), avoid, thr.zeta,
                                  /*top_surface=*/n == 1);
      push.target_part = next_push;
      record.action = push;
      world.execute_push(push);
      next_push = n > 0 ? (next_push + 1) % n : 0;
    } else {
      auto [hold, pull] = plan_hold_pull(world.estimated_cloud(0), world.estimated_cloud(1));
      hold.target_part = 0;
      pull.target_part = 1;
      record.action = pull;
      world.execute_hold_pull(hold, pull);
    }

    for (int i = 0; i < n; ++i) deltas[i].after = world.estimated_pose(i);
    record.deltas = deltas;

    if (n == 1) {
      // A lone segment that follows the commanded push is a single rigid
      // body; there is no counterpart whose relative motion could expose a
      // joint.
      record.verdict = deltas[0].displacement().norm() >= thr.trans
                           ? MotionVerdict::kRigidEvidence
                           : MotionVerdict::kInconclusive;
    } else {
      record.verdict = classify_motion(deltas, record.action, thr);
    }

    switch (record.verdict) {
      case MotionVerdict::kRevoluteEvidence: ++belief.revolute_evidence; break;
      case MotionVerdict::kPrismaticEvidence: ++belief.prismatic_evidence; break;
      case MotionVerdict::kRigidEvidence: ++belief.rigid_evidence; break;
      case MotionVerdict::kRigidOrPrismatic: ++belief.ambiguous_count; break;
      case MotionVerdict::kInconclusive: break;
    }

    const Hypothesis updated = leading_hypothesis(belief);
    if (updated == Hypothesis::kUnknown) {
      belief.consecutive_consistent = 0;
    } else if (updated == belief.hypothesis) {
      ++belief.consecutive_consistent;
    } else {
      belief.consecutive_consistent = 1;
    }
    belief.hypothesis = updated;
    record.hypothesis_after = updated;
    belief.action_log.push_back(std::move(record));

    if (belief.consecutive_consistent >= 3)
      return {belief.hypothesis, belief};

    if (belief.action_log.back().verdict == MotionVerdict::kRigidOrPrismatic) {
      ++consecutive_ambiguous;
    } else {
      consecutive_ambiguous = 0;
    }
    if (phase == Phase::kPush && n >= 2 && consecutive_ambiguous >= 2)
      phase = Phase::kHoldPull;
  }
  throw BudgetExhausted(belief);
}

}  // namespace artreg
