#include "ihgen/pose_library.hpp"

#include <cmath>
#include <numbers>

#include "ihgen/errors.hpp"

namespace ihgen {

namespace {

using PoseVec = Eigen::Matrix<double, kPoseDim, 1>;

constexpr double kDeg = std::numbers::pi / 180.0;

// Per-finger articulation in degrees: root/middle/end bend plus root splay.
struct FingerCurl {
  double root_b, mid_b, end_b, splay;
};

PoseVec make_gesture(const FingerCurl& thumb, const FingerCurl& index,
                     const FingerCurl& middle, const FingerCurl& ring,
                     const FingerCurl& pinky) {
  const FingerCurl fingers[kNumFingers] = {thumb, index, middle, ring, pinky};
  PoseVec v = PoseVec::Zero();
  for (int f = 0; f < kNumFingers; ++f) {
    v[theta_index(f, 0) * 3 + kBend] = fingers[f].root_b * kDeg;
    v[theta_index(f, 1) * 3 + kBend] = fingers[f].mid_b * kDeg;
    v[theta_index(f, 2) * 3 + kBend] = fingers[f].end_b * kDeg;
    v[theta_index(f, 0) * 3 + kSplay] = fingers[f].splay * kDeg;
  }
  return v;
}

std::vector<PoseVec> base_gestures() {
  std::vector<PoseVec> g;
  // open flat hand (T-pose)
  g.push_back(make_gesture({0, 0, 0, 0}, {0, 0, 0, 0}, {0, 0, 0, 0},
                           {0, 0, 0, 0}, {0, 0, 0, 0}));
  // relaxed
  g.push_back(make_gesture({10, 10, 8, 0}, {12, 15, 10, 0}, {14, 18, 12, 0},
                           {12, 16, 10, 0}, {10, 12, 8, 0}));
  // open spread
  g.push_back(make_gesture({5, 5, 0, 20}, {0, 0, 0, -18}, {0, 0, 0, -6},
                           {0, 0, 0, 10}, {0, 0, 0, 22}));
  // fist
  g.push_back(make_gesture({30, 45, 60, -10}, {60, 85, 70, 0},
                           {65, 90, 70, 0}, {60, 88, 70, 0}, {55, 80, 65, 0}));
  // pinch (thumb-index)
  g.push_back(make_gesture({25, 40, 50, 15}, {45, 60, 40, -5},
                           {40, 60, 50, 0}, {42, 62, 48, 0}, {40, 58, 45, 0}));
  // point
  g.push_back(make_gesture({28, 40, 45, -8}, {0, 0, 0, 0}, {60, 88, 70, 0},
                           {58, 85, 68, 0}, {52, 78, 62, 0}));
  // ok sign
  g.push_back(make_gesture({22, 38, 55, 12}, {50, 70, 55, 0}, {10, 8, 5, -8},
                           {8, 6, 4, 5}, {5, 5, 4, 15}));
  // peace
  g.push_back(make_gesture({30, 42, 50, -10}, {2, 0, 0, -15}, {2, 0, 0, 10},
                           {55, 82, 65, 0}, {50, 75, 60, 0}));
  // thumbs up
  g.push_back(make_gesture({-10, -5, -5, -20}, {58, 85, 68, 0},
                           {62, 88, 70, 0}, {58, 85, 68, 0}, {52, 78, 62, 0}));
  // cup
  g.push_back(make_gesture({20, 30, 25, 5}, {30, 40, 28, -4}, {32, 42, 30, 0},
                           {30, 40, 28, 4}, {28, 36, 25, 8}));
  // claw
  g.push_back(make_gesture({15, 35, 60, 0}, {18, 70, 65, 0}, {20, 72, 68, 0},
                           {18, 70, 65, 0}, {15, 65, 60, 0}));
  // flat tight (adducted)
  g.push_back(make_gesture({12, 10, 5, -15}, {0, 2, 0, 8}, {0, 2, 0, 0},
                           {0, 2, 0, -8}, {0, 2, 0, -12}));
  // three count
  g.push_back(make_gesture({30, 42, 55, -12}, {0, 0, 0, -10}, {0, 0, 0, 0},
                           {0, 0, 0, 8}, {52, 78, 62, 0}));
  // precision grip
  g.push_back(make_gesture({22, 35, 40, 10}, {32, 38, 26, -6},
                           {34, 40, 28, 0}, {32, 38, 26, 6}, {30, 35, 24, 12}));
  return g;
}

}  // namespace

const std::vector<PoseVec>& natural_gesture_library() {
  static const std::vector<PoseVec> library = [] {
    std::vector<PoseVec> all = base_gestures();
    const size_t bases = all.size();
    // blends between neighbouring gestures; componentwise convex
    // combinations stay inside the (interval) limits
    for (size_t i = 0; i < bases && all.size() < 40; ++i)
      for (double t : {0.35, 0.65}) {
        if (all.size() >= 40) break;
        const PoseVec& a = all[i];
        const PoseVec& b = all[(i + 1) % bases];
        all.push_back((1.0 - t) * a + t * b);
      }
    return all;
  }();
  return library;
}

double pair_surface_gap(const PartitionedMesh& right,
                        const PartitionedMesh& left) {
  double min_dist = std::numeric_limits<double>::infinity();
  double max_pen = 0.0;

  auto scan = [&](const PartitionedMesh& own, const PartitionedMesh& other) {
    std::vector<Aabb> boxes(other.part_count());
    for (int p = 0; p < other.part_count(); ++p)
      boxes[p] = other.part_bounds(p);
    for (const Vec3& v : own.vertices) {
      for (int p = 0; p < other.part_count(); ++p) {
        const Vec3 d =
            (boxes[p].min - v).cwiseMax(0.0).cwiseMax(v - boxes[p].max);
        if (d.norm() > min_dist) continue;
        if (boxes[p].contains(v)) {
          max_pen = std::max(
              max_pen, exact_penetration_depth(v, other.vertices, other.faces,
                                               other.face_ranges[p].first,
                                               other.face_ranges[p].second));
        }
        min_dist = std::min(
            min_dist, point_mesh_distance(v, other.vertices, other.faces,
                                          other.face_ranges[p].first,
                                          other.face_ranges[p].second));
      }
    }
  };
  scan(right, left);
  scan(left, right);
  return max_pen > 0.0 ? -max_pen : min_dist;
}

std::vector<PosePair> builtin_seed_pairs(const HandModel& right_model,
                                         const HandModel& left_model) {
  const auto& gestures = natural_gesture_library();
  auto quat = [](double angle, const Vec3& axis) {
    return Eigen::Quaterniond(Eigen::AngleAxisd(angle, axis));
  };
  const double pi = std::numbers::pi;

  struct SeedDef {
    int right_gesture;
    Eigen::Quaterniond right_rot;
    int left_gesture;
    Eigen::Quaterniond left_rot;
    Vec3 approach;  // direction the left hand is pushed out along
  };
  const std::vector<SeedDef> defs = {
      // facing palms
      {1, quat(0, Vec3::UnitY()), 1, quat(pi, Vec3::UnitY()), {0, 0, 1}},
      // curled clasp
      {9, quat(0, Vec3::UnitY()), 9, quat(pi, Vec3::UnitY()),
       Vec3(0, 0.3, 1).normalized()},
      // pointing finger into open palm
      {5, quat(0, Vec3::UnitY()), 1, quat(pi, Vec3::UnitY()),
       Vec3(0, 0.5, 1).normalized()},
      // hand resting on the back of the other
      {1, quat(0, Vec3::UnitY()), 1, quat(0, Vec3::UnitY()), {0, 0, 1}},
      // prayer
      {11, quat(-pi / 2, Vec3::UnitY()), 11, quat(pi / 2, Vec3::UnitY()),
       {-1, 0, 0}},
      // handshake-like clasp
      {9, quat(-pi / 2, Vec3::UnitY()), 9,
       quat(pi / 2, Vec3::UnitY()) * quat(pi, Vec3::UnitZ()),
       Vec3(-1, 0.6, 0).normalized()},
      // fist covered by flat hand
      {3, quat(0, Vec3::UnitY()), 1, quat(pi, Vec3::UnitY()), {0, 0, 1}},
      // knuckle to knuckle
      {3, quat(0, Vec3::UnitY()), 3, quat(pi, Vec3::UnitY()), {0, 0, -1}},
      // pinch to pinch
      {4, quat(-pi / 2, Vec3::UnitY()), 4, quat(pi / 2, Vec3::UnitY()),
       Vec3(-1, 0.3, 0).normalized()},
      // crossed cradle
      {9, quat(0, Vec3::UnitY()), 9,
       quat(pi / 2, Vec3::UnitZ()) * quat(pi, Vec3::UnitY()), {0, 0, 1}},
      // thumb-up grasped
      {8, quat(0, Vec3::UnitY()), 9, quat(pi, Vec3::UnitY()),
       Vec3(0.3, 0.3, 1).normalized()},
      // palms stacked, both turned
      {1, quat(pi, Vec3::UnitY()), 1, quat(0, Vec3::UnitY()), {0, 0, -1}},
  };

  PartitionedMesh right_mesh = right_model.canonical_mesh();
  PartitionedMesh left_mesh = left_model.canonical_mesh();

  std::vector<PosePair> seeds;
  const double target_gap = 0.004;  // meters
  for (const SeedDef& def : defs) {
    PosePair pair;
    pair.right = vector_to_pose(gestures[def.right_gesture], Side::kRight);
    pair.right.root_rotation = def.right_rot;
    // left poses share the right-hand angle convention: mirror the gesture
    pair.left = mirror_pose(vector_to_pose(gestures[def.left_gesture],
                                           Side::kRight));
    pair.left.root_rotation = def.left_rot * pair.left.root_rotation;

    right_mesh.vertices = skin_vertices(
        right_model, forward_kinematics(right_model, pair.right));

    auto gap_at = [&](double t) {
      pair.left.root_translation = t * def.approach;
      left_mesh.vertices =
          skin_vertices(left_model, forward_kinematics(left_model, pair.left));
      return pair_surface_gap(right_mesh, left_mesh);
    };

    double lo = 0.0, hi = 0.30;
    for (int it = 0; it < 18; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (gap_at(mid) < target_gap)
        lo = mid;
      else
        hi = mid;
    }
    gap_at(hi);  // leave the pair at the separated end of the bracket
    seeds.push_back(pair);
  }
  return seeds;
}

std::vector<PosePair> expand_seed_pairs(const std::vector<PosePair>& base,
                                        int count) {
  if (base.empty()) throw ConfigError("no seed pairs available");
  std::vector<PosePair> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) out.push_back(base[i % base.size()]);
  return out;
}

std::vector<TrainSample> make_natural_corpus(int count,
                                             const JointLimits& limits,
                                             RngStream& rng) {
  const auto& gestures = natural_gesture_library();
  std::vector<TrainSample> out;
  out.reserve(count);
  const double jitter = 2.5 * kDeg;
  for (int i = 0; i < count; ++i) {
    HandPose pose = vector_to_pose(
        gestures[rng.uniform_int(0, static_cast<int>(gestures.size()) - 1)],
        Side::kRight);
    for (int f = 0; f < kNumFingers; ++f)
      for (int level = 0; level < 3; ++level) {
        const int tj = theta_index(f, level);
        pose.theta(tj, kBend) += rng.normal(0.0, jitter);
        if (level == 0) pose.theta(tj, kSplay) += rng.normal(0.0, jitter);
      }
    pose = clamp_pose(pose, limits);
    out.push_back({pose_to_vector(pose), 1.0});
  }
  return out;
}

std::vector<TrainSample> make_perturbed_corpus(int count,
                                               const JointLimits& limits,
                                               const AugmentationConfig& cfg,
                                               RngStream& rng) {
  const auto& gestures = natural_gesture_library();
  std::vector<TrainSample> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) {
    const PoseVec base =
        gestures[rng.uniform_int(0, static_cast<int>(gestures.size()) - 1)];
    HandPose pose = vector_to_pose(base, Side::kRight);
    PoseVec drawn = PoseVec::Zero();
    for (int f = 0; f < kNumFingers; ++f)
      for (int level = 0; level < 3; ++level) {
        const int tj = theta_index(f, level);
        const double db = rng.uniform(cfg.bend_offset.lo, cfg.bend_offset.hi);
        drawn[tj * 3 + kBend] = db;
        pose.theta(tj, kBend) += db;
        if (level == 0) {
          const double ds =
              rng.uniform(cfg.splay_offset.lo, cfg.splay_offset.hi);
          drawn[tj * 3 + kSplay] = ds;
          pose.theta(tj, kSplay) += ds;
        }
      }
    pose = clamp_pose(pose, limits);
    // the label reflects how far the pose was pushed, not what survived
    // the clamp
    out.push_back({pose_to_vector(pose), label_probability(drawn.cwiseAbs())});
  }
  return out;
}

}  // namespace ihgen
