#include <doctest.h>

#include <numbers>

#include "ihgen/optimizer.hpp"
#include "ihgen/pose_io.hpp"
#include "ihgen/pose_library.hpp"
#include "test_support.hpp"

using namespace ihgen;

namespace {

const HandModel& right_model() {
  static const HandModel m = HandModel::build(Side::kRight);
  return m;
}
const HandModel& left_model() {
  static const HandModel m = HandModel::build(Side::kLeft);
  return m;
}

const std::pair<AnchorSet, AnchorSet>& demo_anchors() {
  static const auto anchors = [] {
    const JointLimits limits = JointLimits::defaults();
    AugmentationConfig cfg;
    cfg.count = 10;
    const auto seeds = builtin_seed_pairs(right_model(), left_model());
    std::vector<PosePair> corpus;
    RngStream master(777);
    for (size_t s = 0; s < seeds.size(); ++s) {
      RngStream rng = master.split(s);
      for (const auto& p : augment_pose(seeds[s], cfg, limits, rng))
        corpus.push_back(p);
    }
    return std::make_pair(
        select_anchors(right_model(), left_model(), corpus),
        select_anchors(left_model(), right_model(), corpus));
  }();
  return anchors;
}

Schedule fast_schedule() {
  Schedule s;
  s.total_iters = 60;
  s.ramp_end = 40;
  s.rebuild_every = 20;
  s.sdf_resolution = 12;
  s.sdf_padding = 3;
  return s;
}

PosePair distant_pair() {
  PosePair pair;
  pair.left.side = Side::kLeft;
  pair.left.root_translation = Vec3(0, 0, 0.5);
  return pair;
}

}  // namespace

TEST_CASE("schedule ramps the weights linearly until ramp_end") {
  Schedule s;
  const LossWeights w0 = s.weights_at(0);
  CHECK(w0.attraction == s.w1_start);
  CHECK(w0.penetration == s.w4_start);
  const LossWeights mid = s.weights_at(s.ramp_end / 2);
  CHECK(mid.attraction > w0.attraction);
  CHECK(mid.penetration < w0.penetration);
  const LossWeights end = s.weights_at(s.ramp_end);
  CHECK(end.attraction == doctest::Approx(s.w1_end));
  CHECK(end.penetration == doctest::Approx(s.w4_end));
  const LossWeights after = s.weights_at(s.total_iters - 1);
  CHECK(after.attraction == doctest::Approx(s.w1_end));
  CHECK(after.anatomic == s.w2);
  CHECK(after.adversarial == s.w3);
}

TEST_CASE("zero-loss state is a fixed point of the loop") {
  const auto& [ar, al] = demo_anchors();
  Schedule s = fast_schedule();
  s.w3 = 0.0;  // no discriminator term; distant in-range T-poses cost zero
  const PosePair initial = distant_pair();
  const OptimizeResult res =
      optimize_pair(initial, right_model(), left_model(), ar, al, nullptr, s,
                    JointLimits::defaults());
  CHECK((pose_to_vector(res.pair.right) - pose_to_vector(initial.right))
            .norm() < 1e-9);
  CHECK((pose_to_vector(res.pair.left) - pose_to_vector(initial.left)).norm() <
        1e-9);
  CHECK((res.pair.left.root_translation - initial.left.root_translation)
            .norm() < 1e-9);
  CHECK(res.trace.front().terms.total == 0.0);
  CHECK(res.trace.back().terms.total == 0.0);
}

TEST_CASE("penetration-only weights resolve a deep overlap") {
  const auto& [ar, al] = demo_anchors();
  Schedule s;
  s.total_iters = 120;
  s.ramp_end = 80;
  s.sdf_resolution = 14;
  s.w1_start = s.w1_end = 0.0;
  s.w2 = 0.0;
  s.w3 = 0.0;
  s.w4_start = s.w4_end = 1.0;

  PosePair pair;
  pair.left.side = Side::kLeft;
  pair.left.root_rotation =
      Eigen::Quaterniond(Eigen::AngleAxisd(std::numbers::pi, Vec3::UnitY()));
  pair.left.root_translation = Vec3(0, 0, 0.012);  // palms deeply overlapped

  const OptimizeResult res = optimize_pair(
      pair, right_model(), left_model(), ar, al, nullptr, s, JointLimits::defaults());
  const double initial_lp = res.trace.front().terms.penetration;
  const double final_lp = res.trace.back().terms.penetration;
  REQUIRE(initial_lp > 0.0);
  CHECK(final_lp < 0.05 * initial_lp);
}

TEST_CASE("a single forced palm spring collapses the gap") {
  const auto& [ar, al] = demo_anchors();
  Schedule s;
  s.total_iters = 215;
  s.ramp_end = 165;
  s.sdf_resolution = 12;
  s.w1_start = s.w1_end = 1.0;
  s.w2 = 0.0;
  s.w3 = 0.0;
  s.w4_start = s.w4_end = 0.0;

  // pick anchors on the palm part so the spring pulls on translations only
  const auto palm_range = right_model().canonical_mesh().vert_ranges[0];
  int right_anchor = -1, left_anchor = -1;
  for (int a = 0; a < ar.size(); ++a)
    if (ar.vertex_indices[a] >= palm_range.first &&
        ar.vertex_indices[a] < palm_range.second) {
      right_anchor = a;
      break;
    }
  for (int a = 0; a < al.size(); ++a)
    if (al.vertex_indices[a] >= palm_range.first &&
        al.vertex_indices[a] < palm_range.second) {
      left_anchor = a;
      break;
    }
  REQUIRE(right_anchor >= 0);
  REQUIRE(left_anchor >= 0);
  const std::vector<AnchorPair> forced = {{right_anchor, left_anchor, 0.3, 1.0}};

  PosePair pair;
  pair.left.side = Side::kLeft;
  pair.left.root_translation = Vec3(0, 0, 0.3);

  const OptimizeResult res =
      optimize_pair(pair, right_model(), left_model(), ar, al, nullptr, s,
                    JointLimits::defaults(), &forced);

  const auto vr = skin_vertices(right_model(),
                                forward_kinematics(right_model(), res.pair.right));
  const auto vl =
      skin_vertices(left_model(), forward_kinematics(left_model(), res.pair.left));
  const double dist = (vr[ar.vertex_indices[right_anchor]] -
                       vl[al.vertex_indices[left_anchor]])
                          .norm();
  CHECK(dist < 1e-3);
}

TEST_CASE("plateau halves the learning rate") {
  const auto& [ar, al] = demo_anchors();
  Schedule s = fast_schedule();
  s.total_iters = 30;
  s.ramp_end = 20;
  s.plateau_patience = 5;
  s.w1_start = s.w1_end = 0.0;
  s.w2 = 0.0;
  s.w3 = 0.0;
  s.w4_start = s.w4_end = 0.0;  // constant zero loss never improves
  const OptimizeResult res =
      optimize_pair(distant_pair(), right_model(), left_model(), ar, al,
                    nullptr, s, JointLimits::defaults());
  CHECK(res.trace.front().learning_rate == s.initial_lr);
  CHECK(res.trace.back().learning_rate < s.initial_lr);
}

TEST_CASE("validity filter verdicts") {
  const JointLimits limits = JointLimits::defaults();

  SUBCASE("distant T-pose hands pass") {
    const FilterReport report = validity_filter(
        distant_pair(), right_model(), left_model(), limits, 0.002);
    CHECK(report.pass);
    CHECK(report.max_penetration_depth == 0.0);
  }

  SUBCASE("joint limit violation fails with a diagnostic") {
    PosePair pair = distant_pair();
    pair.right.theta(theta_index(0, 2), kBend) =
        120.0 * std::numbers::pi / 180.0;  // thumb end max is 100 deg
    const FilterReport report =
        validity_filter(pair, right_model(), left_model(), limits, 0.002);
    CHECK(!report.pass);
    REQUIRE(report.right_violations.size() == 1);
    CHECK(report.right_violations[0].finger == 0);
    CHECK(report.right_violations[0].level == 2);
    REQUIRE(!report.diagnostics.empty());
  }

  SUBCASE("overlapping palms fail on penetration depth") {
    PosePair pair;
    pair.left.side = Side::kLeft;
    pair.left.root_rotation =
        Eigen::Quaterniond(Eigen::AngleAxisd(std::numbers::pi, Vec3::UnitY()));
    pair.left.root_translation = Vec3(0, 0, 0.020);
    const FilterReport report =
        validity_filter(pair, right_model(), left_model(), limits, 0.002);
    CHECK(!report.pass);
    CHECK(report.max_penetration_depth > 0.002);
  }
}

TEST_CASE("batch runs are deterministic and honor empty input") {
  const auto& [ar, al] = demo_anchors();
  const JointLimits limits = JointLimits::defaults();
  Schedule s = fast_schedule();
  AugmentationConfig aug;
  aug.count = 2;

  SUBCASE("zero seeds produce an empty result without a yield") {
    const BatchResult res =
        run_batch({}, aug, s, limits, right_model(), left_model(), ar, al,
                  nullptr, 0.002, 1, 2);
    CHECK(res.library.empty());
    CHECK(!res.stats.yield.has_value());
  }

  SUBCASE("identical seeds give byte-identical libraries") {
    const auto seeds = expand_seed_pairs(
        builtin_seed_pairs(right_model(), left_model()), 2);
    const BatchResult a = run_batch(seeds, aug, s, limits, right_model(),
                                    left_model(), ar, al, nullptr, 0.002, 42, 2);
    const BatchResult b = run_batch(seeds, aug, s, limits, right_model(),
                                    left_model(), ar, al, nullptr, 0.002, 42, 1);
    REQUIRE(a.library.size() == b.library.size());
    for (size_t i = 0; i < a.library.size(); ++i) {
      CHECK(pose_pair_to_json({a.library[i].pair, a.library[i].seed_id,
                               a.library[i].aug_index})
                .dump() ==
            pose_pair_to_json({b.library[i].pair, b.library[i].seed_id,
                               b.library[i].aug_index})
                .dump());
    }
    CHECK(a.stats.candidates == 4);
  }
}
