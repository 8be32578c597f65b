#include <doctest.h>

#include <cmath>

#include "ihgen/errors.hpp"
#include "ihgen/metrics.hpp"
#include "test_support.hpp"

using namespace ihgen;

namespace {

// quantized coordinates make translations exact in binary floating point
double quantize(double x, double quantum) {
  return std::round(x / quantum) * quantum;
}

std::vector<Vec3> random_hand_mm(RngStream& rng, int count = kNumKeypoints,
                                 double quantum = 0.0) {
  std::vector<Vec3> pts(count);
  for (auto& p : pts) {
    p = Vec3(rng.uniform(-80, 80), rng.uniform(-80, 80), rng.uniform(-80, 80));
    if (quantum > 0)
      p = Vec3(quantize(p.x(), quantum), quantize(p.y(), quantum),
               quantize(p.z(), quantum));
  }
  return pts;
}

EvalSample random_sample(RngStream& rng, double noise_mm,
                         double quantum = 0.0) {
  EvalSample s;
  s.gt_right = random_hand_mm(rng, kNumKeypoints, quantum);
  s.gt_left = random_hand_mm(rng, kNumKeypoints, quantum);
  s.pred_right = s.gt_right;
  s.pred_left = s.gt_left;
  for (auto* hand : {&s.pred_right, &s.pred_left})
    for (auto& p : *hand) {
      Vec3 n(rng.normal(0, noise_mm), rng.normal(0, noise_mm),
             rng.normal(0, noise_mm));
      if (quantum > 0)
        n = Vec3(quantize(n.x(), quantum), quantize(n.y(), quantum),
                 quantize(n.z(), quantum));
      p += n;
    }
  return s;
}

// brute-force SSE similarity alignment by iterated local random search
double brute_force_procrustes_mean_error(const std::vector<Vec3>& pred,
                                         const std::vector<Vec3>& gt) {
  RngStream rng(424243);
  Eigen::Quaterniond best_q = Eigen::Quaterniond::Identity();
  Vec3 best_t = Vec3::Zero();
  double best_s = 1.0;
  auto sse = [&](const Eigen::Quaterniond& q, const Vec3& t, double s) {
    double sum = 0;
    for (size_t i = 0; i < pred.size(); ++i)
      sum += (s * (q * pred[i]) + t - gt[i]).squaredNorm();
    return sum;
  };
  double best = sse(best_q, best_t, best_s);
  double radius = 1.0;
  for (int round = 0; round < 60; ++round) {
    bool improved = false;
    for (int trial = 0; trial < 800; ++trial) {
      const Vec3 axis =
          Vec3(rng.normal(), rng.normal(), rng.normal()).normalized();
      const Eigen::Quaterniond q =
          Eigen::Quaterniond(Eigen::AngleAxisd(radius * rng.normal(0, 0.3), axis)) *
          best_q;
      const Vec3 t = best_t + radius * Vec3(rng.normal(0, 5), rng.normal(0, 5),
                                            rng.normal(0, 5));
      const double s = best_s * std::exp(radius * rng.normal(0, 0.1));
      const double e = sse(q, t, s);
      if (e < best) {
        best = e;
        best_q = q;
        best_t = t;
        best_s = s;
        improved = true;
      }
    }
    if (!improved) radius *= 0.5;
  }
  double mean = 0;
  for (size_t i = 0; i < pred.size(); ++i)
    mean += (best_s * (best_q * pred[i]) + best_t - gt[i]).norm();
  return mean / pred.size();
}

}  // namespace

TEST_CASE("mpjpe basics") {
  RngStream rng(1);
  EvalSample s = random_sample(rng, 0.0);
  CHECK(mpjpe(s) == 0.0);

  // per-hand constant offsets vanish under root alignment
  for (auto& p : s.pred_right) p += Vec3(7, -3, 2);
  for (auto& p : s.pred_left) p += Vec3(-1, 9, 4);
  CHECK(mpjpe(s) < 1e-12);

  // one joint displaced 4.2mm among 42 joints
  EvalSample t = random_sample(rng, 0.0);
  t.pred_right[5] += Vec3(0, 0, 4.2);
  CHECK(mpjpe(t) == doctest::Approx(0.1).epsilon(1e-9));
}

TEST_CASE("mpjpe translation invariance is exact on representable inputs") {
  RngStream rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    EvalSample s = random_sample(rng, 1.0, 0x1p-10);
    const double base = mpjpe(s);
    EvalSample shifted = s;
    const Vec3 t(quantize(rng.uniform(-30, 30), 0x1p-4),
                 quantize(rng.uniform(-30, 30), 0x1p-4),
                 quantize(rng.uniform(-30, 30), 0x1p-4));
    for (auto* hand : {&shifted.pred_right, &shifted.pred_left})
      for (auto& p : *hand) p += t;
    CHECK(mpjpe(shifted) == base);
  }
}

TEST_CASE("pampjpe absorbs similarity transforms") {
  RngStream rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    EvalSample s = random_sample(rng, 0.0);
    const Eigen::Quaterniond q = test::random_rotation(rng);
    const double scale = rng.uniform(0.5, 2.0);
    const Vec3 t(rng.uniform(-50, 50), rng.uniform(-50, 50),
                 rng.uniform(-50, 50));
    for (auto* hand : {&s.pred_right, &s.pred_left})
      for (auto& p : *hand) p = scale * (q * p) + t;
    CHECK(pampjpe(s) < 1e-9);
  }
}

TEST_CASE("pampjpe never exceeds mpjpe") {
  RngStream rng(4);
  for (int trial = 0; trial < 1000; ++trial) {
    EvalSample s = random_sample(rng, rng.uniform(0.1, 10.0));
    CHECK(pampjpe(s) <= mpjpe(s) + 1e-9);
  }
}

TEST_CASE("pampjpe agrees with a brute-force alignment search on a toy") {
  // five joints per hand, wrist-rooted
  RngStream rng(5);
  EvalSample s;
  s.root = RootJoint::kWrist;
  s.gt_right = random_hand_mm(rng, 5);
  s.gt_left = random_hand_mm(rng, 5);
  s.pred_right = s.gt_right;
  s.pred_left = s.gt_left;
  const Eigen::Quaterniond q = test::random_rotation(rng);
  for (auto* hand : {&s.pred_right, &s.pred_left})
    for (auto& p : *hand)
      p = 1.3 * (q * p) + Vec3(20, -10, 5) +
          Vec3(rng.normal(0, 1), rng.normal(0, 1), rng.normal(0, 1));

  const double oracle_r =
      brute_force_procrustes_mean_error(s.pred_right, s.gt_right);
  const double oracle_l =
      brute_force_procrustes_mean_error(s.pred_left, s.gt_left);
  const double oracle = (5.0 * oracle_r + 5.0 * oracle_l) / 10.0;
  CHECK(pampjpe(s) == doctest::Approx(oracle).epsilon(5e-3));
}

TEST_CASE("constructed residual orthogonal to the alignment modes") {
  RngStream rng(6);
  std::vector<Vec3> gt = random_hand_mm(rng, 5);
  Vec3 centroid = Vec3::Zero();
  for (const auto& p : gt) centroid += p / 5.0;

  // tangent basis of the similarity group at the identity
  std::vector<Eigen::VectorXd> basis;
  for (int axis = 0; axis < 3; ++axis) {
    Eigen::VectorXd t = Eigen::VectorXd::Zero(15);
    for (int i = 0; i < 5; ++i) t[3 * i + axis] = 1.0;
    basis.push_back(t);
    Eigen::VectorXd r = Eigen::VectorXd::Zero(15);
    for (int i = 0; i < 5; ++i)
      r.segment<3>(3 * i) = Vec3::Unit(axis).cross(gt[i]);
    basis.push_back(r);
  }
  Eigen::VectorXd sc(15);
  for (int i = 0; i < 5; ++i) sc.segment<3>(3 * i) = gt[i] - centroid;
  basis.push_back(sc);

  Eigen::VectorXd v(15);
  for (int i = 0; i < 15; ++i) v[i] = rng.normal();
  for (const auto& b : basis) v -= (v.dot(b) / b.squaredNorm()) * b;
  // normalize so the mean per-joint residual is exactly 1mm
  double mean = 0;
  for (int i = 0; i < 5; ++i) mean += v.segment<3>(3 * i).norm() / 5.0;
  v /= mean;

  EvalSample s;
  s.root = RootJoint::kWrist;
  s.gt_right = gt;
  s.gt_left = gt;
  s.pred_right = gt;
  s.pred_left = gt;
  for (int i = 0; i < 5; ++i) {
    s.pred_right[i] += v.segment<3>(3 * i);
    s.pred_left[i] += v.segment<3>(3 * i);
  }
  CHECK(pampjpe(s) == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("smpjpe restores scaled skeletons") {
  RngStream rng(7);
  EvalSample s = random_sample(rng, 0.0);
  CHECK(smpjpe(s) < 1e-9);

  EvalSample scaled = random_sample(rng, 0.0);
  for (auto* hand : {&scaled.pred_right, &scaled.pred_left})
    for (auto& p : *hand) p *= 1.37;
  CHECK(smpjpe(scaled) < 1e-9);
}

TEST_CASE("smpjpe equals mpjpe when only directions are wrong") {
  RngStream rng(8);
  EvalSample s = random_sample(rng, 0.0);
  // rotate the index end bone (joint 6 under parent 5) by 90 degrees,
  // preserving its length
  const auto& parents = keypoint_parents();
  const int child = joint_index(1, 2);
  const int parent = parents[child];
  const Vec3 bone = s.pred_right[child] - s.pred_right[parent];
  const Vec3 rotated =
      Eigen::AngleAxisd(std::numbers::pi / 2.0, Vec3::UnitZ()) * bone;
  const Vec3 delta = rotated - bone;
  // move the child and its subtree (the fingertip) rigidly
  s.pred_right[child] += delta;
  s.pred_right[kNumJoints + 1] += delta;
  CHECK(smpjpe(s) == doctest::Approx(mpjpe(s)).epsilon(1e-9));
}

TEST_CASE("smpjpe rejects zero-length predicted bones") {
  RngStream rng(9);
  EvalSample s = random_sample(rng, 0.0);
  s.pred_right[joint_index(1, 1)] = s.pred_right[joint_index(1, 0)];
  CHECK_THROWS_AS(smpjpe(s), ShapeError);
}

TEST_CASE("mrrpe measures the relative root offset") {
  RngStream rng(10);
  EvalSample s = random_sample(rng, 0.0);
  CHECK(mrrpe(s) == 0.0);

  // identical global shift of both predicted hands cancels exactly
  EvalSample shifted = random_sample(rng, 1.0, 0x1p-10);
  const double base = mrrpe(shifted);
  const Vec3 t(quantize(rng.uniform(-30, 30), 0x1p-4),
               quantize(rng.uniform(-30, 30), 0x1p-4),
               quantize(rng.uniform(-30, 30), 0x1p-4));
  for (auto* hand : {&shifted.pred_right, &shifted.pred_left})
    for (auto& p : *hand) p += t;
  CHECK(mrrpe(shifted) == base);

  EvalSample moved = random_sample(rng, 0.0);
  const int root = root_joint_index(moved.root);
  for (auto& p : moved.pred_left) p += Vec3(3, 0, 0);
  (void)root;
  CHECK(mrrpe(moved) == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("metric symmetry under swapping prediction and ground truth") {
  RngStream rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    EvalSample s = random_sample(rng, 2.0);
    EvalSample swapped = s;
    std::swap(swapped.pred_right, swapped.gt_right);
    std::swap(swapped.pred_left, swapped.gt_left);
    CHECK(mpjpe(s) == mpjpe(swapped));
    CHECK(mrrpe(s) == mrrpe(swapped));
    CHECK(std::abs(pampjpe(s, false) - pampjpe(swapped, false)) < 1e-9);
  }
}

TEST_CASE("contact deviation transfers ground-truth contacts") {
  EvalSample s;
  RngStream rng(12);
  s.gt_right = random_hand_mm(rng);
  s.gt_left = random_hand_mm(rng);
  s.pred_right = s.gt_right;
  s.pred_left = s.gt_left;

  SUBCASE("no meshes raises a shape error") {
    CHECK_THROWS_AS(cdev(s), ShapeError);
  }

  SUBCASE("single contact pair") {
    s.gt_mesh_right = {{0, 0, 0}, {50, 0, 0}};
    s.gt_mesh_left = {{0, 0, 2.0}, {-50, 0, 0}};
    s.pred_mesh_right = {{0, 0, 0}, {50, 0, 0}};
    s.pred_mesh_left = {{0, 0, 5.0}, {-50, 0, 0}};
    const auto d = cdev(s);
    REQUIRE(d.has_value());
    CHECK(*d == doctest::Approx(5.0).epsilon(1e-12));
  }

  SUBCASE("contacts present and prediction exact") {
    s.gt_mesh_right = {{0, 0, 0}};
    s.gt_mesh_left = {{0, 0, 1.0}};
    s.pred_mesh_right = s.gt_mesh_right;
    s.pred_mesh_left = s.gt_mesh_left;
    const auto d = cdev(s);
    REQUIRE(d.has_value());
    CHECK(*d == doctest::Approx(1.0).epsilon(1e-12));
  }

  SUBCASE("absent contacts report not-applicable") {
    s.gt_mesh_right = {{0, 0, 0}};
    s.gt_mesh_left = {{100, 0, 0}};
    s.pred_mesh_right = s.gt_mesh_right;
    s.pred_mesh_left = s.gt_mesh_left;
    CHECK(!cdev(s).has_value());
  }
}

TEST_CASE("shape and degeneracy errors") {
  RngStream rng(13);
  EvalSample s = random_sample(rng, 0.0);
  s.pred_right.pop_back();
  CHECK_THROWS_AS(mpjpe(s), ShapeError);

  EvalSample collinear;
  collinear.root = RootJoint::kWrist;
  for (int i = 0; i < 5; ++i) {
    collinear.gt_right.push_back(Vec3(i, 0, 0));
    collinear.gt_left.push_back(Vec3(i, 0, 0));
    collinear.pred_right.push_back(Vec3(i, 0, 0));
    collinear.pred_left.push_back(Vec3(i, 0, 0));
  }
  CHECK_THROWS_AS(pampjpe(collinear), ShapeError);
}
