#include "ihgen/metrics.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "ihgen/errors.hpp"

namespace ihgen {

namespace {

void require_counts(const EvalSample& s) {
  if (s.pred_right.size() != s.gt_right.size() ||
      s.pred_left.size() != s.gt_left.size() || s.pred_right.empty() ||
      s.pred_left.empty())
    throw ShapeError("prediction/ground-truth joint counts do not match");
}

double root_aligned_error(const std::vector<Vec3>& pred,
                          const std::vector<Vec3>& gt, int root) {
  double sum = 0.0;
  for (size_t i = 0; i < pred.size(); ++i)
    sum += ((pred[i] - pred[root]) - (gt[i] - gt[root])).norm();
  return sum;
}

Eigen::Matrix3Xd to_matrix(const std::vector<Vec3>& pts) {
  Eigen::Matrix3Xd m(3, pts.size());
  for (size_t i = 0; i < pts.size(); ++i) m.col(i) = pts[i];
  return m;
}

double procrustes_error(const std::vector<Vec3>& pred,
                        const std::vector<Vec3>& gt, bool with_scale) {
  if (pred.size() < 3) throw ShapeError("need at least 3 joints per hand");
  const Eigen::Matrix3Xd src = to_matrix(pred);
  const Eigen::Matrix3Xd dst = to_matrix(gt);

  // degenerate (collinear) configurations have a rank-deficient spread
  const Eigen::Matrix3Xd centered =
      src.colwise() - src.rowwise().mean();
  Eigen::JacobiSVD<Eigen::Matrix3Xd> svd(centered);
  if (svd.singularValues()[1] < 1e-9 * (1.0 + svd.singularValues()[0]))
    throw ShapeError("degenerate alignment: joints are collinear");

  const Eigen::Matrix4d transform = Eigen::umeyama(src, dst, with_scale);
  double sum = 0.0;
  for (size_t i = 0; i < pred.size(); ++i) {
    const Vec3 aligned =
        transform.topLeftCorner<3, 3>() * pred[i] + transform.topRightCorner<3, 1>();
    sum += (aligned - gt[i]).norm();
  }
  return sum;
}

std::vector<Vec3> rescale_bones(const std::vector<Vec3>& pred,
                                const std::vector<Vec3>& gt) {
  const auto& parents = keypoint_parents();
  std::vector<Vec3> out(pred.size());
  for (size_t i = 0; i < pred.size(); ++i) {
    const int p = parents[i];
    if (p < 0) {
      out[i] = pred[i];
      continue;
    }
    const Vec3 bone = pred[i] - pred[p];
    const double pred_len = bone.norm();
    if (pred_len < 1e-12)
      throw ShapeError("degenerate zero-length predicted bone");
    const double gt_len = (gt[i] - gt[p]).norm();
    out[i] = out[p] + bone * (gt_len / pred_len);
  }
  return out;
}

}  // namespace

const std::array<int, kNumKeypoints>& keypoint_parents() {
  static const std::array<int, kNumKeypoints> parents = [] {
    std::array<int, kNumKeypoints> p{};
    p[0] = -1;
    for (int f = 0; f < kNumFingers; ++f) {
      p[joint_index(f, 0)] = 0;
      p[joint_index(f, 1)] = joint_index(f, 0);
      p[joint_index(f, 2)] = joint_index(f, 1);
      p[kNumJoints + f] = joint_index(f, 2);  // fingertip
    }
    return p;
  }();
  return parents;
}

double mpjpe(const EvalSample& sample) {
  require_counts(sample);
  const int root = root_joint_index(sample.root);
  const double sum = root_aligned_error(sample.pred_right, sample.gt_right, root) +
                     root_aligned_error(sample.pred_left, sample.gt_left, root);
  return sum / static_cast<double>(sample.pred_right.size() +
                                   sample.pred_left.size());
}

double pampjpe(const EvalSample& sample, bool with_scale) {
  require_counts(sample);
  const double sum = procrustes_error(sample.pred_right, sample.gt_right, with_scale) +
                     procrustes_error(sample.pred_left, sample.gt_left, with_scale);
  return sum / static_cast<double>(sample.pred_right.size() +
                                   sample.pred_left.size());
}

double smpjpe(const EvalSample& sample) {
  require_counts(sample);
  if (sample.pred_right.size() != kNumKeypoints ||
      sample.pred_left.size() != kNumKeypoints)
    throw ShapeError("bone rescaling requires the 21-keypoint convention");
  EvalSample rescaled = sample;
  rescaled.pred_right = rescale_bones(sample.pred_right, sample.gt_right);
  rescaled.pred_left = rescale_bones(sample.pred_left, sample.gt_left);
  return mpjpe(rescaled);
}

double mrrpe(const EvalSample& sample) {
  require_counts(sample);
  const int root = root_joint_index(sample.root);
  const Vec3 rel_pred = sample.pred_left[root] - sample.pred_right[root];
  const Vec3 rel_gt = sample.gt_left[root] - sample.gt_right[root];
  return (rel_pred - rel_gt).norm();
}

std::optional<double> cdev(const EvalSample& sample,
                           double contact_threshold_mm) {
  if (!sample.has_meshes())
    throw ShapeError("contact deviation requires prediction and GT meshes");
  if (sample.pred_mesh_right.size() != sample.gt_mesh_right.size() ||
      sample.pred_mesh_left.size() != sample.gt_mesh_left.size())
    throw ShapeError("mesh vertex counts do not match");

  double sum = 0.0;
  long count = 0;
  const double thr2 = contact_threshold_mm * contact_threshold_mm;
  for (size_t i = 0; i < sample.gt_mesh_right.size(); ++i)
    for (size_t j = 0; j < sample.gt_mesh_left.size(); ++j) {
      if ((sample.gt_mesh_right[i] - sample.gt_mesh_left[j]).squaredNorm() > thr2)
        continue;
      sum += (sample.pred_mesh_right[i] - sample.pred_mesh_left[j]).norm();
      ++count;
    }
  if (count == 0) return std::nullopt;
  return sum / static_cast<double>(count);
}

MetricsReport evaluate_batch(const std::vector<EvalSample>& samples,
                             double contact_threshold_mm) {
  MetricsReport report;
  report.sample_count = static_cast<int>(samples.size());
  if (samples.empty()) return report;

  double cdev_sum = 0.0;
  int cdev_count = 0;
  for (const EvalSample& s : samples) {
    report.mpjpe_mm += mpjpe(s);
    report.pampjpe_mm += pampjpe(s);
    report.smpjpe_mm += smpjpe(s);
    report.mrrpe_mm += mrrpe(s);
    if (s.has_meshes()) {
      if (const auto d = cdev(s, contact_threshold_mm)) {
        cdev_sum += *d;
        ++cdev_count;
      }
    }
  }
  const double n = static_cast<double>(samples.size());
  report.mpjpe_mm /= n;
  report.pampjpe_mm /= n;
  report.smpjpe_mm /= n;
  report.mrrpe_mm /= n;
  if (cdev_count > 0) report.cdev_mm = cdev_sum / cdev_count;
  return report;
}

}  // namespace ihgen
