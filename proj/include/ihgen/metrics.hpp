#pragma once

#include <array>
#include <optional>
#include <vector>

#include "ihgen/hand_model.hpp"

namespace ihgen {

enum class RootJoint { kMiddleMcp, kWrist };

inline int root_joint_index(RootJoint r) {
  return r == RootJoint::kMiddleMcp ? joint_index(2, 0) : 0;
}

// Parent of each of the 21 keypoints (wrist = -1); tips hang off the end
// joints. Used by the bone-rescaling metric.
const std::array<int, kNumKeypoints>& keypoint_parents();

// One evaluation sample, millimeters. Meshes are optional and only needed
// for the contact-deviation metric.
struct EvalSample {
  std::vector<Vec3> pred_right;  // 21
  std::vector<Vec3> pred_left;
  std::vector<Vec3> gt_right;
  std::vector<Vec3> gt_left;
  std::vector<Vec3> pred_mesh_right;  // optional, vertex-aligned with gt
  std::vector<Vec3> pred_mesh_left;
  std::vector<Vec3> gt_mesh_right;
  std::vector<Vec3> gt_mesh_left;
  RootJoint root = RootJoint::kMiddleMcp;

  bool has_meshes() const {
    return !pred_mesh_right.empty() && !pred_mesh_left.empty() &&
           !gt_mesh_right.empty() && !gt_mesh_left.empty();
  }
};

// Root-aligned mean per-joint position error over both hands, mm.
double mpjpe(const EvalSample& sample);

// Mean joint error after the optimal per-hand similarity (rotation,
// translation, isotropic scale) alignment. with_scale=false restricts the
// fit to a rigid alignment.
double pampjpe(const EvalSample& sample, bool with_scale = true);

// Root-aligned error after rescaling every predicted bone to the ground
// truth length along the kinematic tree, directions preserved.
double smpjpe(const EvalSample& sample);

// Error of the predicted left-to-right root offset, mm.
double mrrpe(const EvalSample& sample);

// Mean distance between the predicted positions of ground-truth contact
// vertex pairs (one vertex per hand within contact_threshold_mm). Absent
// contacts yield nullopt, never zero.
std::optional<double> cdev(const EvalSample& sample,
                           double contact_threshold_mm = 3.0);

struct MetricsReport {
  double mpjpe_mm = 0.0;
  double pampjpe_mm = 0.0;
  double smpjpe_mm = 0.0;
  double mrrpe_mm = 0.0;
  std::optional<double> cdev_mm;
  int sample_count = 0;
};

// Deterministic (sample-ordered) means over a batch.
MetricsReport evaluate_batch(const std::vector<EvalSample>& samples,
                             double contact_threshold_mm = 3.0);

}  // namespace ihgen
