#pragma once

#include <optional>
#include <vector>

#include "ihgen/anchors.hpp"
#include "ihgen/discriminator.hpp"
#include "ihgen/hand_model.hpp"
#include "ihgen/pose_synthesis.hpp"
#include "ihgen/sdf.hpp"

namespace ihgen {

// w1 attraction, w2 anatomic, w3 adversarial, w4 penetration.
struct LossWeights {
  double attraction = 1.0;
  double anatomic = 1.0;
  double adversarial = 1.0;
  double penetration = 1.0;
};

struct LimitViolation {
  int finger = 0;
  int level = 0;
  int axis = 0;
  double excess = 0.0;  // signed deviation beta from the range, radians
};

// Empty iff the anatomic loss of the pose is zero.
std::vector<LimitViolation> check_limits(const HandPose& pose,
                                         const JointLimits& limits);

// L_a = sum over joints and axes of beta(theta)^2 with
// beta = max(theta - hi, 0) + min(theta - lo, 0); gradient is 2*beta.
struct AnatomicResult {
  double loss = 0.0;
  Eigen::Matrix<double, kPoseDim, 1> grad =
      Eigen::Matrix<double, kPoseDim, 1>::Zero();
};
AnatomicResult anatomic_loss(const HandPose& pose, const JointLimits& limits);

// Sum over pairs of 1/2 * k * |a_r - a_l|^2 for the posed anchor positions.
// Gradients are accumulated per anchor-list entry.
struct AttractionResult {
  double loss = 0.0;
  std::vector<Vec3> grad_right;  // one per right anchor entry
  std::vector<Vec3> grad_left;
};
AttractionResult attraction_loss(const std::vector<AnchorPair>& pairs,
                                 const std::vector<Vec3>& right_anchor_pos,
                                 const std::vector<Vec3>& left_anchor_pos);

// Per-part SDF grids of both hands for one evaluation. Grids are only built
// for parts whose padded grid box contains vertices of the other hand; a
// missing grid is exactly equivalent to querying zero.
struct PenetrationContext {
  int resolution = 32;
  int padding = 3;
  std::vector<std::optional<SdfGrid>> right_grids;  // one slot per part
  std::vector<std::optional<SdfGrid>> left_grids;
};

PenetrationContext build_penetration_context(const PartitionedMesh& right,
                                             const PartitionedMesh& left,
                                             int resolution, int padding);

// L_p = L_p^right + L_p^left per the 16-part modified-SDF sum. The grids are
// treated as fixed; gradients flow through the queried vertex positions and
// are accumulated into the buffers when given.
double penetration_loss_with_context(const PenetrationContext& ctx,
                                     const PartitionedMesh& right,
                                     const PartitionedMesh& left,
                                     std::vector<Vec3>* grad_right = nullptr,
                                     std::vector<Vec3>* grad_left = nullptr);

// Convenience wrapper that rebuilds the grids from the posed meshes.
double penetration_loss(const PartitionedMesh& right,
                        const PartitionedMesh& left, int resolution,
                        int padding, std::vector<Vec3>* grad_right = nullptr,
                        std::vector<Vec3>* grad_left = nullptr);

struct LossTerms {
  double attraction = 0.0;   // sum of spring energies (unweighted)
  double anatomic = 0.0;     // L_a^r + L_a^l
  double adversarial = 0.0;  // L_adv^r + L_adv^l
  double penetration = 0.0;  // L_p
  double total = 0.0;
};

struct TotalLossResult {
  LossTerms terms;
  Eigen::Matrix<double, kParamsPerHand, 1> grad_right =
      Eigen::Matrix<double, kParamsPerHand, 1>::Zero();
  Eigen::Matrix<double, kParamsPerHand, 1> grad_left =
      Eigen::Matrix<double, kParamsPerHand, 1>::Zero();
};

// Assembles the four-term objective and its gradient w.r.t. the optimization
// parameters of both hands (45 TSB angles + 3 root translation each; root
// rotations are not optimization variables). Anchor pairs and SDF grids are
// passed in frozen, matching one optimization step.
class TotalLossEvaluator {
 public:
  TotalLossEvaluator(const HandModel& right_model, const HandModel& left_model,
                     const JointLimits& limits, const MlpParams* discriminator,
                     const AnchorSet* anchors_right,
                     const AnchorSet* anchors_left, LossWeights weights);

  TotalLossResult evaluate(const PosePair& pair,
                           const std::vector<AnchorPair>& anchor_pairs,
                           const PenetrationContext& grids) const;

  void set_weights(LossWeights w) { weights_ = w; }
  const LossWeights& weights() const { return weights_; }

 private:
  const HandModel& right_model_;
  const HandModel& left_model_;
  const JointLimits& limits_;
  const MlpParams* discriminator_;
  const AnchorSet* anchors_right_;
  const AnchorSet* anchors_left_;
  LossWeights weights_;
};

}  // namespace ihgen
