#include "ihgen/losses.hpp"

#include <algorithm>
#include <cmath>

#include "ihgen/errors.hpp"

namespace ihgen {

namespace {

double beta_deviation(double theta, const AngleRange& r) {
  return std::max(theta - r.hi, 0.0) + std::min(theta - r.lo, 0.0);
}

// Node coverage box of the grid that build_sdf would produce for this part.
Aabb grid_extent(const Aabb& part_box, int resolution, int padding) {
  const double spacing =
      (part_box.max - part_box.min).maxCoeff() / (resolution - 1 - 2 * padding);
  const Vec3 center = 0.5 * (part_box.min + part_box.max);
  const Vec3 origin = center - Vec3::Constant(0.5 * spacing * (resolution - 1));
  return {origin, origin + Vec3::Constant(spacing * (resolution - 1))};
}

}  // namespace

std::vector<LimitViolation> check_limits(const HandPose& pose,
                                         const JointLimits& limits) {
  std::vector<LimitViolation> out;
  for (int f = 0; f < kNumFingers; ++f)
    for (int level = 0; level < 3; ++level) {
      const int tj = theta_index(f, level);
      for (int a = 0; a < 3; ++a) {
        const double beta =
            beta_deviation(pose.theta(tj, a), limits.range(f, level, a));
        if (beta != 0.0) out.push_back({f, level, a, beta});
      }
    }
  return out;
}

AnatomicResult anatomic_loss(const HandPose& pose, const JointLimits& limits) {
  AnatomicResult res;
  for (int f = 0; f < kNumFingers; ++f)
    for (int level = 0; level < 3; ++level) {
      const int tj = theta_index(f, level);
      for (int a = 0; a < 3; ++a) {
        const double beta =
            beta_deviation(pose.theta(tj, a), limits.range(f, level, a));
        res.loss += beta * beta;
        res.grad[tj * 3 + a] = 2.0 * beta;
      }
    }
  return res;
}

AttractionResult attraction_loss(const std::vector<AnchorPair>& pairs,
                                 const std::vector<Vec3>& right_anchor_pos,
                                 const std::vector<Vec3>& left_anchor_pos) {
  AttractionResult res;
  res.grad_right.assign(right_anchor_pos.size(), Vec3::Zero());
  res.grad_left.assign(left_anchor_pos.size(), Vec3::Zero());
  for (const AnchorPair& p : pairs) {
    const Vec3 d = right_anchor_pos[p.right_index] - left_anchor_pos[p.left_index];
    res.loss += 0.5 * p.stiffness * d.squaredNorm();
    res.grad_right[p.right_index] += p.stiffness * d;
    res.grad_left[p.left_index] -= p.stiffness * d;
  }
  return res;
}

PenetrationContext build_penetration_context(const PartitionedMesh& right,
                                             const PartitionedMesh& left,
                                             int resolution, int padding) {
  PenetrationContext ctx;
  ctx.resolution = resolution;
  ctx.padding = padding;
  ctx.right_grids.resize(right.part_count());
  ctx.left_grids.resize(left.part_count());

  auto build_side = [&](const PartitionedMesh& own, const PartitionedMesh& other,
                        std::vector<std::optional<SdfGrid>>& grids) {
    std::vector<Aabb> other_boxes(other.part_count());
    for (int p = 0; p < other.part_count(); ++p)
      other_boxes[p] = other.part_bounds(p);

    for (int part = 0; part < own.part_count(); ++part) {
      const Aabb extent =
          grid_extent(own.part_bounds(part), resolution, padding);
      bool needed = false;
      for (int op = 0; op < other.part_count() && !needed; ++op) {
        if (!extent.intersects(other_boxes[op])) continue;
        for (int v = other.vert_ranges[op].first;
             v < other.vert_ranges[op].second; ++v)
          if (extent.contains(other.vertices[v])) {
            needed = true;
            break;
          }
      }
      if (needed)
        grids[part] = build_sdf(own.vertices, own.faces,
                                own.face_ranges[part].first,
                                own.face_ranges[part].second, resolution,
                                padding);
    }
  };
  build_side(right, left, ctx.right_grids);
  build_side(left, right, ctx.left_grids);
  return ctx;
}

double penetration_loss_with_context(const PenetrationContext& ctx,
                                     const PartitionedMesh& right,
                                     const PartitionedMesh& left,
                                     std::vector<Vec3>* grad_right,
                                     std::vector<Vec3>* grad_left) {
  auto query_side = [](const std::vector<std::optional<SdfGrid>>& other_grids,
                       const PartitionedMesh& own, std::vector<Vec3>* grad) {
    double loss = 0.0;
    for (const auto& grid : other_grids) {
      if (!grid) continue;
      for (size_t v = 0; v < own.vertices.size(); ++v) {
        const auto [value, g] = omega_query(*grid, own.vertices[v]);
        if (value > 0.0) {
          loss += value;
          if (grad) (*grad)[v] += g;
        }
      }
    }
    return loss;
  };
  // L_p^right: right-hand vertices against the left hand's part fields,
  // and symmetrically for L_p^left.
  const double lp_right = query_side(ctx.left_grids, right, grad_right);
  const double lp_left = query_side(ctx.right_grids, left, grad_left);
  return lp_right + lp_left;
}

double penetration_loss(const PartitionedMesh& right,
                        const PartitionedMesh& left, int resolution,
                        int padding, std::vector<Vec3>* grad_right,
                        std::vector<Vec3>* grad_left) {
  const PenetrationContext ctx =
      build_penetration_context(right, left, resolution, padding);
  return penetration_loss_with_context(ctx, right, left, grad_right, grad_left);
}

TotalLossEvaluator::TotalLossEvaluator(
    const HandModel& right_model, const HandModel& left_model,
    const JointLimits& limits, const MlpParams* discriminator,
    const AnchorSet* anchors_right, const AnchorSet* anchors_left,
    LossWeights weights)
    : right_model_(right_model),
      left_model_(left_model),
      limits_(limits),
      discriminator_(discriminator),
      anchors_right_(anchors_right),
      anchors_left_(anchors_left),
      weights_(weights) {}

TotalLossResult TotalLossEvaluator::evaluate(
    const PosePair& pair, const std::vector<AnchorPair>& anchor_pairs,
    const PenetrationContext& grids) const {
  TotalLossResult res;

  const auto tr = forward_kinematics(right_model_, pair.right);
  const auto tl = forward_kinematics(left_model_, pair.left);
  PartitionedMesh right = right_model_.canonical_mesh();
  PartitionedMesh left = left_model_.canonical_mesh();
  right.vertices = skin_vertices(right_model_, tr);
  left.vertices = skin_vertices(left_model_, tl);

  std::vector<Vec3> vgrad_right(right.vertices.size(), Vec3::Zero());
  std::vector<Vec3> vgrad_left(left.vertices.size(), Vec3::Zero());

  res.terms.penetration = penetration_loss_with_context(
      grids, right, left, &vgrad_right, &vgrad_left);
  if (weights_.penetration != 1.0) {
    for (auto& g : vgrad_right) g *= weights_.penetration;
    for (auto& g : vgrad_left) g *= weights_.penetration;
  }

  if (anchors_right_ && anchors_left_ && !anchor_pairs.empty()) {
    std::vector<Vec3> apos_r(anchors_right_->size());
    std::vector<Vec3> apos_l(anchors_left_->size());
    for (int a = 0; a < anchors_right_->size(); ++a)
      apos_r[a] = right.vertices[anchors_right_->vertex_indices[a]];
    for (int a = 0; a < anchors_left_->size(); ++a)
      apos_l[a] = left.vertices[anchors_left_->vertex_indices[a]];
    AttractionResult att = attraction_loss(anchor_pairs, apos_r, apos_l);
    res.terms.attraction = att.loss;
    for (int a = 0; a < anchors_right_->size(); ++a)
      vgrad_right[anchors_right_->vertex_indices[a]] +=
          weights_.attraction * att.grad_right[a];
    for (int a = 0; a < anchors_left_->size(); ++a)
      vgrad_left[anchors_left_->vertex_indices[a]] +=
          weights_.attraction * att.grad_left[a];
  }

  res.grad_right = backprop_to_pose(right_model_, pair.right, tr, vgrad_right);
  res.grad_left = backprop_to_pose(left_model_, pair.left, tl, vgrad_left);

  const AnatomicResult ana_r = anatomic_loss(pair.right, limits_);
  const AnatomicResult ana_l = anatomic_loss(pair.left, limits_);
  res.terms.anatomic = ana_r.loss + ana_l.loss;
  res.grad_right.head<kPoseDim>() += weights_.anatomic * ana_r.grad;
  res.grad_left.head<kPoseDim>() += weights_.anatomic * ana_l.grad;

  if (discriminator_) {
    const auto [loss_r, grad_r] =
        adversarial_loss(*discriminator_, pose_to_vector(pair.right));
    // left hands are mirrored into right-hand convention; the mirror map
    // negates splay and twist slots, and so does its transpose.
    const auto [loss_l, grad_l_mirrored] = adversarial_loss(
        *discriminator_, pose_to_vector(mirror_pose(pair.left)));
    res.terms.adversarial = loss_r + loss_l;
    res.grad_right.head<kPoseDim>() += weights_.adversarial * grad_r;
    Eigen::Matrix<double, kPoseDim, 1> grad_l = grad_l_mirrored;
    for (int j = 0; j < kNumFingerJoints; ++j) {
      grad_l[j * 3 + kSplay] = -grad_l[j * 3 + kSplay];
      grad_l[j * 3 + kTwist] = -grad_l[j * 3 + kTwist];
    }
    res.grad_left.head<kPoseDim>() += weights_.adversarial * grad_l;
  }

  res.terms.total = weights_.attraction * res.terms.attraction +
                    weights_.anatomic * res.terms.anatomic +
                    weights_.adversarial * res.terms.adversarial +
                    weights_.penetration * res.terms.penetration;
  return res;
}

}  // namespace ihgen
