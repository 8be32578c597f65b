#pragma once

#include <Eigen/Dense>
#include <array>
#include <string>
#include <vector>

#include "ihgen/geometry.hpp"

namespace ihgen {

enum class Side { kRight, kLeft };

inline const char* side_name(Side s) {
  return s == Side::kRight ? "right" : "left";
}

constexpr int kNumJoints = 16;   // wrist + 3 per finger
constexpr int kNumFingers = 5;   // thumb, index, middle, ring, pinky
constexpr int kNumFingerJoints = 15;
constexpr int kNumKeypoints = 21;  // 16 joints + 5 fingertips
constexpr int kPoseDim = 45;       // 15 joints x (bend, splay, twist)
constexpr int kParamsPerHand = 48; // 45 angles + 3 root translation

// Finger order used everywhere: thumb=0, index=1, middle=2, ring=3, pinky=4.
// Joint levels within a finger: root=0, middle=1, end=2.
inline int joint_index(int finger, int level) { return 1 + finger * 3 + level; }
inline int theta_index(int finger, int level) { return finger * 3 + level; }

enum TsbAxis { kBend = 0, kSplay = 1, kTwist = 2 };

// Per-joint twist-splay-bend triad, constructed once in the canonical T-pose:
// twist along the outgoing bone, splay = palm normal orthogonalized against
// twist, bend = twist x splay. All three are unit world-space vectors.
struct JointNode {
  int parent = -1;
  Vec3 canonical_position = Vec3::Zero();
  Vec3 bone_vector = Vec3::Zero();  // offset from parent, canonical frame
  Vec3 twist_axis = Vec3::UnitY();
  Vec3 splay_axis = Vec3::UnitZ();
  Vec3 bend_axis = Vec3::UnitX();
};

struct KinematicTree {
  std::array<JointNode, kNumJoints> nodes;
};

// Articulation state of one hand. theta(j, axis) holds the TSB angles of
// finger joint j (theta_index order) in radians. Twist is identically zero
// and splay is zero on middle/end joints; clamp_pose enforces both.
struct HandPose {
  Side side = Side::kRight;
  Eigen::Matrix<double, kNumFingerJoints, 3> theta =
      Eigen::Matrix<double, kNumFingerJoints, 3>::Zero();
  Eigen::Quaterniond root_rotation = Eigen::Quaterniond::Identity();
  Vec3 root_translation = Vec3::Zero();
};

struct HandProportions {
  // Finger layout in the right-hand canonical frame: palm in the x-y plane,
  // fingers along +y, palm facing +z, thumb on +x.
  struct Finger {
    Vec3 root;            // root joint position, meters
    Vec3 direction;       // unit T-pose direction of the whole finger
    std::array<double, 3> lengths;  // proximal, middle, distal bone, meters
    std::array<double, 3> radii;    // capsule radius per segment, meters
  };
  std::array<Finger, kNumFingers> fingers;
  Vec3 palm_center;
  Vec3 palm_radii;  // ellipsoid semi-axes

  static HandProportions defaults();
};

class HandModel {
 public:
  // Procedural capsule-and-palm hand. The left hand is the exact mirror of
  // the right across the x=0 plane with identical topology and indexing.
  // Throws ConfigError for non-positive bone lengths or radii.
  static HandModel build(Side side,
                         const HandProportions& proportions =
                             HandProportions::defaults());

  Side side() const { return side_; }
  const KinematicTree& tree() const { return tree_; }
  const PartitionedMesh& canonical_mesh() const { return mesh_; }
  const std::vector<Vec3>& vertices_canonical() const { return mesh_.vertices; }
  const std::vector<Face>& faces() const { return mesh_.faces; }
  int vertex_count() const { return static_cast<int>(mesh_.vertices.size()); }
  const std::array<Vec3, kNumFingers>& fingertip_offsets() const {
    return fingertips_;
  }

  // Dense 16-wide skinning weight row per vertex; rows are non-negative and
  // sum to 1. The compact per-vertex influence list drives the hot path.
  const std::vector<std::array<double, kNumJoints>>& skin_weights() const {
    return skin_weights_;
  }
  struct Influence {
    int joint;
    double weight;
  };
  const std::vector<std::vector<Influence>>& influences() const {
    return influences_;
  }

  // Vertex-index set of each of the 16 parts (contiguous ranges in this
  // construction; exposed as ranges through canonical_mesh()).
  std::vector<int> submesh_vertices(int joint) const;

  // 1-hop adjacency of the canonical mesh.
  const std::vector<std::vector<int>>& vertex_adjacency() const;

  const HandProportions& proportions() const { return proportions_; }

 private:
  HandModel() = default;
  void finish_construction();

  Side side_ = Side::kRight;
  KinematicTree tree_;
  PartitionedMesh mesh_;
  std::array<Vec3, kNumFingers> fingertips_;
  std::vector<std::array<double, kNumJoints>> skin_weights_;
  std::vector<std::vector<Influence>> influences_;
  mutable std::vector<std::vector<int>> adjacency_;
  HandProportions proportions_;
};

// Joint world transforms under the pose: rotation = accumulated chain
// rotation including the joint's own R_b(theta_b) * R_s(theta_s), translation
// = joint world position. Twist never enters the kinematics.
std::array<RigidTransform, kNumJoints> forward_kinematics(
    const HandModel& model, const HandPose& pose);

// Linear blend skinning of the canonical vertices.
std::vector<Vec3> skin_vertices(
    const HandModel& model, const std::array<RigidTransform, kNumJoints>& t);

// 21 keypoints: the 16 joint origins followed by the 5 fingertips
// (thumb..pinky order).
std::array<Vec3, kNumKeypoints> joint_positions(
    const HandModel& model, const std::array<RigidTransform, kNumJoints>& t);

// 45-vector layout: slot (finger*3 + level)*3 + axis with axes (b, s, t);
// e.g. index-root bend lives at slot 9. Root rotation/translation excluded.
Eigen::Matrix<double, kPoseDim, 1> pose_to_vector(const HandPose& pose);
HandPose vector_to_pose(const Eigen::Matrix<double, kPoseDim, 1>& v, Side side);

// Mirror across x=0: bend angles are preserved, splay/twist negate, the root
// transform is conjugated by the reflection. fk(mirror) == mirror(fk).
HandPose mirror_pose(const HandPose& pose);

// Reverse-mode accumulation through skinning + forward kinematics.
// Maps d(loss)/d(vertex positions) to d(loss)/d(45 angles, 3 translation).
Eigen::Matrix<double, kParamsPerHand, 1> backprop_to_pose(
    const HandModel& model, const HandPose& pose,
    const std::array<RigidTransform, kNumJoints>& transforms,
    const std::vector<Vec3>& vertex_grads);

HandProportions proportions_from_json_file(const std::string& path);

}  // namespace ihgen
