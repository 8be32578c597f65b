#pragma once

#include <string>
#include <vector>

#include "ihgen/hand_model.hpp"
#include "ihgen/pose_synthesis.hpp"

namespace ihgen {

constexpr int kDefaultAnchorCount = 108;
constexpr double kSpringScale = 0.02;  // meters; the s of the spring weight

// Contact anchors of one hand: mesh vertex indices plus a reference incident
// face whose posed normal is used by the pairing test. No two anchors are
// within 2 mesh hops of each other.
struct AnchorSet {
  Side side = Side::kRight;
  std::vector<int> vertex_indices;
  std::vector<int> reference_faces;
  std::vector<Vec3> canonical_normals;

  int size() const { return static_cast<int>(vertex_indices.size()); }
};

// Cross-hand spring between anchor list entries i (right) and j (left).
// stiffness = 0.5*cos(pi/s * rest_distance) + 0.5, frozen at build time.
struct AnchorPair {
  int right_index = 0;
  int left_index = 0;
  double rest_distance = 0.0;
  double stiffness = 0.0;
};

double spring_stiffness(double rest_distance, double scale = kSpringScale);

// Ranks vertices of `model` by how often they come within contact_threshold
// of the other hand's surface across the posed corpus, then greedily picks
// `count` anchors in rank order skipping 1- and 2-hop neighbours of already
// chosen ones. Only contacted vertices are eligible; throws
// InsufficientCorpusError when the corpus cannot supply `count` picks.
AnchorSet select_anchors(const HandModel& model, const HandModel& other,
                         const std::vector<PosePair>& corpus,
                         int count = kDefaultAnchorCount,
                         double contact_threshold = kSpringScale,
                         int hop_exclusion = 2);

// For every right anchor, its nearest left anchor is a candidate pair; the
// pair is kept when the posed face normals oppose (dot < 0) and the current
// distance is at most `scale`.
std::vector<AnchorPair> build_anchor_pairs(
    const AnchorSet& right, const std::vector<Vec3>& right_verts,
    const std::vector<Face>& right_faces, const AnchorSet& left,
    const std::vector<Vec3>& left_verts, const std::vector<Face>& left_faces,
    double scale = kSpringScale);

void save_anchors(const std::string& path, const AnchorSet& right,
                  const AnchorSet& left);
std::pair<AnchorSet, AnchorSet> load_anchors(const std::string& path);

// Refills canonical_normals from the model after load_anchors.
void recompute_canonical_normals(AnchorSet& set, const HandModel& model);

}  // namespace ihgen
