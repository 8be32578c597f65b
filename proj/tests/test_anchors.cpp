#include <doctest.h>

#include <deque>
#include <filesystem>
#include <set>

#include "ihgen/anchors.hpp"
#include "ihgen/errors.hpp"
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

// augmented variants of a few built-in seeds; shared contact corpus
const std::vector<PosePair>& demo_corpus() {
  static const std::vector<PosePair> corpus = [] {
    const JointLimits limits = JointLimits::defaults();
    AugmentationConfig cfg;
    cfg.count = 12;
    const auto seeds = builtin_seed_pairs(right_model(), left_model());
    std::vector<PosePair> out;
    RngStream master(424242);
    for (size_t s = 0; s < seeds.size(); ++s) {
      RngStream rng = master.split(s);
      for (const auto& p : augment_pose(seeds[s], cfg, limits, rng))
        out.push_back(p);
    }
    return out;
  }();
  return corpus;
}

int hop_distance(const HandModel& m, int a, int b, int cap) {
  const auto& adj = m.vertex_adjacency();
  std::deque<std::pair<int, int>> queue{{a, 0}};
  std::vector<int> seen{a};
  while (!queue.empty()) {
    auto [v, d] = queue.front();
    queue.pop_front();
    if (v == b) return d;
    if (d == cap) continue;
    for (int n : adj[v])
      if (std::find(seen.begin(), seen.end(), n) == seen.end()) {
        seen.push_back(n);
        queue.emplace_back(n, d + 1);
      }
  }
  return cap + 1;
}

}  // namespace

TEST_CASE("spring stiffness follows the cosine falloff") {
  CHECK(spring_stiffness(0.0) == doctest::Approx(1.0));
  CHECK(spring_stiffness(0.01) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(spring_stiffness(0.02) == doctest::Approx(0.0));
  CHECK(spring_stiffness(0.03) == 0.0);
  // continuous at the cutoff
  CHECK(spring_stiffness(0.02 - 1e-9) < 1e-8);
}

TEST_CASE("anchor selection returns 108 spread anchors on the demo corpus") {
  const AnchorSet set =
      select_anchors(right_model(), left_model(), demo_corpus());
  CHECK(set.size() == 108);

  // distinct indices
  std::set<int> unique(set.vertex_indices.begin(), set.vertex_indices.end());
  CHECK(unique.size() == set.vertex_indices.size());

  // no two anchors within 2 mesh hops (spot-check pairs within parts; far
  // parts are disconnected anyway)
  for (int a = 0; a < set.size(); ++a)
    for (int b = a + 1; b < set.size(); ++b) {
      const int d = hop_distance(right_model(), set.vertex_indices[a],
                                 set.vertex_indices[b], 2);
      CHECK(d > 2);
    }

  // reference faces are incident to their anchors
  for (int a = 0; a < set.size(); ++a) {
    const Face& f = right_model().faces()[set.reference_faces[a]];
    const int v = set.vertex_indices[a];
    CHECK((f[0] == v || f[1] == v || f[2] == v));
  }
}

TEST_CASE("palm-only contact corpus yields palm anchors") {
  // left fist hovering over the right palm center: contacts confined to the
  // palm when the threshold is tight
  PosePair pose;
  pose.right = HandPose{};
  const auto& gestures = natural_gesture_library();
  pose.left = mirror_pose(vector_to_pose(gestures[3], Side::kRight));  // fist
  pose.left.root_rotation =
      Eigen::Quaterniond(Eigen::AngleAxisd(std::numbers::pi, Vec3::UnitY()));
  pose.left.root_translation = Vec3(0.0, 0.0, 0.065);

  const std::vector<PosePair> corpus(4, pose);
  const AnchorSet set =
      select_anchors(right_model(), left_model(), corpus, 6, 0.012);
  REQUIRE(set.size() == 6);
  const auto range = right_model().canonical_mesh().vert_ranges[0];
  for (int v : set.vertex_indices) {
    CHECK(v >= range.first);
    CHECK(v < range.second);
  }
}

TEST_CASE("too small a corpus raises the dedicated error") {
  PosePair far_apart;
  far_apart.left.root_translation = Vec3(0, 0, 1.0);
  const std::vector<PosePair> corpus(3, far_apart);
  CHECK_THROWS_AS(select_anchors(right_model(), left_model(), corpus),
                  InsufficientCorpusError);
}

TEST_CASE("pairing keeps only close opposing-normal anchor pairs") {
  // two closed tetra tents facing each other; face 0 is the base triangle
  // and carries the reference normals (+z for apex-down, -z for apex-up)
  auto make_tent = [](double z, bool apex_up) {
    PartitionedMesh m;
    m.vertices = {{0, 0, z},
                  {0.01, 0, z},
                  {0, 0.01, z},
                  {0.004, 0.004, z + (apex_up ? 0.004 : -0.004)}};
    if (apex_up)
      m.faces = {{0, 2, 1}, {0, 1, 3}, {1, 2, 3}, {2, 0, 3}};
    else
      m.faces = {{0, 1, 2}, {0, 3, 1}, {1, 3, 2}, {2, 3, 0}};
    m.vert_ranges = {{0, 4}};
    m.face_ranges = {{0, 4}};
    REQUIRE(is_closed_manifold(m.faces, 0, 4));
    Vec3 centroid = Vec3::Zero();
    for (const auto& v : m.vertices) centroid += v / 4.0;
    REQUIRE(winding_number(centroid, m.vertices, m.faces, 0, 4) ==
            doctest::Approx(1.0).epsilon(1e-6));
    return m;
  };

  const PartitionedMesh bottom = make_tent(0.0, false);

  AnchorSet right_set, left_set;
  right_set.side = Side::kRight;
  right_set.vertex_indices = {0};
  right_set.reference_faces = {0};
  left_set.side = Side::kLeft;
  left_set.vertex_indices = {0};
  left_set.reference_faces = {0};

  SUBCASE("close pair with opposing normals is kept") {
    const PartitionedMesh top = make_tent(0.005, true);
    const auto pairs =
        build_anchor_pairs(right_set, bottom.vertices, bottom.faces, left_set,
                           top.vertices, top.faces);
    REQUIRE(pairs.size() == 1);
    CHECK(pairs[0].rest_distance == doctest::Approx(0.005));
    CHECK(pairs[0].stiffness ==
          doctest::Approx(spring_stiffness(0.005)).epsilon(1e-12));
  }

  SUBCASE("same-facing normals are rejected") {
    const PartitionedMesh top = make_tent(0.005, false);
    const auto pairs =
        build_anchor_pairs(right_set, bottom.vertices, bottom.faces, left_set,
                           top.vertices, top.faces);
    CHECK(pairs.empty());
  }

  SUBCASE("pairs beyond the spring scale are dropped") {
    const PartitionedMesh top = make_tent(0.03, true);
    const auto pairs =
        build_anchor_pairs(right_set, bottom.vertices, bottom.faces, left_set,
                           top.vertices, top.faces);
    CHECK(pairs.empty());
  }
}

TEST_CASE("anchor sets round-trip through the sidecar file") {
  const AnchorSet set =
      select_anchors(right_model(), left_model(), demo_corpus());
  AnchorSet left = set;
  left.side = Side::kLeft;
  const std::string path = "/tmp/ihgen_test_anchors.json";
  save_anchors(path, set, left);
  auto [r, l] = load_anchors(path);
  CHECK(r.vertex_indices == set.vertex_indices);
  CHECK(r.reference_faces == set.reference_faces);
  CHECK(l.side == Side::kLeft);
  recompute_canonical_normals(r, right_model());
  for (int a = 0; a < r.size(); ++a)
    CHECK((r.canonical_normals[a] - set.canonical_normals[a]).norm() < 1e-12);
  std::filesystem::remove(path);
}
