#include "ihgen/anchors.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <numbers>
#include <numeric>

#include <nlohmann/json.hpp>

#include "ihgen/errors.hpp"

namespace ihgen {

namespace {

double point_aabb_distance(const Vec3& p, const Aabb& box) {
  const Vec3 d = (box.min - p).cwiseMax(0.0).cwiseMax(p - box.max);
  return d.norm();
}

// hop-limited BFS over the vertex adjacency
void collect_neighborhood(const std::vector<std::vector<int>>& adj, int start,
                          int max_hops, std::vector<int>& out) {
  out.clear();
  std::deque<std::pair<int, int>> queue{{start, 0}};
  std::vector<int> seen{start};
  while (!queue.empty()) {
    auto [v, d] = queue.front();
    queue.pop_front();
    out.push_back(v);
    if (d == max_hops) continue;
    for (int n : adj[v])
      if (std::find(seen.begin(), seen.end(), n) == seen.end()) {
        seen.push_back(n);
        queue.emplace_back(n, d + 1);
      }
  }
}

}  // namespace

double spring_stiffness(double rest_distance, double scale) {
  if (rest_distance > scale) return 0.0;
  return 0.5 * std::cos(std::numbers::pi / scale * rest_distance) + 0.5;
}

AnchorSet select_anchors(const HandModel& model, const HandModel& other,
                         const std::vector<PosePair>& corpus, int count,
                         double contact_threshold, int hop_exclusion) {
  const int nverts = model.vertex_count();
  std::vector<int> contact_count(nverts, 0);

  for (const PosePair& pair : corpus) {
    const HandPose& own_pose =
        model.side() == Side::kRight ? pair.right : pair.left;
    const HandPose& other_pose =
        model.side() == Side::kRight ? pair.left : pair.right;
    const auto own_verts = skin_vertices(model, forward_kinematics(model, own_pose));
    const auto other_verts =
        skin_vertices(other, forward_kinematics(other, other_pose));

    const auto& other_mesh = other.canonical_mesh();
    std::vector<Aabb> part_boxes(other_mesh.part_count());
    for (int part = 0; part < other_mesh.part_count(); ++part) {
      for (int v = other_mesh.vert_ranges[part].first;
           v < other_mesh.vert_ranges[part].second; ++v)
        part_boxes[part].expand(other_verts[v]);
    }

    for (int v = 0; v < nverts; ++v) {
      for (int part = 0; part < other_mesh.part_count(); ++part) {
        if (point_aabb_distance(own_verts[v], part_boxes[part]) >
            contact_threshold)
          continue;
        const double d = point_mesh_distance(
            own_verts[v], other_verts, other_mesh.faces,
            other_mesh.face_ranges[part].first,
            other_mesh.face_ranges[part].second);
        if (d < contact_threshold) {
          ++contact_count[v];
          break;
        }
      }
    }
  }

  std::vector<int> order(nverts);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return contact_count[a] > contact_count[b];
  });

  const auto& adj = model.vertex_adjacency();
  std::vector<char> excluded(nverts, 0);
  std::vector<int> hood;
  AnchorSet set;
  set.side = model.side();
  for (int v : order) {
    if (set.size() == count) break;
    if (contact_count[v] == 0) break;  // only contacted vertices are eligible
    if (excluded[v]) continue;
    set.vertex_indices.push_back(v);
    collect_neighborhood(adj, v, hop_exclusion, hood);
    for (int n : hood) excluded[n] = 1;
  }
  if (set.size() < count)
    throw InsufficientCorpusError(
        "contact corpus yields only " + std::to_string(set.size()) +
        " anchors, need " + std::to_string(count));

  // reference face per anchor: first incident face
  const auto& faces = model.faces();
  set.reference_faces.resize(set.size(), -1);
  set.canonical_normals.resize(set.size());
  for (int a = 0; a < set.size(); ++a) {
    const int v = set.vertex_indices[a];
    for (int f = 0; f < static_cast<int>(faces.size()); ++f)
      if (faces[f][0] == v || faces[f][1] == v || faces[f][2] == v) {
        set.reference_faces[a] = f;
        break;
      }
    const Face& fc = faces[set.reference_faces[a]];
    set.canonical_normals[a] =
        triangle_normal(model.vertices_canonical()[fc[0]],
                        model.vertices_canonical()[fc[1]],
                        model.vertices_canonical()[fc[2]]);
  }
  return set;
}

std::vector<AnchorPair> build_anchor_pairs(
    const AnchorSet& right, const std::vector<Vec3>& right_verts,
    const std::vector<Face>& right_faces, const AnchorSet& left,
    const std::vector<Vec3>& left_verts, const std::vector<Face>& left_faces,
    double scale) {
  auto posed_normal = [](const AnchorSet& set, int a,
                         const std::vector<Vec3>& verts,
                         const std::vector<Face>& faces) {
    const Face& fc = faces[set.reference_faces[a]];
    return triangle_normal(verts[fc[0]], verts[fc[1]], verts[fc[2]]);
  };

  std::vector<AnchorPair> pairs;
  for (int i = 0; i < right.size(); ++i) {
    const Vec3& pr = right_verts[right.vertex_indices[i]];
    int best = -1;
    double best_d2 = std::numeric_limits<double>::infinity();
    for (int j = 0; j < left.size(); ++j) {
      const double d2 = (pr - left_verts[left.vertex_indices[j]]).squaredNorm();
      if (d2 < best_d2) {
        best_d2 = d2;
        best = j;
      }
    }
    if (best < 0) continue;
    const double dist = std::sqrt(best_d2);
    if (dist > scale) continue;
    const Vec3 nr = posed_normal(right, i, right_verts, right_faces);
    const Vec3 nl = posed_normal(left, best, left_verts, left_faces);
    if (nr.dot(nl) >= 0.0) continue;
    pairs.push_back({i, best, dist, spring_stiffness(dist, scale)});
  }
  return pairs;
}

void save_anchors(const std::string& path, const AnchorSet& right,
                  const AnchorSet& left) {
  nlohmann::json j;
  j["schema"] = "ihgen-anchors/1";
  auto dump = [](const AnchorSet& s) {
    nlohmann::json out;
    out["side"] = side_name(s.side);
    out["vertices"] = s.vertex_indices;
    out["faces"] = s.reference_faces;
    return out;
  };
  j["right"] = dump(right);
  j["left"] = dump(left);
  std::ofstream out(path);
  if (!out) throw IoError("cannot write anchors file: " + path);
  out << j.dump(2) << "\n";
}

std::pair<AnchorSet, AnchorSet> load_anchors(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open anchors file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw IoError("malformed anchors file: " + std::string(e.what()));
  }
  if (j.value("schema", "") != "ihgen-anchors/1")
    throw IoError("unsupported anchors schema in " + path);
  auto parse = [&](const nlohmann::json& node, Side side) {
    AnchorSet s;
    s.side = side;
    s.vertex_indices = node.at("vertices").get<std::vector<int>>();
    s.reference_faces = node.at("faces").get<std::vector<int>>();
    s.canonical_normals.resize(s.vertex_indices.size(), Vec3::Zero());
    return s;
  };
  return {parse(j.at("right"), Side::kRight), parse(j.at("left"), Side::kLeft)};
}

void recompute_canonical_normals(AnchorSet& set, const HandModel& model) {
  const auto& faces = model.faces();
  const auto& verts = model.vertices_canonical();
  set.canonical_normals.resize(set.vertex_indices.size());
  for (size_t a = 0; a < set.vertex_indices.size(); ++a) {
    const Face& fc = faces[set.reference_faces[a]];
    set.canonical_normals[a] =
        triangle_normal(verts[fc[0]], verts[fc[1]], verts[fc[2]]);
  }
}

}  // namespace ihgen
