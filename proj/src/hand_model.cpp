#include "ihgen/hand_model.hpp"

#include <cmath>
#include <fstream>
#include <numbers>

#include <nlohmann/json.hpp>

#include "ihgen/errors.hpp"

namespace ihgen {

namespace {

constexpr int kRadialSlots = 6;
constexpr int kCapsuleRings = 12;
constexpr int kPalmSegments = 20;
constexpr int kPalmRings = 8;
constexpr double kCapLat = std::numbers::pi / 4.0;  // mid-cap ring latitude

Mat3 skew(const Vec3& v) {
  Mat3 m;
  m << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
  return m;
}

// Perpendicular ring basis around the axis u.
void ring_basis(const Vec3& u, Vec3& e1, Vec3& e2) {
  Vec3 ref = Vec3::UnitZ();
  if (std::abs(u.dot(ref)) > 0.99) ref = Vec3::UnitX();
  e1 = ref.cross(u).normalized();
  e2 = u.cross(e1);
}

void orient_outward(std::vector<Vec3>& verts, std::vector<Face>& faces,
                    int face_begin, int face_end) {
  double vol = 0.0;
  for (int f = face_begin; f < face_end; ++f)
    vol += verts[faces[f][0]].dot(verts[faces[f][1]].cross(verts[faces[f][2]]));
  if (vol < 0.0)
    for (int f = face_begin; f < face_end; ++f)
      std::swap(faces[f][1], faces[f][2]);
}

// Closed capsule from p0 to p1: two poles plus kCapsuleRings rings of
// kRadialSlots vertices (cap-mid ring, equator at p0, evenly spaced cylinder
// rings, equator at p1, cap-mid ring). kCapsuleRings >= 4.
void append_capsule(const Vec3& p0, const Vec3& p1, double radius,
                    std::vector<Vec3>& verts, std::vector<Face>& faces) {
  const Vec3 u = (p1 - p0).normalized();
  Vec3 e1, e2;
  ring_basis(u, e1, e2);

  const int base = static_cast<int>(verts.size());
  verts.push_back(p0 - radius * u);  // bottom pole

  struct Ring {
    Vec3 center;
    double radius;
  };
  const double cs = std::cos(kCapLat), sn = std::sin(kCapLat);
  std::vector<Ring> rings;
  rings.push_back({p0 - radius * sn * u, radius * cs});
  rings.push_back({p0, radius});
  const int cylinder_extra = kCapsuleRings - 4;
  for (int i = 1; i <= cylinder_extra; ++i)
    rings.push_back(
        {p0 + (p1 - p0) * (static_cast<double>(i) / (cylinder_extra + 1)),
         radius});
  rings.push_back({p1, radius});
  rings.push_back({p1 + radius * sn * u, radius * cs});

  for (const Ring& ring : rings)
    for (int k = 0; k < kRadialSlots; ++k) {
      const double phi = 2.0 * std::numbers::pi * k / kRadialSlots;
      verts.push_back(ring.center +
                      ring.radius * (std::cos(phi) * e1 + std::sin(phi) * e2));
    }
  verts.push_back(p1 + radius * u);  // top pole

  const int n_rings = static_cast<int>(rings.size());
  const int face_begin = static_cast<int>(faces.size());
  auto rv = [&](int ring, int slot) {
    return base + 1 + ring * kRadialSlots + (slot % kRadialSlots);
  };
  for (int k = 0; k < kRadialSlots; ++k)
    faces.push_back({base, rv(0, k + 1), rv(0, k)});
  for (int r = 0; r + 1 < n_rings; ++r)
    for (int k = 0; k < kRadialSlots; ++k) {
      faces.push_back({rv(r, k), rv(r, k + 1), rv(r + 1, k + 1)});
      faces.push_back({rv(r, k), rv(r + 1, k + 1), rv(r + 1, k)});
    }
  const int top = base + 1 + n_rings * kRadialSlots;
  for (int k = 0; k < kRadialSlots; ++k)
    faces.push_back({top, rv(n_rings - 1, k), rv(n_rings - 1, k + 1)});
  orient_outward(verts, faces, face_begin, static_cast<int>(faces.size()));
}

// Closed ellipsoid with poles along +y / -y (wrist-to-fingers axis) so that
// the palmar and dorsal faces are covered by ring vertices.
void append_ellipsoid(const Vec3& center, const Vec3& semi,
                      std::vector<Vec3>& verts, std::vector<Face>& faces) {
  const int base = static_cast<int>(verts.size());
  verts.push_back(center - Vec3(0, semi.y(), 0));
  for (int r = 0; r < kPalmRings; ++r) {
    const double lat =
        -std::numbers::pi / 2.0 + std::numbers::pi * (r + 1) / (kPalmRings + 1);
    for (int k = 0; k < kPalmSegments; ++k) {
      const double phi = 2.0 * std::numbers::pi * k / kPalmSegments;
      verts.push_back(center + Vec3(semi.x() * std::cos(lat) * std::cos(phi),
                                    semi.y() * std::sin(lat),
                                    semi.z() * std::cos(lat) * std::sin(phi)));
    }
  }
  verts.push_back(center + Vec3(0, semi.y(), 0));

  const int face_begin = static_cast<int>(faces.size());
  auto rv = [&](int ring, int slot) {
    return base + 1 + ring * kPalmSegments + (slot % kPalmSegments);
  };
  for (int k = 0; k < kPalmSegments; ++k)
    faces.push_back({base, rv(0, k + 1), rv(0, k)});
  for (int r = 0; r + 1 < kPalmRings; ++r)
    for (int k = 0; k < kPalmSegments; ++k) {
      faces.push_back({rv(r, k), rv(r, k + 1), rv(r + 1, k + 1)});
      faces.push_back({rv(r, k), rv(r + 1, k + 1), rv(r + 1, k)});
    }
  const int top = base + 1 + kPalmRings * kPalmSegments;
  for (int k = 0; k < kPalmSegments; ++k)
    faces.push_back({top, rv(kPalmRings - 1, k), rv(kPalmRings - 1, k + 1)});
  orient_outward(verts, faces, face_begin, static_cast<int>(faces.size()));
}

}  // namespace

HandProportions HandProportions::defaults() {
  HandProportions p;
  const Vec3 fwd = Vec3::UnitY();
  p.fingers[0] = {{0.034, 0.024, 0.0},
                  Vec3(0.82, 0.57, 0.0).normalized(),
                  {0.040, 0.032, 0.027},
                  {0.0105, 0.0095, 0.0085}};
  p.fingers[1] = {{0.030, 0.088, 0.0}, fwd, {0.045, 0.025, 0.021},
                  {0.0085, 0.0075, 0.0068}};
  p.fingers[2] = {{0.010, 0.092, 0.0}, fwd, {0.048, 0.028, 0.022},
                  {0.0088, 0.0078, 0.0070}};
  p.fingers[3] = {{-0.010, 0.088, 0.0}, fwd, {0.044, 0.026, 0.021},
                  {0.0082, 0.0072, 0.0065}};
  p.fingers[4] = {{-0.030, 0.080, 0.0}, fwd, {0.035, 0.021, 0.018},
                  {0.0070, 0.0062, 0.0056}};
  p.palm_center = Vec3(0.002, 0.047, 0.0);
  p.palm_radii = Vec3(0.046, 0.055, 0.013);
  return p;
}

HandModel HandModel::build(Side side, const HandProportions& proportions) {
  for (int f = 0; f < kNumFingers; ++f) {
    const auto& fg = proportions.fingers[f];
    for (int s = 0; s < 3; ++s) {
      if (!(fg.lengths[s] > 0.0))
        throw ConfigError("invalid proportions: non-positive bone length, finger " +
                          std::to_string(f) + " segment " + std::to_string(s));
      if (!(fg.radii[s] > 0.0))
        throw ConfigError("invalid proportions: non-positive radius, finger " +
                          std::to_string(f) + " segment " + std::to_string(s));
    }
    if (fg.direction.norm() < 1e-12)
      throw ConfigError("invalid proportions: zero finger direction");
  }
  if (!(proportions.palm_radii.minCoeff() > 0.0))
    throw ConfigError("invalid proportions: non-positive palm radius");

  // Always construct the right hand, then mirror arrays for the left; this
  // keeps vertex indexing identical between sides.
  HandModel m;
  m.side_ = side;
  m.proportions_ = proportions;

  auto& nodes = m.tree_.nodes;
  nodes[0].parent = -1;
  nodes[0].canonical_position = Vec3::Zero();  // wrist at origin by invariant
  nodes[0].bone_vector = Vec3::Zero();

  std::array<Vec3, kNumFingers> tip_points;
  for (int f = 0; f < kNumFingers; ++f) {
    const auto& fg = proportions.fingers[f];
    const Vec3 dir = fg.direction.normalized();
    Vec3 pos = fg.root;
    for (int level = 0; level < 3; ++level) {
      const int j = joint_index(f, level);
      nodes[j].parent = level == 0 ? 0 : joint_index(f, level - 1);
      nodes[j].canonical_position = pos;
      nodes[j].bone_vector =
          pos - nodes[nodes[j].parent].canonical_position;
      pos += fg.lengths[level] * dir;
    }
    tip_points[f] = pos;
  }

  // TSB triads from the canonical geometry: twist along the outgoing bone,
  // splay = palm normal made orthogonal to twist, bend = twist x splay.
  const Vec3 palm_normal = Vec3::UnitZ();
  for (int f = 0; f < kNumFingers; ++f)
    for (int level = 0; level < 3; ++level) {
      const int j = joint_index(f, level);
      const Vec3 next = level < 2
                            ? nodes[joint_index(f, level + 1)].canonical_position
                            : tip_points[f];
      JointNode& n = nodes[j];
      n.twist_axis = (next - n.canonical_position).normalized();
      n.splay_axis =
          (palm_normal - palm_normal.dot(n.twist_axis) * n.twist_axis)
              .normalized();
      n.bend_axis = n.twist_axis.cross(n.splay_axis).normalized();
    }

  // Part 0 = palm ellipsoid bound to the wrist; parts 1..15 = one capsule per
  // finger segment, in joint order.
  auto& mesh = m.mesh_;
  mesh.vert_ranges.resize(kNumJoints);
  mesh.face_ranges.resize(kNumJoints);

  auto begin_part = [&](int part) {
    mesh.vert_ranges[part].first = static_cast<int>(mesh.vertices.size());
    mesh.face_ranges[part].first = static_cast<int>(mesh.faces.size());
  };
  auto end_part = [&](int part) {
    mesh.vert_ranges[part].second = static_cast<int>(mesh.vertices.size());
    mesh.face_ranges[part].second = static_cast<int>(mesh.faces.size());
  };

  begin_part(0);
  append_ellipsoid(proportions.palm_center, proportions.palm_radii,
                   mesh.vertices, mesh.faces);
  end_part(0);

  for (int f = 0; f < kNumFingers; ++f)
    for (int level = 0; level < 3; ++level) {
      const int j = joint_index(f, level);
      const Vec3 p0 = nodes[j].canonical_position;
      const Vec3 p1 = level < 2
                          ? nodes[joint_index(f, level + 1)].canonical_position
                          : tip_points[f];
      begin_part(j);
      append_capsule(p0, p1, proportions.fingers[f].radii[level],
                     mesh.vertices, mesh.faces);
      end_part(j);
    }

  for (int f = 0; f < kNumFingers; ++f) {
    const Vec3 u = proportions.fingers[f].direction.normalized();
    m.fingertips_[f] = tip_points[f] + proportions.fingers[f].radii[2] * u;
  }

  // Skin weights: palm rigid to the wrist; capsule vertices rigid to their
  // own joint with a cosine falloff toward the parent joint over the band
  // around the capsule base.
  const int nverts = static_cast<int>(mesh.vertices.size());
  m.skin_weights_.assign(nverts, {});
  for (int v = mesh.vert_ranges[0].first; v < mesh.vert_ranges[0].second; ++v)
    m.skin_weights_[v][0] = 1.0;
  for (int f = 0; f < kNumFingers; ++f)
    for (int level = 0; level < 3; ++level) {
      const int j = joint_index(f, level);
      const int parent = nodes[j].parent;
      const Vec3 u = proportions.fingers[f].direction.normalized();
      const double r = proportions.fingers[f].radii[level];
      const double band = 0.8 * r;
      for (int v = mesh.vert_ranges[j].first; v < mesh.vert_ranges[j].second;
           ++v) {
        const double t = (mesh.vertices[v] - nodes[j].canonical_position).dot(u);
        double w_self = 1.0;
        if (t < band) {
          const double s = std::clamp((t + r) / (band + r), 0.0, 1.0);
          w_self = 0.5 - 0.5 * std::cos(std::numbers::pi * s);
        }
        m.skin_weights_[v][j] = w_self;
        m.skin_weights_[v][parent] = 1.0 - w_self;
      }
    }

  if (side == Side::kLeft) {
    for (auto& v : mesh.vertices) v.x() = -v.x();
    for (auto& fc : mesh.faces) std::swap(fc[1], fc[2]);
    for (auto& tip : m.fingertips_) tip.x() = -tip.x();
    for (auto& n : nodes) {
      n.canonical_position.x() = -n.canonical_position.x();
      n.bone_vector.x() = -n.bone_vector.x();
    }
    for (int f = 0; f < kNumFingers; ++f)
      for (int level = 0; level < 3; ++level) {
        const int j = joint_index(f, level);
        JointNode& n = nodes[j];
        n.twist_axis.x() = -n.twist_axis.x();
        n.splay_axis =
            (palm_normal - palm_normal.dot(n.twist_axis) * n.twist_axis)
                .normalized();
        n.bend_axis = n.twist_axis.cross(n.splay_axis).normalized();
      }
  }

  m.finish_construction();
  return m;
}

void HandModel::finish_construction() {
  influences_.resize(skin_weights_.size());
  for (size_t v = 0; v < skin_weights_.size(); ++v)
    for (int j = 0; j < kNumJoints; ++j)
      if (skin_weights_[v][j] > 0.0)
        influences_[v].push_back({j, skin_weights_[v][j]});
}

std::vector<int> HandModel::submesh_vertices(int joint) const {
  std::vector<int> out;
  for (int v = mesh_.vert_ranges[joint].first;
       v < mesh_.vert_ranges[joint].second; ++v)
    out.push_back(v);
  return out;
}

const std::vector<std::vector<int>>& HandModel::vertex_adjacency() const {
  if (adjacency_.empty()) {
    adjacency_.resize(mesh_.vertices.size());
    auto link = [&](int a, int b) {
      auto& na = adjacency_[a];
      if (std::find(na.begin(), na.end(), b) == na.end()) na.push_back(b);
    };
    for (const auto& f : mesh_.faces)
      for (int k = 0; k < 3; ++k) {
        link(f[k], f[(k + 1) % 3]);
        link(f[(k + 1) % 3], f[k]);
      }
  }
  return adjacency_;
}

std::array<RigidTransform, kNumJoints> forward_kinematics(
    const HandModel& model, const HandPose& pose) {
  std::array<RigidTransform, kNumJoints> out;
  out[0].rotation = pose.root_rotation.toRotationMatrix();
  out[0].translation = pose.root_translation;

  const auto& nodes = model.tree().nodes;
  for (int f = 0; f < kNumFingers; ++f)
    for (int level = 0; level < 3; ++level) {
      const int j = joint_index(f, level);
      const int q = nodes[j].parent;
      const int tj = theta_index(f, level);
      const Mat3 local =
          (Eigen::AngleAxisd(pose.theta(tj, kBend), nodes[j].bend_axis) *
           Eigen::AngleAxisd(pose.theta(tj, kSplay), nodes[j].splay_axis))
              .toRotationMatrix();
      out[j].rotation = out[q].rotation * local;
      out[j].translation =
          out[q].translation + out[q].rotation * nodes[j].bone_vector;
    }
  return out;
}

std::vector<Vec3> skin_vertices(
    const HandModel& model, const std::array<RigidTransform, kNumJoints>& t) {
  const auto& nodes = model.tree().nodes;
  const auto& verts = model.vertices_canonical();
  std::vector<Vec3> out(verts.size());
  for (size_t v = 0; v < verts.size(); ++v) {
    Vec3 p = Vec3::Zero();
    for (const auto& infl : model.influences()[v])
      p += infl.weight *
           (t[infl.joint].rotation *
                (verts[v] - nodes[infl.joint].canonical_position) +
            t[infl.joint].translation);
    out[v] = p;
  }
  return out;
}

std::array<Vec3, kNumKeypoints> joint_positions(
    const HandModel& model, const std::array<RigidTransform, kNumJoints>& t) {
  std::array<Vec3, kNumKeypoints> out;
  for (int j = 0; j < kNumJoints; ++j) out[j] = t[j].translation;
  const auto& nodes = model.tree().nodes;
  for (int f = 0; f < kNumFingers; ++f) {
    const int e = joint_index(f, 2);
    out[kNumJoints + f] =
        t[e].rotation *
            (model.fingertip_offsets()[f] - nodes[e].canonical_position) +
        t[e].translation;
  }
  return out;
}

Eigen::Matrix<double, kPoseDim, 1> pose_to_vector(const HandPose& pose) {
  Eigen::Matrix<double, kPoseDim, 1> v;
  for (int j = 0; j < kNumFingerJoints; ++j)
    for (int a = 0; a < 3; ++a) v[j * 3 + a] = pose.theta(j, a);
  return v;
}

HandPose vector_to_pose(const Eigen::Matrix<double, kPoseDim, 1>& v,
                        Side side) {
  HandPose pose;
  pose.side = side;
  for (int j = 0; j < kNumFingerJoints; ++j)
    for (int a = 0; a < 3; ++a) pose.theta(j, a) = v[j * 3 + a];
  return pose;
}

HandPose mirror_pose(const HandPose& pose) {
  HandPose out = pose;
  out.side = pose.side == Side::kRight ? Side::kLeft : Side::kRight;
  for (int j = 0; j < kNumFingerJoints; ++j) {
    out.theta(j, kSplay) = -pose.theta(j, kSplay);
    out.theta(j, kTwist) = -pose.theta(j, kTwist);
  }
  const Eigen::Quaterniond& q = pose.root_rotation;
  out.root_rotation = Eigen::Quaterniond(q.w(), q.x(), -q.y(), -q.z());
  out.root_translation.x() = -pose.root_translation.x();
  return out;
}

Eigen::Matrix<double, kParamsPerHand, 1> backprop_to_pose(
    const HandModel& model, const HandPose& pose,
    const std::array<RigidTransform, kNumJoints>& transforms,
    const std::vector<Vec3>& vertex_grads) {
  const auto& nodes = model.tree().nodes;
  std::array<Mat3, kNumJoints> dA;
  std::array<Vec3, kNumJoints> dx;
  dA.fill(Mat3::Zero());
  dx.fill(Vec3::Zero());

  const auto& verts = model.vertices_canonical();
  for (size_t v = 0; v < verts.size(); ++v) {
    const Vec3& g = vertex_grads[v];
    if (g.isZero(0.0)) continue;
    for (const auto& infl : model.influences()[v]) {
      dA[infl.joint] +=
          infl.weight * g *
          (verts[v] - nodes[infl.joint].canonical_position).transpose();
      dx[infl.joint] += infl.weight * g;
    }
  }

  Eigen::Matrix<double, kParamsPerHand, 1> grad =
      Eigen::Matrix<double, kParamsPerHand, 1>::Zero();

  for (int j = kNumJoints - 1; j >= 1; --j) {
    const int q = nodes[j].parent;
    const int f = (j - 1) / 3;
    const int level = (j - 1) % 3;
    const int tj = theta_index(f, level);

    const Mat3 rot_b =
        Eigen::AngleAxisd(pose.theta(tj, kBend), nodes[j].bend_axis)
            .toRotationMatrix();
    const Mat3 rot_s =
        Eigen::AngleAxisd(pose.theta(tj, kSplay), nodes[j].splay_axis)
            .toRotationMatrix();
    const Mat3 local = rot_b * rot_s;

    const Mat3 d_rot = transforms[q].rotation.transpose() * dA[j];
    grad[tj * 3 + kBend] +=
        (d_rot.cwiseProduct(skew(nodes[j].bend_axis) * local)).sum();
    grad[tj * 3 + kSplay] +=
        (d_rot.cwiseProduct(rot_b * skew(nodes[j].splay_axis) * rot_s)).sum();

    dA[q] += dA[j] * local.transpose() + dx[j] * nodes[j].bone_vector.transpose();
    dx[q] += dx[j];
  }
  grad.segment<3>(kPoseDim) = dx[0];
  return grad;
}

HandProportions proportions_from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open proportions file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("malformed proportions file: " + std::string(e.what()));
  }
  HandProportions p = HandProportions::defaults();
  try {
    if (j.contains("fingers")) {
      const auto& fs = j.at("fingers");
      for (int f = 0; f < kNumFingers; ++f) {
        const auto& fj = fs.at(f);
        auto vec3 = [](const nlohmann::json& a) {
          return Vec3(a.at(0).get<double>(), a.at(1).get<double>(),
                      a.at(2).get<double>());
        };
        p.fingers[f].root = vec3(fj.at("root"));
        p.fingers[f].direction = vec3(fj.at("direction"));
        for (int s = 0; s < 3; ++s) {
          p.fingers[f].lengths[s] = fj.at("lengths").at(s).get<double>();
          p.fingers[f].radii[s] = fj.at("radii").at(s).get<double>();
        }
      }
    }
    if (j.contains("palm_center"))
      p.palm_center = Vec3(j["palm_center"].at(0).get<double>(),
                           j["palm_center"].at(1).get<double>(),
                           j["palm_center"].at(2).get<double>());
    if (j.contains("palm_radii"))
      p.palm_radii = Vec3(j["palm_radii"].at(0).get<double>(),
                          j["palm_radii"].at(1).get<double>(),
                          j["palm_radii"].at(2).get<double>());
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("malformed proportions file: " + std::string(e.what()));
  }
  return p;
}

}  // namespace ihgen
