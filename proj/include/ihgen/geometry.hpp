#pragma once

#include <Eigen/Dense>
#include <array>
#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace ihgen {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Face = std::array<int, 3>;

struct RigidTransform {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  Vec3 apply(const Vec3& p) const { return rotation * p + translation; }
};

struct Aabb {
  Vec3 min = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 max = Vec3::Constant(-std::numeric_limits<double>::infinity());

  void expand(const Vec3& p) {
    min = min.cwiseMin(p);
    max = max.cwiseMax(p);
  }
  Aabb padded(double r) const {
    return {min.array() - r, max.array() + r};
  }
  bool contains(const Vec3& p) const {
    return (p.array() >= min.array()).all() && (p.array() <= max.array()).all();
  }
  bool intersects(const Aabb& o) const {
    return (min.array() <= o.max.array()).all() &&
           (max.array() >= o.min.array()).all();
  }
};

// A closed-per-part triangle mesh. Part i owns the contiguous vertex range
// vert_ranges[i] and face range face_ranges[i]; ranges are disjoint and cover
// the whole mesh, which is what the per-part SDF machinery relies on.
struct PartitionedMesh {
  std::vector<Vec3> vertices;
  std::vector<Face> faces;
  std::vector<std::pair<int, int>> vert_ranges;  // [begin, end)
  std::vector<std::pair<int, int>> face_ranges;  // [begin, end)

  int part_count() const { return static_cast<int>(vert_ranges.size()); }
  Aabb part_bounds(int part) const {
    Aabb box;
    for (int v = vert_ranges[part].first; v < vert_ranges[part].second; ++v)
      box.expand(vertices[v]);
    return box;
  }
};

Aabb bounds_of(const std::vector<Vec3>& points);

Vec3 triangle_normal(const Vec3& a, const Vec3& b, const Vec3& c);

// Squared distance from p to triangle abc (Ericson's region method).
double point_triangle_sq_distance(const Vec3& p, const Vec3& a, const Vec3& b,
                                  const Vec3& c);

// Unsigned distance from p to the faces [face_begin, face_end) of the mesh.
double point_mesh_distance(const Vec3& p, const std::vector<Vec3>& verts,
                           const std::vector<Face>& faces, int face_begin,
                           int face_end);

// Generalized winding number of the face range around p (Van Oosterom-
// Strackee solid angles). ~1 inside a closed mesh, ~0 outside.
double winding_number(const Vec3& p, const std::vector<Vec3>& verts,
                      const std::vector<Face>& faces, int face_begin,
                      int face_end);

// Moller-Trumbore. Returns true and the ray parameter t (may be negative)
// when the ray origin+t*dir crosses the triangle interior.
bool ray_triangle(const Vec3& origin, const Vec3& dir, const Vec3& a,
                  const Vec3& b, const Vec3& c, double& t_out);

// True when every edge of the face range is shared by exactly two faces with
// opposite orientation.
bool is_closed_manifold(const std::vector<Face>& faces, int face_begin,
                        int face_end);

// Penetration depth of p into the closed submesh given by the face range:
// distance to the surface when inside, 0 outside. This is the grid-free
// evaluation path used by the validity filter.
double exact_penetration_depth(const Vec3& p, const std::vector<Vec3>& verts,
                               const std::vector<Face>& faces, int face_begin,
                               int face_end);

void save_obj(const std::string& path, const std::vector<Vec3>& verts,
              const std::vector<Face>& faces);

}  // namespace ihgen
