#include "ihgen/geometry.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <numbers>

#include "ihgen/errors.hpp"

namespace ihgen {

Aabb bounds_of(const std::vector<Vec3>& points) {
  Aabb box;
  for (const auto& p : points) box.expand(p);
  return box;
}

Vec3 triangle_normal(const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 n = (b - a).cross(c - a);
  const double len = n.norm();
  if (len < 1e-18) return Vec3::Zero();
  return n / len;
}

double point_triangle_sq_distance(const Vec3& p, const Vec3& a, const Vec3& b,
                                  const Vec3& c) {
  const Vec3 ab = b - a;
  const Vec3 ac = c - a;
  const Vec3 ap = p - a;

  const double d1 = ab.dot(ap);
  const double d2 = ac.dot(ap);
  if (d1 <= 0.0 && d2 <= 0.0) return ap.squaredNorm();

  const Vec3 bp = p - b;
  const double d3 = ab.dot(bp);
  const double d4 = ac.dot(bp);
  if (d3 >= 0.0 && d4 <= d3) return bp.squaredNorm();

  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) {
    const double v = d1 / (d1 - d3);
    return (ap - v * ab).squaredNorm();
  }

  const Vec3 cp = p - c;
  const double d5 = ab.dot(cp);
  const double d6 = ac.dot(cp);
  if (d6 >= 0.0 && d5 <= d6) return cp.squaredNorm();

  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) {
    const double w = d2 / (d2 - d6);
    return (ap - w * ac).squaredNorm();
  }

  const double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
    const double w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
    return (bp + w * (c - b)).squaredNorm();
  }

  const double denom = 1.0 / (va + vb + vc);
  const double v = vb * denom;
  const double w = vc * denom;
  return (ap - v * ab - w * ac).squaredNorm();
}

double point_mesh_distance(const Vec3& p, const std::vector<Vec3>& verts,
                           const std::vector<Face>& faces, int face_begin,
                           int face_end) {
  double best = std::numeric_limits<double>::infinity();
  for (int f = face_begin; f < face_end; ++f) {
    const Face& fc = faces[f];
    best = std::min(best, point_triangle_sq_distance(p, verts[fc[0]],
                                                     verts[fc[1]], verts[fc[2]]));
  }
  return std::sqrt(best);
}

double winding_number(const Vec3& p, const std::vector<Vec3>& verts,
                      const std::vector<Face>& faces, int face_begin,
                      int face_end) {
  double total = 0.0;
  for (int f = face_begin; f < face_end; ++f) {
    const Vec3 a = verts[faces[f][0]] - p;
    const Vec3 b = verts[faces[f][1]] - p;
    const Vec3 c = verts[faces[f][2]] - p;
    const double la = a.norm(), lb = b.norm(), lc = c.norm();
    const double denom =
        la * lb * lc + a.dot(b) * lc + b.dot(c) * la + c.dot(a) * lb;
    const double numer = a.dot(b.cross(c));
    total += 2.0 * std::atan2(numer, denom);
  }
  return total / (4.0 * std::numbers::pi);
}

bool ray_triangle(const Vec3& origin, const Vec3& dir, const Vec3& a,
                  const Vec3& b, const Vec3& c, double& t_out) {
  constexpr double kEps = 1e-14;
  const Vec3 e1 = b - a;
  const Vec3 e2 = c - a;
  const Vec3 pvec = dir.cross(e2);
  const double det = e1.dot(pvec);
  if (std::abs(det) < kEps) return false;
  const double inv_det = 1.0 / det;
  const Vec3 tvec = origin - a;
  const double u = tvec.dot(pvec) * inv_det;
  if (u < 0.0 || u > 1.0) return false;
  const Vec3 qvec = tvec.cross(e1);
  const double v = dir.dot(qvec) * inv_det;
  if (v < 0.0 || u + v > 1.0) return false;
  t_out = e2.dot(qvec) * inv_det;
  return true;
}

bool is_closed_manifold(const std::vector<Face>& faces, int face_begin,
                        int face_end) {
  // directed edge -> count; a closed orientable mesh has every directed edge
  // exactly once and its reverse exactly once.
  std::map<std::pair<int, int>, int> directed;
  for (int f = face_begin; f < face_end; ++f) {
    const Face& fc = faces[f];
    for (int k = 0; k < 3; ++k) {
      const int i = fc[k];
      const int j = fc[(k + 1) % 3];
      if (i == j) return false;
      if (++directed[{i, j}] > 1) return false;
    }
  }
  for (const auto& [edge, count] : directed) {
    auto rev = directed.find({edge.second, edge.first});
    if (rev == directed.end() || rev->second != 1) return false;
  }
  return true;
}

double exact_penetration_depth(const Vec3& p, const std::vector<Vec3>& verts,
                               const std::vector<Face>& faces, int face_begin,
                               int face_end) {
  if (winding_number(p, verts, faces, face_begin, face_end) < 0.5) return 0.0;
  return point_mesh_distance(p, verts, faces, face_begin, face_end);
}

void save_obj(const std::string& path, const std::vector<Vec3>& verts,
              const std::vector<Face>& faces) {
  std::FILE* fp = std::fopen(path.c_str(), "w");
  if (!fp) throw IoError("cannot open for writing: " + path);
  for (const auto& v : verts)
    std::fprintf(fp, "v %.9f %.9f %.9f\n", v.x(), v.y(), v.z());
  for (const auto& f : faces)
    std::fprintf(fp, "f %d %d %d\n", f[0] + 1, f[1] + 1, f[2] + 1);
  std::fclose(fp);
}

}  // namespace ihgen
