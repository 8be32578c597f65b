#include "ihgen/sdf.hpp"

#include <algorithm>
#include <cmath>

#include "ihgen/errors.hpp"

namespace ihgen {

SdfGrid build_sdf(const std::vector<Vec3>& verts,
                  const std::vector<Face>& faces, int face_begin, int face_end,
                  int resolution, int padding_cells) {
  if (resolution < 8) throw ConfigError("sdf resolution must be >= 8");
  if (padding_cells < 1 || 2 * padding_cells + 2 >= resolution)
    throw ConfigError("sdf padding incompatible with resolution");
  if (!is_closed_manifold(faces, face_begin, face_end))
    throw DegenerateGeometryError("submesh is not watertight");

  Aabb box;
  for (int f = face_begin; f < face_end; ++f)
    for (int c = 0; c < 3; ++c) box.expand(verts[faces[f][c]]);

  SdfGrid grid;
  grid.resolution = resolution;
  const Vec3 extent = box.max - box.min;
  grid.spacing = extent.maxCoeff() / (resolution - 1 - 2 * padding_cells);
  const Vec3 center = 0.5 * (box.min + box.max);
  grid.origin = center - Vec3::Constant(0.5 * grid.spacing * (resolution - 1));
  grid.values.assign(static_cast<size_t>(resolution) * resolution * resolution,
                     0.0);

  // Inside flags by ray parity, one +x ray per (j, k) column. The column
  // origin is nudged off the lattice so rays do not thread mesh edges.
  const double jitter = 0.5737751e-7 * grid.spacing;
  std::vector<char> inside(grid.values.size(), 0);
  std::vector<double> hits;
  for (int k = 0; k < resolution; ++k)
    for (int j = 0; j < resolution; ++j) {
      const Vec3 origin(grid.origin.x() - grid.spacing,
                        grid.origin.y() + j * grid.spacing + jitter,
                        grid.origin.z() + k * grid.spacing + 2.0 * jitter);
      hits.clear();
      double t;
      for (int f = face_begin; f < face_end; ++f)
        if (ray_triangle(origin, Vec3::UnitX(), verts[faces[f][0]],
                         verts[faces[f][1]], verts[faces[f][2]], t) &&
            t > 0.0)
          hits.push_back(t);
      if (hits.empty()) continue;
      std::sort(hits.begin(), hits.end());
      hits.erase(std::unique(hits.begin(), hits.end(),
                             [&](double a, double b) {
                               return std::abs(a - b) < 1e-12;
                             }),
                 hits.end());
      size_t h = 0;
      bool in = false;
      for (int i = 0; i < resolution; ++i) {
        const double x = grid.spacing * (i + 1);  // node x relative to origin
        while (h < hits.size() && hits[h] < x) {
          in = !in;
          ++h;
        }
        if (in)
          inside[(static_cast<size_t>(k) * resolution + j) * resolution + i] = 1;
      }
    }

  for (int k = 0; k < resolution; ++k)
    for (int j = 0; j < resolution; ++j)
      for (int i = 0; i < resolution; ++i) {
        if (!inside[(static_cast<size_t>(k) * resolution + j) * resolution + i])
          continue;
        const Vec3 p = grid.origin + grid.spacing * Vec3(i, j, k);
        grid.at(i, j, k) = point_mesh_distance(p, verts, faces, face_begin,
                                               face_end);
      }
  return grid;
}

std::pair<double, Vec3> omega_query(const SdfGrid& grid, const Vec3& p) {
  const Vec3 local = (p - grid.origin) / grid.spacing;
  const int n = grid.resolution;
  if ((local.array() < 0.0).any() ||
      (local.array() > static_cast<double>(n - 1)).any())
    return {0.0, Vec3::Zero()};

  int i = std::min(static_cast<int>(local.x()), n - 2);
  int j = std::min(static_cast<int>(local.y()), n - 2);
  int k = std::min(static_cast<int>(local.z()), n - 2);
  // snap to lattice planes so sample nodes reproduce stored values exactly
  auto frac = [](double x, int base) {
    double f = x - base;
    if (f < 1e-9) f = 0.0;
    if (f > 1.0 - 1e-9) f = 1.0;
    return f;
  };
  const double u = frac(local.x(), i);
  const double v = frac(local.y(), j);
  const double w = frac(local.z(), k);

  const double c000 = grid.at(i, j, k), c100 = grid.at(i + 1, j, k);
  const double c010 = grid.at(i, j + 1, k), c110 = grid.at(i + 1, j + 1, k);
  const double c001 = grid.at(i, j, k + 1), c101 = grid.at(i + 1, j, k + 1);
  const double c011 = grid.at(i, j + 1, k + 1),
               c111 = grid.at(i + 1, j + 1, k + 1);

  const double c00 = c000 * (1 - u) + c100 * u;
  const double c10 = c010 * (1 - u) + c110 * u;
  const double c01 = c001 * (1 - u) + c101 * u;
  const double c11 = c011 * (1 - u) + c111 * u;
  const double c0 = c00 * (1 - v) + c10 * v;
  const double c1 = c01 * (1 - v) + c11 * v;
  const double value = c0 * (1 - w) + c1 * w;

  const double du = ((c100 - c000) * (1 - v) + (c110 - c010) * v) * (1 - w) +
                    ((c101 - c001) * (1 - v) + (c111 - c011) * v) * w;
  const double dv = (c10 - c00) * (1 - w) + (c11 - c01) * w;
  const double dw = c1 - c0;

  return {value, Vec3(du, dv, dw) / grid.spacing};
}

}  // namespace ihgen
