#pragma once

#include <utility>
#include <vector>

#include "ihgen/geometry.hpp"

namespace ihgen {

// Voxelized modified signed distance field of one closed submesh:
// omega = -min(SDF, 0), i.e. surface distance inside the mesh and exactly 0
// outside. Samples live at the nodes origin + (i,j,k)*spacing; the padded
// grid extends beyond the submesh bounding box so every boundary node is 0.
struct SdfGrid {
  Vec3 origin = Vec3::Zero();
  double spacing = 0.0;
  int resolution = 0;  // nodes per axis
  std::vector<double> values;

  double at(int i, int j, int k) const {
    return values[(static_cast<size_t>(k) * resolution + j) * resolution + i];
  }
  double& at(int i, int j, int k) {
    return values[(static_cast<size_t>(k) * resolution + j) * resolution + i];
  }
  Vec3 max_corner() const {
    return origin + Vec3::Constant(spacing * (resolution - 1));
  }
};

// Builds the grid for the faces [face_begin, face_end) of the mesh. Inside /
// outside is resolved by ray parity along grid columns; inside nodes store
// the exact point-to-mesh distance. Throws DegenerateGeometryError when the
// face range is not a closed manifold.
SdfGrid build_sdf(const std::vector<Vec3>& verts,
                  const std::vector<Face>& faces, int face_begin, int face_end,
                  int resolution, int padding_cells);

// Trilinear value and analytic spatial gradient; (0, 0) outside the grid.
std::pair<double, Vec3> omega_query(const SdfGrid& grid, const Vec3& p);

}  // namespace ihgen
