#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "medspec/mesh.hpp"
#include "medspec/voxel_grid.hpp"

namespace medspec {

inline constexpr int kGridPadding = 2;

/// Solid voxelization of a watertight mesh. `resolution` is the voxel count
/// along the longest bounding-box axis; two empty layers pad every side.
///
/// Each (x, y) column is classified by the parity of ray/triangle crossings
/// along +z. The ray is nudged off the column center by a fixed sub-voxel
/// offset so it never grazes shared edges or vertices of axis-aligned meshes.
inline VoxelGrid voxelize(const TriangleMesh& mesh, int resolution) {
  if (resolution < 8 || resolution > 512)
    fail(ErrorCode::domain, "resolution must lie in [8, 512], got " + std::to_string(resolution));
  if (mesh.vertices.empty() || mesh.triangles.empty()) fail(ErrorCode::empty_input, "mesh is empty");
  if (!is_watertight(mesh)) fail(ErrorCode::voxelization, "mesh is not watertight; interior is undefined");

  const BoundingBox box = bounding_box(mesh.vertices);
  const Vec3 extent = box.extent();
  const double longest = extent.maxCoeff();
  if (!(longest > 0.0)) fail(ErrorCode::voxelization, "mesh has zero extent");

  GridGeometry g;
  g.spacing = longest / resolution;
  for (int a = 0; a < 3; ++a) {
    const int cells = std::max(1, static_cast<int>(std::ceil(extent[a] / g.spacing - 1e-9)));
    g.dims[a] = cells + 2 * kGridPadding;
  }
  g.origin = box.min - Vec3::Constant(kGridPadding * g.spacing);
  VoxelGrid grid(g);

  const int nx = g.dims[0], ny = g.dims[1], nz = g.dims[2];
  const double dx = g.spacing * 1.2345678e-7;
  const double dy = g.spacing * 2.7182818e-7;

  // Bucket triangles by the columns their xy footprint can reach.
  std::vector<std::vector<int>> columns(static_cast<std::size_t>(nx) * ny);
  for (int t = 0; t < static_cast<int>(mesh.triangles.size()); ++t) {
    const auto& tri = mesh.triangles[t];
    double x0 = mesh.vertices[tri[0]].x(), x1 = x0, y0 = mesh.vertices[tri[0]].y(), y1 = y0;
    for (int k = 1; k < 3; ++k) {
      x0 = std::min(x0, mesh.vertices[tri[k]].x());
      x1 = std::max(x1, mesh.vertices[tri[k]].x());
      y0 = std::min(y0, mesh.vertices[tri[k]].y());
      y1 = std::max(y1, mesh.vertices[tri[k]].y());
    }
    const int i0 = std::max(0, static_cast<int>(std::floor((x0 - g.origin.x()) / g.spacing - 0.5)));
    const int i1 = std::min(nx - 1, static_cast<int>(std::ceil((x1 - g.origin.x()) / g.spacing - 0.5)));
    const int j0 = std::max(0, static_cast<int>(std::floor((y0 - g.origin.y()) / g.spacing - 0.5)));
    const int j1 = std::min(ny - 1, static_cast<int>(std::ceil((y1 - g.origin.y()) / g.spacing - 0.5)));
    for (int j = j0; j <= j1; ++j)
      for (int i = i0; i <= i1; ++i) columns[static_cast<std::size_t>(j) * nx + i].push_back(t);
  }

  std::vector<double> hits;
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const auto& bucket = columns[static_cast<std::size_t>(j) * nx + i];
      if (bucket.empty()) continue;
      const double px = g.origin.x() + (i + 0.5) * g.spacing + dx;
      const double py = g.origin.y() + (j + 0.5) * g.spacing + dy;
      hits.clear();
      for (int t : bucket) {
        const auto& tri = mesh.triangles[t];
        const Vec3& a = mesh.vertices[tri[0]];
        const Vec3& b = mesh.vertices[tri[1]];
        const Vec3& c = mesh.vertices[tri[2]];
        const double w0 = (b.x() - px) * (c.y() - py) - (b.y() - py) * (c.x() - px);
        const double w1 = (c.x() - px) * (a.y() - py) - (c.y() - py) * (a.x() - px);
        const double w2 = (a.x() - px) * (b.y() - py) - (a.y() - py) * (b.x() - px);
        const bool inside = (w0 > 0 && w1 > 0 && w2 > 0) || (w0 < 0 && w1 < 0 && w2 < 0);
        if (!inside) continue;
        const double sum = w0 + w1 + w2;
        hits.push_back((w0 * a.z() + w1 * b.z() + w2 * c.z()) / sum);
      }
      if (hits.empty()) continue;
      if (hits.size() % 2 != 0)
        fail(ErrorCode::voxelization, "odd ray crossing count in column (" + std::to_string(i) + ", " +
                                          std::to_string(j) + ")");
      std::sort(hits.begin(), hits.end());
      for (std::size_t h = 0; h + 1 < hits.size(); h += 2) {
        const double za = (hits[h] - g.origin.z()) / g.spacing - 0.5;
        const double zb = (hits[h + 1] - g.origin.z()) / g.spacing - 0.5;
        const int k0 = std::max(0, static_cast<int>(std::ceil(za)));
        const int k1 = std::min(nz - 1, static_cast<int>(std::floor(zb)));
        for (int k = k0; k <= k1; ++k) grid.occupancy[g.linear(i, j, k)] = 1;
      }
    }
  }
  return grid;
}

}  // namespace medspec
