#pragma once

#include <array>
#include <cmath>
#include <vector>

#include "medspec/distance.hpp"

namespace medspec {

/// Unit gradient of the distance function on object voxels; zero elsewhere.
struct VectorField {
  GridGeometry geometry;
  std::vector<Vec3> q;
};

/// Average outward flux per voxel; 0 off the object.
struct AofField {
  GridGeometry geometry;
  std::vector<double> value;

  double at(std::size_t idx) const { return value[idx]; }
};

/// q(a) = (a - b) / |a - b| with b the recorded nearest empty voxel center.
inline VectorField gradient_field(const DistanceField& df) {
  const auto& g = df.geometry;
  VectorField vf{g, std::vector<Vec3>(g.size(), Vec3::Zero())};
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!(df.d[i] > 0.0)) continue;
    const Index3 a = g.unravel(i);
    const Index3 b = g.unravel(static_cast<std::size_t>(df.feature[i]));
    const Vec3 diff(a[0] - b[0], a[1] - b[1], a[2] - b[2]);
    vf.q[i] = diff.normalized();
  }
  return vf;
}

/// Unit gradient of the distance function from the 3x3x3 Sobel operator on d.
/// The exact feature direction jumps wherever the nearest empty voxel
/// changes, which on digitized curved walls plants spurious ridges of
/// noticeable flux; the smoothed field follows the continuous distance
/// function closely. Falls back to the feature direction where the smoothed
/// gradient vanishes (e.g. the center of a ball).
inline VectorField smoothed_gradient_field(const DistanceField& df) {
  const auto& g = df.geometry;
  VectorField vf{g, std::vector<Vec3>(g.size(), Vec3::Zero())};
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!(df.d[i] > 0.0)) continue;
    const Index3 a = g.unravel(i);
    Vec3 grad = Vec3::Zero();
    for (int dz = -1; dz <= 1; ++dz)
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          const int x = a[0] + dx, y = a[1] + dy, z = a[2] + dz;
          if (!g.contains(x, y, z)) continue;
          const double w = (dx == 0 ? 2.0 : 1.0) * (dy == 0 ? 2.0 : 1.0) * (dz == 0 ? 2.0 : 1.0);
          grad += w * df.d[g.linear(x, y, z)] * Vec3(dx, dy, dz);
        }
    if (grad.norm() < 1e-12 * g.spacing) {
      const Index3 b = g.unravel(static_cast<std::size_t>(df.feature[i]));
      grad = Vec3(a[0] - b[0], a[1] - b[1], a[2] - b[2]);
    }
    vf.q[i] = grad.normalized();
  }
  return vf;
}

/// 60 near-uniform sphere directions: the points trisecting each of the 30
/// icosahedron edges, projected to the unit sphere. The set is closed under
/// negation, so a constant field has exactly zero flux.
inline const std::array<Vec3, 60>& flux_directions() {
  static const std::array<Vec3, 60> dirs = [] {
    const double t = (1.0 + std::sqrt(5.0)) / 2.0;
    const std::array<Vec3, 12> v = {Vec3(-1, t, 0), Vec3(1, t, 0),  Vec3(-1, -t, 0), Vec3(1, -t, 0),
                                    Vec3(0, -1, t), Vec3(0, 1, t),  Vec3(0, -1, -t), Vec3(0, 1, -t),
                                    Vec3(t, 0, -1), Vec3(t, 0, 1),  Vec3(-t, 0, -1), Vec3(-t, 0, 1)};
    const double edge = 2.0;  // icosahedron edge length for this vertex set
    std::array<Vec3, 60> out;
    int n = 0;
    for (int a = 0; a < 12; ++a)
      for (int b = a + 1; b < 12; ++b) {
        if (std::abs((v[a] - v[b]).norm() - edge) > 1e-9) continue;
        out[n++] = (v[a] + (v[b] - v[a]) / 3.0).normalized();
        out[n++] = (v[a] + 2.0 * (v[b] - v[a]) / 3.0).normalized();
      }
    return out;
  }();
  return dirs;
}

/// AOF(p) = mean_k <q(p + u_k), u_k> over the 60 stencil directions at a
/// radius of one voxel. Off-lattice samples read the nearest voxel. Samples
/// that land outside the object reuse q(p), i.e. the field is extended
/// constantly across the boundary, which gives zero flux at regular boundary
/// voxels.
inline AofField average_outward_flux(const VectorField& vf, const DistanceField& df) {
  const auto& g = df.geometry;
  if (!(vf.geometry == g)) fail(ErrorCode::shape, "vector field and distance field geometry differ");
  const auto& dirs = flux_directions();
  std::array<Index3, 60> offsets;
  for (int k = 0; k < 60; ++k)
    for (int c = 0; c < 3; ++c) offsets[k][c] = static_cast<int>(std::lround(dirs[k][c]));

  AofField aof{g, std::vector<double>(g.size(), 0.0)};
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!(df.d[i] > 0.0)) continue;
    const Index3 p = g.unravel(i);
    const Vec3& self = vf.q[i];
    double sum = 0.0;
    for (int k = 0; k < 60; ++k) {
      const int x = p[0] + offsets[k][0], y = p[1] + offsets[k][1], z = p[2] + offsets[k][2];
      const Vec3* sample = &self;
      if (g.contains(x, y, z)) {
        const std::size_t j = g.linear(x, y, z);
        if (df.d[j] > 0.0) sample = &vf.q[j];
      }
      sum += sample->dot(dirs[k]);
    }
    aof.value[i] = sum / 60.0;
  }
  return aof;
}

}  // namespace medspec
