#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "medspec/thinning.hpp"

namespace medspec {

/// Union of the inscribed balls of a skeleton, plus for every covered voxel
/// the index of the skeletal point that generated it.
struct ReconGrid {
  VoxelGrid grid;
  std::vector<std::int32_t> generator;  ///< -1 where unoccupied
};

/// True iff a voxel center at squared lattice distance `sq` from a skeletal
/// center lies strictly inside a ball of squared radius `r2` (voxel units).
/// The radius is the distance to the nearest empty voxel center, so the
/// strict test keeps every ball inside the source object.
inline bool inside_ball(std::int64_t sq, double r2) {
  return static_cast<double>(sq) < r2 - 1e-9 * std::max(1.0, r2);
}

/// Rasterizes every ball. Each voxel's generator is the claiming ball of
/// maximal radius; among equal radii the nearest center, then the lower index.
inline ReconGrid reconstruct(const SkeletalPointSet& skel, const GridGeometry& geometry) {
  if (skel.empty()) fail(ErrorCode::empty_input, "skeleton has no points");
  const auto& g = geometry;
  if (g.dims[0] <= 0 || g.dims[1] <= 0 || g.dims[2] <= 0 || !(g.spacing > 0))
    fail(ErrorCode::shape, "invalid grid geometry");
  for (const auto& p : skel.points) {
    if (!(p.radius > 0) || !std::isfinite(p.radius)) fail(ErrorCode::domain, "skeletal radius must be positive");
    if (!g.contains(p.voxel[0], p.voxel[1], p.voxel[2])) fail(ErrorCode::index_range, "skeletal voxel outside grid");
  }

  std::vector<std::size_t> order(skel.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return skel.points[a].radius > skel.points[b].radius; });

  ReconGrid out{VoxelGrid(g), std::vector<std::int32_t>(g.size(), -1)};
  // next_free[i]: smallest unclaimed linear index >= i (path-halving skip
  // list), so each row interval costs time proportional to what it claims.
  std::vector<std::size_t> next_free(g.size() + 1);
  std::iota(next_free.begin(), next_free.end(), std::size_t{0});
  auto find = [&](std::size_t i) {
    while (next_free[i] != i) {
      next_free[i] = next_free[next_free[i]];
      i = next_free[i];
    }
    return i;
  };
  // Balls of equal radius form one group. Inside a group a voxel goes to the
  // nearest center (then the lower index); voxels become unavailable to later
  // groups only once the whole group is rasterized.
  std::vector<std::int64_t> best_sq(g.size(), -1);
  std::vector<std::size_t> touched;
  for (std::size_t gb = 0; gb < order.size();) {
    std::size_t ge = gb + 1;
    while (ge < order.size() && skel.points[order[ge]].radius == skel.points[order[gb]].radius) ++ge;
    touched.clear();
    for (std::size_t oi = gb; oi < ge; ++oi) {
      const std::size_t i = order[oi];
      const auto& p = skel.points[i];
      const double rv = p.radius / g.spacing;
      const double r2 = rv * rv;
      const int reach = static_cast<int>(std::ceil(rv));
      const int y0 = std::max(0, p.voxel[1] - reach), y1 = std::min(g.dims[1] - 1, p.voxel[1] + reach);
      const int z0 = std::max(0, p.voxel[2] - reach), z1 = std::min(g.dims[2] - 1, p.voxel[2] + reach);
      for (int z = z0; z <= z1; ++z) {
        const std::int64_t dz = z - p.voxel[2];
        for (int y = y0; y <= y1; ++y) {
          const std::int64_t dy = y - p.voxel[1];
          const std::int64_t syz = dy * dy + dz * dz;
          if (!inside_ball(syz, r2)) continue;
          // Half-width of the row chord: largest h with h^2 + syz inside.
          auto h = static_cast<std::int64_t>(std::floor(std::sqrt(std::max(0.0, r2 - static_cast<double>(syz)))));
          while (h >= 0 && !inside_ball(h * h + syz, r2)) --h;
          while (inside_ball((h + 1) * (h + 1) + syz, r2)) ++h;
          const int xa = std::max<std::int64_t>(0, p.voxel[0] - h);
          const int xb = static_cast<int>(std::min<std::int64_t>(g.dims[0] - 1, p.voxel[0] + h));
          if (xa > xb) continue;
          const std::size_t end = g.linear(xb, y, z) + 1;
          const std::size_t row = g.linear(0, y, z);
          for (std::size_t idx = find(g.linear(xa, y, z)); idx < end; idx = find(idx + 1)) {
            const std::int64_t dx = static_cast<std::int64_t>(idx - row) - p.voxel[0];
            const std::int64_t sq = dx * dx + syz;
            if (best_sq[idx] < 0) {
              touched.push_back(idx);
            } else if (sq > best_sq[idx] || (sq == best_sq[idx] && out.generator[idx] < static_cast<std::int32_t>(i))) {
              continue;
            }
            best_sq[idx] = sq;
            out.generator[idx] = static_cast<std::int32_t>(i);
            out.grid.occupancy[idx] = 1;
          }
        }
      }
    }
    for (std::size_t idx : touched) next_free[idx] = idx + 1;
    gb = ge;
  }
  return out;
}

/// |a ∩ b| / |a ∪ b|.
inline double miou(const VoxelGrid& a, const VoxelGrid& b) {
  if (!(a.geometry == b.geometry)) fail(ErrorCode::shape, "grids differ in geometry");
  if (a.occupancy.size() != b.occupancy.size()) fail(ErrorCode::shape, "grid payload sizes differ");
  std::size_t inter = 0, uni = 0;
  for (std::size_t i = 0; i < a.occupancy.size(); ++i) {
    const bool x = a.occupancy[i] != 0, y = b.occupancy[i] != 0;
    inter += x && y;
    uni += x || y;
  }
  if (uni == 0) fail(ErrorCode::empty_input, "IoU of two empty grids is undefined");
  return static_cast<double>(inter) / static_cast<double>(uni);
}

}  // namespace medspec
