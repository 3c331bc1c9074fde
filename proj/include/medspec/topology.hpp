#pragma once

// Local topology on the 3x3x3 neighborhood with the (26, 6) connectivity pair:
// 26-adjacency for the object, 6-adjacency for the background.
//
// Neighborhood bit b encodes offset (dx, dy, dz) with
// b = (dx+1) + 3 (dy+1) + 9 (dz+1); bit 13 is the center voxel.

#include <array>
#include <bit>
#include <cstdint>
#include <cstdlib>
#include <vector>

#include "medspec/voxel_grid.hpp"

namespace medspec {

namespace topo {

inline constexpr int kCenter = 13;
inline constexpr std::uint32_t kCenterBit = 1u << kCenter;

struct Tables {
  std::array<std::uint32_t, 27> adj26{};
  std::array<std::uint32_t, 27> adj6{};
  std::uint32_t n6 = 0;
  std::uint32_t n18 = 0;
  std::uint32_t n26 = 0;
  // Nine planar cross-sections through the center, each as 8 ring positions
  // in cyclic order.
  std::array<std::array<int, 8>, 9> planes{};
  // curve_end[s]: ring occupancy s has exactly one occupied slot, i.e. the
  // planar cross-section is a digital curve that stops at the center.
  std::array<bool, 256> curve_end{};

  Tables() {
    auto offset = [](int b) { return std::array<int, 3>{b % 3 - 1, (b / 3) % 3 - 1, b / 9 - 1}; };
    for (int a = 0; a < 27; ++a) {
      if (a == kCenter) continue;
      const auto oa = offset(a);
      const int nz = (oa[0] != 0) + (oa[1] != 0) + (oa[2] != 0);
      if (nz == 1) n6 |= 1u << a;
      if (nz <= 2) n18 |= 1u << a;
      n26 |= 1u << a;
      for (int b = 0; b < 27; ++b) {
        if (b == kCenter || b == a) continue;
        const auto ob = offset(b);
        const int dx = std::abs(oa[0] - ob[0]), dy = std::abs(oa[1] - ob[1]), dz = std::abs(oa[2] - ob[2]);
        if (dx <= 1 && dy <= 1 && dz <= 1) adj26[a] |= 1u << b;
        if (dx + dy + dz == 1) adj6[a] |= 1u << b;
      }
    }
    const std::array<std::array<int, 3>, 9> e1 = {{{1, 0, 0}, {0, 1, 0}, {1, 0, 0}, {1, 1, 0}, {1, -1, 0},
                                                    {1, 0, 1}, {1, 0, -1}, {0, 1, 1}, {0, 1, -1}}};
    const std::array<std::array<int, 3>, 9> e2 = {{{0, 1, 0}, {0, 0, 1}, {0, 0, 1}, {0, 0, 1}, {0, 0, 1},
                                                    {0, 1, 0}, {0, 1, 0}, {1, 0, 0}, {1, 0, 0}}};
    const int ring[8][2] = {{1, 0}, {1, 1}, {0, 1}, {-1, 1}, {-1, 0}, {-1, -1}, {0, -1}, {1, -1}};
    for (int p = 0; p < 9; ++p)
      for (int r = 0; r < 8; ++r) {
        int d[3];
        for (int c = 0; c < 3; ++c) d[c] = ring[r][0] * e1[p][c] + ring[r][1] * e2[p][c];
        planes[p][r] = (d[0] + 1) + 3 * (d[1] + 1) + 9 * (d[2] + 1);
      }
    for (int s = 0; s < 256; ++s) curve_end[s] = std::popcount(static_cast<unsigned>(s)) == 1;
  }
};

inline const Tables& tables() {
  static const Tables t;
  return t;
}

/// Number of connected components of `set` under the adjacency table `adj`;
/// when `seeds` is given, only components touching it are counted.
inline int count_components(std::uint32_t set, const std::array<std::uint32_t, 27>& adj, std::uint32_t seeds) {
  int count = 0;
  std::uint32_t remaining = set;
  std::uint32_t pending = set & seeds;
  while (pending) {
    const int s = std::countr_zero(pending);
    std::uint32_t comp = 1u << s;
    std::uint32_t frontier = comp;
    while (frontier) {
      std::uint32_t grow = 0;
      while (frontier) {
        const int b = std::countr_zero(frontier);
        frontier &= frontier - 1;
        grow |= adj[b];
      }
      grow &= remaining & ~comp;
      comp |= grow;
      frontier = grow;
    }
    remaining &= ~comp;
    pending &= ~comp;
    ++count;
  }
  return count;
}

/// Simple-point test on a neighborhood mask (center bit ignored).
inline bool is_simple_mask(std::uint32_t mask) {
  const auto& t = tables();
  const std::uint32_t object = mask & t.n26;
  if (object == 0 || object == t.n26) return false;
  if (count_components(object, t.adj26, object) != 1) return false;
  const std::uint32_t background = ~mask & t.n18;
  return count_components(background, t.adj6, t.n6) == 1;
}

/// Endpoint test on a neighborhood mask: a single 26-neighbor, or some planar
/// cross-section in which the object is a curve ending at the center (exactly
/// one occupied ring voxel). The latter catches rim voxels of one-voxel-thick
/// surfaces.
inline bool is_endpoint_mask(std::uint32_t mask) {
  const auto& t = tables();
  const std::uint32_t object = mask & t.n26;
  if (std::popcount(object) == 1) return true;
  for (const auto& plane : t.planes) {
    int ring = 0;
    for (int r = 0; r < 8; ++r)
      if (object & (1u << plane[r])) ring |= 1 << r;
    if (t.curve_end[ring]) return true;
  }
  return false;
}

}  // namespace topo

/// 27-bit occupancy mask of the 3x3x3 block centered at p; voxels outside
/// the lattice count as empty.
inline std::uint32_t neighborhood_mask(const VoxelGrid& grid, const Index3& p) {
  std::uint32_t mask = 0;
  const auto& g = grid.geometry;
  const bool interior = p[0] > 0 && p[1] > 0 && p[2] > 0 && p[0] + 1 < g.dims[0] && p[1] + 1 < g.dims[1] &&
                        p[2] + 1 < g.dims[2];
  if (interior) {
    const std::size_t sy = static_cast<std::size_t>(g.dims[0]);
    const std::size_t sz = sy * static_cast<std::size_t>(g.dims[1]);
    const std::size_t base = g.linear(p) - 1 - sy - sz;
    int bit = 0;
    for (int dz = 0; dz < 3; ++dz)
      for (int dy = 0; dy < 3; ++dy) {
        const std::uint8_t* row = grid.occupancy.data() + base + dy * sy + dz * sz;
        for (int dx = 0; dx < 3; ++dx, ++bit)
          if (row[dx]) mask |= 1u << bit;
      }
    return mask;
  }
  int bit = 0;
  for (int dz = -1; dz <= 1; ++dz)
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx, ++bit)
        if (grid.at(p[0] + dx, p[1] + dy, p[2] + dz)) mask |= 1u << bit;
  return mask;
}

/// True iff removing occupied voxel p preserves topology: exactly one
/// 26-component of object voxels in N26(p)\{p} and exactly one 6-component of
/// background voxels in N18(p) that is 6-adjacent to p.
inline bool is_simple(const VoxelGrid& grid, const Index3& p) {
  if (!grid.at(p)) fail(ErrorCode::precondition, "is_simple called on an unoccupied voxel");
  return topo::is_simple_mask(neighborhood_mask(grid, p));
}

/// True iff p ends a digital curve or lies on the rim/corner of a surface.
inline bool is_endpoint(const VoxelGrid& grid, const Index3& p) {
  if (!grid.at(p)) fail(ErrorCode::precondition, "is_endpoint called on an unoccupied voxel");
  return topo::is_endpoint_mask(neighborhood_mask(grid, p));
}

}  // namespace medspec
