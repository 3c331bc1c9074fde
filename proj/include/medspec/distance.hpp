#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "medspec/voxel_grid.hpp"

namespace medspec {

/// Euclidean distance from each object voxel center to the nearest empty
/// voxel center. `feature` holds the linear index of that nearest empty
/// voxel, which makes the gradient direction exact.
struct DistanceField {
  GridGeometry geometry;
  std::vector<double> d;                ///< object units; 0 off the object
  std::vector<std::int64_t> squared;    ///< squared distance in voxel units
  std::vector<std::int32_t> feature;    ///< nearest empty voxel (linear index)

  double at(std::size_t idx) const { return d[idx]; }
};

namespace detail {

inline std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

/// One separable pass: out[x] = min_i (x - i)^2 + f[i] over finite sites,
/// with the winning site written to arg[x]. Lower envelope of parabolas with
/// integer separation points, so the minimum is exact; ties keep the lower
/// site.
inline void envelope_pass(const std::int64_t* f, int m, std::int64_t* out, int* arg, std::vector<int>& v,
                          std::vector<int>& t) {
  constexpr std::int64_t inf = std::numeric_limits<std::int64_t>::max();
  v.resize(m);
  t.resize(m);
  auto F = [&](std::int64_t x, int i) { return (x - i) * (x - i) + f[i]; };
  int k = -1;
  for (int u = 0; u < m; ++u) {
    if (f[u] == inf) continue;
    while (k >= 0 && F(t[k], v[k]) > F(t[k], u)) --k;
    if (k < 0) {
      k = 0;
      v[0] = u;
      t[0] = 0;
    } else {
      const int i = v[k];
      const std::int64_t sep =
          floor_div(static_cast<std::int64_t>(u) * u - static_cast<std::int64_t>(i) * i + f[u] - f[i], 2 * (u - i));
      const std::int64_t w = sep + 1;
      if (w < m) {
        ++k;
        v[k] = u;
        t[k] = static_cast<int>(w);
      }
    }
  }
  if (k < 0) {
    for (int x = 0; x < m; ++x) {
      out[x] = inf;
      arg[x] = -1;
    }
    return;
  }
  int j = 0;
  for (int x = 0; x < m; ++x) {
    while (j < k && t[j + 1] <= x) ++j;
    out[x] = F(x, v[j]);
    arg[x] = v[j];
  }
}

}  // namespace detail

/// Exact Euclidean distance transform (separable lower-envelope algorithm).
inline DistanceField distance_transform(const VoxelGrid& grid) {
  validate(grid);
  const auto& g = grid.geometry;
  const int nx = g.dims[0], ny = g.dims[1], nz = g.dims[2];
  const std::size_t total = g.size();
  std::size_t occupied = 0;
  for (auto v : grid.occupancy) occupied += v != 0;
  if (occupied == 0) fail(ErrorCode::empty_input, "grid has no occupied voxel");
  if (occupied == total) fail(ErrorCode::precondition, "grid has no empty voxel to measure distance to");

  constexpr std::int64_t inf = std::numeric_limits<std::int64_t>::max();
  std::vector<std::int64_t> sq(total, inf);
  std::vector<std::int32_t> feat(total, -1);

  // Pass along x: sites are empty voxels.
  {
    std::vector<std::int64_t> f(nx), out(nx);
    std::vector<int> arg(nx), v, t;
    for (int z = 0; z < nz; ++z)
      for (int y = 0; y < ny; ++y) {
        const std::size_t base = g.linear(0, y, z);
        for (int x = 0; x < nx; ++x) f[x] = grid.occupancy[base + x] ? inf : 0;
        detail::envelope_pass(f.data(), nx, out.data(), arg.data(), v, t);
        for (int x = 0; x < nx; ++x) {
          sq[base + x] = out[x];
          feat[base + x] = arg[x] < 0 ? -1 : static_cast<std::int32_t>(base + arg[x]);
        }
      }
  }
  // Passes along y and z carry the feature of the winning site.
  auto axis_pass = [&](int axis) {
    const int m = g.dims[axis];
    const int a1 = 0, b1 = axis == 1 ? 2 : 1;
    const int n1 = g.dims[a1], n2 = g.dims[b1];
    const std::size_t stride = axis == 1 ? static_cast<std::size_t>(nx) : static_cast<std::size_t>(nx) * ny;
    std::vector<std::int64_t> f(m), out(m);
    std::vector<std::int32_t> fin(m);
    std::vector<int> arg(m), v, t;
    for (int q = 0; q < n2; ++q)
      for (int p = 0; p < n1; ++p) {
        Index3 start{0, 0, 0};
        start[a1] = p;
        start[b1] = q;
        const std::size_t base = g.linear(start);
        for (int s = 0; s < m; ++s) {
          f[s] = sq[base + s * stride];
          fin[s] = feat[base + s * stride];
        }
        detail::envelope_pass(f.data(), m, out.data(), arg.data(), v, t);
        for (int s = 0; s < m; ++s) {
          sq[base + s * stride] = out[s];
          feat[base + s * stride] = arg[s] < 0 ? -1 : fin[arg[s]];
        }
      }
  };
  axis_pass(1);
  axis_pass(2);

  DistanceField df;
  df.geometry = g;
  df.d.assign(total, 0.0);
  df.squared = std::move(sq);
  df.feature = std::move(feat);
  for (std::size_t i = 0; i < total; ++i) {
    if (!grid.occupancy[i]) {
      df.squared[i] = 0;
      df.feature[i] = static_cast<std::int32_t>(i);
      continue;
    }
    df.d[i] = std::sqrt(static_cast<double>(df.squared[i])) * g.spacing;
  }
  return df;
}

}  // namespace medspec
