#pragma once

#include <cmath>
#include <filesystem>
#include <queue>
#include <vector>

#include "medspec/flux.hpp"
#include "medspec/topology.hpp"

namespace medspec {

/// One medial voxel: lattice position, inscribed radius (object units) and
/// its AOF value.
struct SkeletalPoint {
  Index3 voxel{0, 0, 0};
  double radius = 0.0;
  double aof = 0.0;
};

struct SkeletalPointSet {
  GridGeometry geometry;
  std::vector<SkeletalPoint> points;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
  Vec3 center(std::size_t i) const { return geometry.center(points[i].voxel); }
};

/// Medial strength is the negated AOF: with the gradient pointing away from
/// the nearest boundary point, flux through a small sphere is negative on
/// the medial locus and vanishes elsewhere.
inline double medial_strength(double aof) { return -aof; }

inline VoxelGrid skeleton_grid(const SkeletalPointSet& skel) {
  VoxelGrid grid(skel.geometry);
  for (const auto& p : skel.points) grid.set(p.voxel, true);
  return grid;
}

/// Heap-driven topology-preserving erosion. Boundary voxels are extracted
/// least-medial first (largest AOF); a simple voxel is removed unless it is
/// an endpoint whose medial strength exceeds `tau`, in which case it is kept
/// as a skeletal point. Neighbors that become simple are queued. Ties on the
/// key go to the smaller distance value, then to the lexicographically
/// smaller (x, y, z).
inline SkeletalPointSet thin(const VoxelGrid& grid, const AofField& aof, const DistanceField& df, double tau) {
  validate(grid);
  const auto& g = grid.geometry;
  if (!(aof.geometry == g) || !(df.geometry == g)) fail(ErrorCode::shape, "field geometry differs from grid");
  if (!std::isfinite(tau) || tau < 0.0) fail(ErrorCode::domain, "tau must be a finite nonnegative AOF magnitude");
  if (grid.count() == 0) fail(ErrorCode::empty_input, "grid has no occupied voxel");

  VoxelGrid work = grid;
  std::vector<std::uint8_t> frozen(g.size(), 0), queued(g.size(), 0);

  struct Entry {
    double key;
    double dist;
    std::uint64_t lex;
    std::size_t idx;
  };
  struct Lower {
    bool operator()(const Entry& a, const Entry& b) const {
      if (a.key != b.key) return a.key < b.key;
      if (a.dist != b.dist) return a.dist > b.dist;
      return a.lex > b.lex;
    }
  };
  const auto ny = static_cast<std::uint64_t>(g.dims[1]), nz = static_cast<std::uint64_t>(g.dims[2]);
  auto make_entry = [&](std::size_t idx) {
    const Index3 p = g.unravel(idx);
    const std::uint64_t lex = (static_cast<std::uint64_t>(p[0]) * ny + static_cast<std::uint64_t>(p[1])) * nz +
                              static_cast<std::uint64_t>(p[2]);
    return Entry{aof.value[idx], df.d[idx], lex, idx};
  };
  std::priority_queue<Entry, std::vector<Entry>, Lower> heap;

  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!work.occupancy[i]) continue;
    const Index3 p = g.unravel(i);
    const std::uint32_t mask = neighborhood_mask(work, p);
    if ((mask & topo::tables().n6) == topo::tables().n6) continue;  // not on the boundary
    if (topo::is_simple_mask(mask)) {
      heap.push(make_entry(i));
      queued[i] = 1;
    }
  }

  while (!heap.empty()) {
    const Entry top = heap.top();
    heap.pop();
    const std::size_t i = top.idx;
    queued[i] = 0;
    if (!work.occupancy[i] || frozen[i]) continue;
    const Index3 p = g.unravel(i);
    const std::uint32_t mask = neighborhood_mask(work, p);
    if (!topo::is_simple_mask(mask)) continue;
    if (topo::is_endpoint_mask(mask) && medial_strength(aof.value[i]) > tau) {
      frozen[i] = 1;
      continue;
    }
    work.occupancy[i] = 0;
    for (int dz = -1; dz <= 1; ++dz)
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          const Index3 q{p[0] + dx, p[1] + dy, p[2] + dz};
          if (!g.contains(q[0], q[1], q[2])) continue;
          const std::size_t j = g.linear(q);
          if (!work.occupancy[j] || frozen[j] || queued[j]) continue;
          if (topo::is_simple_mask(neighborhood_mask(work, q))) {
            heap.push(make_entry(j));
            queued[j] = 1;
          }
        }
  }

  SkeletalPointSet skel;
  skel.geometry = g;
  for (int x = 0; x < g.dims[0]; ++x)
    for (int y = 0; y < g.dims[1]; ++y)
      for (int z = 0; z < g.dims[2]; ++z) {
        const std::size_t i = g.linear(x, y, z);
        if (work.occupancy[i]) skel.points.push_back({{x, y, z}, df.d[i], aof.value[i]});
      }
  return skel;
}

/// Full medial extraction: distance transform, smoothed gradient, flux,
/// thinning.
inline SkeletalPointSet extract_medial_surface(const VoxelGrid& grid, double tau) {
  const DistanceField df = distance_transform(grid);
  const VectorField vf = smoothed_gradient_field(df);
  const AofField aof = average_outward_flux(vf, df);
  return thin(grid, aof, df, tau);
}

/// `x y z r lambda` table behind a grid-geometry header.
inline void save_skeleton(const SkeletalPointSet& skel, const std::filesystem::path& path) {
  auto out = open_output(path);
  const auto& g = skel.geometry;
  out << "medial-skeleton 1\n";
  out << "dims " << g.dims[0] << ' ' << g.dims[1] << ' ' << g.dims[2] << '\n';
  out << "spacing " << format_g17(g.spacing) << '\n';
  out << "origin " << format_g17(g.origin.x()) << ' ' << format_g17(g.origin.y()) << ' ' << format_g17(g.origin.z())
      << '\n';
  out << "points " << skel.points.size() << '\n';
  out << "# x y z r lambda\n";
  for (const auto& p : skel.points)
    out << p.voxel[0] << ' ' << p.voxel[1] << ' ' << p.voxel[2] << ' ' << format_g17(p.radius) << ' '
        << format_g17(p.aof) << '\n';
  if (!out) fail(ErrorCode::io, "write failed for " + path.string());
}

inline SkeletalPointSet load_skeleton(const std::filesystem::path& path) {
  LineReader reader(path);
  auto expect = [&](const char* key, std::size_t n) {
    std::string line = reader.require(key);
    auto tok = split_ws(line);
    if (tok.size() != n + 1 || tok[0] != key) reader.error(std::string("expected '") + key + "' line");
    return std::vector<std::string>(tok.begin() + 1, tok.end());
  };
  {
    std::string line = reader.require("header");
    auto tok = split_ws(line);
    if (tok.size() != 2 || tok[0] != "medial-skeleton" || tok[1] != "1") reader.error("not a medial-skeleton v1 file");
  }
  SkeletalPointSet skel;
  auto& g = skel.geometry;
  auto d = expect("dims", 3);
  for (int i = 0; i < 3; ++i) g.dims[i] = parse_number<int>(d[i], reader);
  g.spacing = parse_number<double>(expect("spacing", 1)[0], reader);
  auto o = expect("origin", 3);
  g.origin = Vec3(parse_number<double>(o[0], reader), parse_number<double>(o[1], reader),
                  parse_number<double>(o[2], reader));
  const auto n = parse_number<std::size_t>(expect("points", 1)[0], reader);
  skel.points.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::string line = reader.require("skeletal point");
    auto tok = split_ws(line);
    if (tok.size() != 5) reader.error("expected 5 columns: x y z r lambda");
    SkeletalPoint p;
    for (int c = 0; c < 3; ++c) p.voxel[c] = parse_number<int>(tok[c], reader);
    p.radius = parse_number<double>(tok[3], reader);
    p.aof = parse_number<double>(tok[4], reader);
    if (!g.contains(p.voxel[0], p.voxel[1], p.voxel[2])) reader.error("skeletal voxel outside grid");
    if (!(p.radius > 0)) reader.error("skeletal radius must be positive");
    skel.points.push_back(p);
  }
  return skel;
}

}  // namespace medspec
