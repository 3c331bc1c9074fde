#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "medspec/mesh.hpp"
#include "medspec/text_io.hpp"

namespace medspec {

using Index3 = std::array<int, 3>;

/// Lattice geometry shared by every per-voxel field. Voxel (i,j,k) has its
/// center at origin + (i+0.5, j+0.5, k+0.5) * spacing.
struct GridGeometry {
  Index3 dims{0, 0, 0};
  double spacing = 1.0;
  Vec3 origin = Vec3::Zero();

  std::size_t size() const {
    return static_cast<std::size_t>(dims[0]) * static_cast<std::size_t>(dims[1]) *
           static_cast<std::size_t>(dims[2]);
  }
  std::size_t linear(int x, int y, int z) const {
    return static_cast<std::size_t>(x) +
           static_cast<std::size_t>(dims[0]) * (static_cast<std::size_t>(y) +
                                                 static_cast<std::size_t>(dims[1]) * static_cast<std::size_t>(z));
  }
  std::size_t linear(const Index3& p) const { return linear(p[0], p[1], p[2]); }
  Index3 unravel(std::size_t idx) const {
    const auto nx = static_cast<std::size_t>(dims[0]);
    const auto ny = static_cast<std::size_t>(dims[1]);
    return {static_cast<int>(idx % nx), static_cast<int>((idx / nx) % ny), static_cast<int>(idx / (nx * ny))};
  }
  bool contains(int x, int y, int z) const {
    return x >= 0 && y >= 0 && z >= 0 && x < dims[0] && y < dims[1] && z < dims[2];
  }
  Vec3 center(const Index3& p) const {
    return origin + spacing * Vec3(p[0] + 0.5, p[1] + 0.5, p[2] + 0.5);
  }
  Vec3 center(std::size_t idx) const { return center(unravel(idx)); }

  bool operator==(const GridGeometry& o) const {
    return dims == o.dims && spacing == o.spacing && origin == o.origin;
  }
};

/// Dense binary occupancy lattice.
struct VoxelGrid {
  GridGeometry geometry;
  std::vector<std::uint8_t> occupancy;

  VoxelGrid() = default;
  explicit VoxelGrid(const GridGeometry& g) : geometry(g), occupancy(g.size(), 0) {}

  const Index3& dims() const { return geometry.dims; }
  std::size_t size() const { return occupancy.size(); }
  bool at(int x, int y, int z) const {
    return geometry.contains(x, y, z) && occupancy[geometry.linear(x, y, z)] != 0;
  }
  bool at(const Index3& p) const { return at(p[0], p[1], p[2]); }
  void set(const Index3& p, bool v) { occupancy[geometry.linear(p)] = v ? 1 : 0; }
  std::size_t count() const {
    std::size_t n = 0;
    for (auto v : occupancy) n += v != 0;
    return n;
  }
};

inline void validate(const VoxelGrid& grid) {
  const auto& g = grid.geometry;
  if (g.dims[0] <= 0 || g.dims[1] <= 0 || g.dims[2] <= 0) fail(ErrorCode::shape, "grid dims must be positive");
  if (!(g.spacing > 0.0)) fail(ErrorCode::shape, "grid spacing must be positive");
  if (grid.occupancy.size() != g.size()) fail(ErrorCode::shape, "occupancy length does not match dims");
}

/// Text persistence: dims / spacing / origin followed by run lengths that
/// alternate empty, occupied, empty, ... in linear (x fastest) order.
inline void save_grid(const VoxelGrid& grid, const std::filesystem::path& path) {
  validate(grid);
  auto out = open_output(path);
  const auto& g = grid.geometry;
  out << "medial-grid 1\n";
  out << "dims " << g.dims[0] << ' ' << g.dims[1] << ' ' << g.dims[2] << '\n';
  out << "spacing " << format_g17(g.spacing) << '\n';
  out << "origin " << format_g17(g.origin.x()) << ' ' << format_g17(g.origin.y()) << ' '
      << format_g17(g.origin.z()) << '\n';
  std::vector<std::size_t> runs;
  std::uint8_t current = 0;
  std::size_t len = 0;
  for (auto v : grid.occupancy) {
    const std::uint8_t b = v ? 1 : 0;
    if (b == current) {
      ++len;
    } else {
      runs.push_back(len);
      current = b;
      len = 1;
    }
  }
  runs.push_back(len);
  out << "runs " << runs.size() << '\n';
  for (std::size_t i = 0; i < runs.size(); ++i) out << runs[i] << ((i % 16 == 15 || i + 1 == runs.size()) ? '\n' : ' ');
  if (!out) fail(ErrorCode::io, "write failed for " + path.string());
}

inline VoxelGrid load_grid(const std::filesystem::path& path) {
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
    if (tok.size() != 2 || tok[0] != "medial-grid" || tok[1] != "1") reader.error("not a medial-grid v1 file");
  }
  GridGeometry g;
  auto d = expect("dims", 3);
  for (int i = 0; i < 3; ++i) g.dims[i] = parse_number<int>(d[i], reader);
  g.spacing = parse_number<double>(expect("spacing", 1)[0], reader);
  auto o = expect("origin", 3);
  g.origin = Vec3(parse_number<double>(o[0], reader), parse_number<double>(o[1], reader),
                  parse_number<double>(o[2], reader));
  if (g.dims[0] <= 0 || g.dims[1] <= 0 || g.dims[2] <= 0 || !(g.spacing > 0)) reader.error("invalid geometry");
  const auto nruns = parse_number<std::size_t>(expect("runs", 1)[0], reader);
  VoxelGrid grid(g);
  std::size_t pos = 0, seen = 0;
  std::uint8_t value = 0;
  std::string line;
  while (seen < nruns && reader.next(line)) {
    for (auto tok : split_ws(line)) {
      const auto len = parse_number<std::size_t>(tok, reader);
      if (pos + len > grid.size()) reader.error("runs exceed grid size");
      std::fill_n(grid.occupancy.begin() + static_cast<std::ptrdiff_t>(pos), len, value);
      pos += len;
      value ^= 1;
      ++seen;
    }
  }
  if (seen != nruns || pos != grid.size()) reader.error("run lengths do not cover the grid");
  return grid;
}

}  // namespace medspec
