#pragma once

// Synthetic watertight test solids. Every generator returns a finalized mesh
// with outward-facing triangles and a deterministic vertex order.

#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <tuple>
#include <vector>

#include "medspec/mesh.hpp"

namespace medspec::shapes {

namespace detail {

inline void orient_outward(TriangleMesh& mesh, const std::function<Vec3(const Vec3&)>& outward_hint) {
  for (auto& t : mesh.triangles) {
    const Vec3& a = mesh.vertices[t[0]];
    const Vec3& b = mesh.vertices[t[1]];
    const Vec3& c = mesh.vertices[t[2]];
    const Vec3 n = (b - a).cross(c - a);
    const Vec3 centroid = (a + b + c) / 3.0;
    if (n.dot(outward_hint(centroid)) < 0) std::swap(t[1], t[2]);
  }
}

}  // namespace detail

/// Axis-aligned box centered at the origin; each face split into
/// `subdiv` x `subdiv` quads.
inline TriangleMesh box(const Vec3& size, int subdiv = 1) {
  TriangleMesh mesh;
  std::map<std::tuple<int, int, int>, int> ids;
  auto vertex = [&](int i, int j, int k) {
    auto key = std::make_tuple(i, j, k);
    auto it = ids.find(key);
    if (it != ids.end()) return it->second;
    const Vec3 unit(static_cast<double>(i) / subdiv - 0.5, static_cast<double>(j) / subdiv - 0.5,
                    static_cast<double>(k) / subdiv - 0.5);
    mesh.vertices.push_back(unit.cwiseProduct(size));
    ids.emplace(key, static_cast<int>(mesh.vertices.size()) - 1);
    return static_cast<int>(mesh.vertices.size()) - 1;
  };
  for (int axis = 0; axis < 3; ++axis) {
    for (int side = 0; side <= 1; ++side) {
      for (int u = 0; u < subdiv; ++u) {
        for (int v = 0; v < subdiv; ++v) {
          auto at = [&](int a, int b) {
            int c[3];
            c[axis] = side * subdiv;
            c[(axis + 1) % 3] = a;
            c[(axis + 2) % 3] = b;
            return vertex(c[0], c[1], c[2]);
          };
          const int p00 = at(u, v), p10 = at(u + 1, v), p11 = at(u + 1, v + 1), p01 = at(u, v + 1);
          mesh.triangles.push_back({p00, p10, p11});
          mesh.triangles.push_back({p00, p11, p01});
        }
      }
    }
  }
  detail::orient_outward(mesh, [](const Vec3& c) { return c; });
  finalize_mesh(mesh);
  return mesh;
}

/// Unit-cube convenience: 8 vertices, 12 triangles when subdiv == 1.
inline TriangleMesh cube(double edge = 1.0, int subdiv = 1) { return box(Vec3::Constant(edge), subdiv); }

/// Subdivided icosahedron projected to a sphere.
inline TriangleMesh icosphere(double radius, int subdivisions) {
  TriangleMesh mesh;
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3> base = {{-1, t, 0}, {1, t, 0},  {-1, -t, 0}, {1, -t, 0}, {0, -1, t},  {0, 1, t},
                            {0, -1, -t}, {0, 1, -t}, {t, 0, -1},  {t, 0, 1},  {-t, 0, -1}, {-t, 0, 1}};
  for (auto& v : base) mesh.vertices.push_back(v.normalized());
  mesh.triangles = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
                    {11, 10, 2}, {10, 7, 6}, {7, 1, 8},  {3, 9, 4},  {3, 4, 2},   {3, 2, 6}, {3, 6, 8},
                    {3, 8, 9},  {4, 9, 5},  {2, 4, 11}, {6, 2, 10}, {8, 6, 7},   {9, 8, 1}};
  for (int s = 0; s < subdivisions; ++s) {
    std::map<std::uint64_t, int> mid;
    auto midpoint = [&](int a, int b) {
      const auto key = edge_key(a, b);
      auto it = mid.find(key);
      if (it != mid.end()) return it->second;
      mesh.vertices.push_back((mesh.vertices[a] + mesh.vertices[b]).normalized());
      const int id = static_cast<int>(mesh.vertices.size()) - 1;
      mid.emplace(key, id);
      return id;
    };
    std::vector<Triangle> next;
    next.reserve(mesh.triangles.size() * 4);
    for (const auto& tri : mesh.triangles) {
      const int a = midpoint(tri[0], tri[1]), b = midpoint(tri[1], tri[2]), c = midpoint(tri[2], tri[0]);
      next.push_back({tri[0], a, c});
      next.push_back({tri[1], b, a});
      next.push_back({tri[2], c, b});
      next.push_back({a, b, c});
    }
    mesh.triangles = std::move(next);
  }
  for (auto& v : mesh.vertices) v *= radius;
  detail::orient_outward(mesh, [](const Vec3& c) { return c; });
  finalize_mesh(mesh);
  return mesh;
}

/// Surface of revolution about z. `profile` maps z to the radius; the curve
/// is resampled to `rings` interior rings equally spaced in arc length, with
/// a pole vertex at each end of [z0, z1].
inline TriangleMesh revolution(const std::function<double(double)>& profile, double z0, double z1, int rings,
                               int segments) {
  // Dense polyline of the profile for arc-length resampling.
  const int dense = 4000;
  std::vector<double> zs(dense + 1), rs(dense + 1), arc(dense + 1, 0.0);
  for (int i = 0; i <= dense; ++i) {
    zs[i] = z0 + (z1 - z0) * i / dense;
    rs[i] = (i == 0 || i == dense) ? 0.0 : std::max(0.0, profile(zs[i]));
    if (i > 0) arc[i] = arc[i - 1] + std::hypot(zs[i] - zs[i - 1], rs[i] - rs[i - 1]);
  }
  TriangleMesh mesh;
  mesh.vertices.emplace_back(0, 0, z0);
  std::size_t cursor = 0;
  for (int r = 1; r <= rings; ++r) {
    const double target = arc[dense] * r / (rings + 1);
    while (cursor + 1 < arc.size() && arc[cursor + 1] < target) ++cursor;
    const double f = (target - arc[cursor]) / std::max(1e-300, arc[cursor + 1] - arc[cursor]);
    const double z = zs[cursor] + f * (zs[cursor + 1] - zs[cursor]);
    const double rad = rs[cursor] + f * (rs[cursor + 1] - rs[cursor]);
    for (int s = 0; s < segments; ++s) {
      const double phi = 2.0 * std::numbers::pi * s / segments;
      mesh.vertices.emplace_back(rad * std::cos(phi), rad * std::sin(phi), z);
    }
  }
  mesh.vertices.emplace_back(0, 0, z1);
  const int top = static_cast<int>(mesh.vertices.size()) - 1;
  auto ring = [&](int r, int s) { return 1 + (r - 1) * segments + (s % segments); };
  for (int s = 0; s < segments; ++s) mesh.triangles.push_back({0, ring(1, s + 1), ring(1, s)});
  for (int r = 1; r < rings; ++r)
    for (int s = 0; s < segments; ++s) {
      mesh.triangles.push_back({ring(r, s), ring(r, s + 1), ring(r + 1, s + 1)});
      mesh.triangles.push_back({ring(r, s), ring(r + 1, s + 1), ring(r + 1, s)});
    }
  for (int s = 0; s < segments; ++s) mesh.triangles.push_back({top, ring(rings, s), ring(rings, s + 1)});
  finalize_mesh(mesh);
  return mesh;
}

/// Capped solid cylinder along z, centered at the origin. Caps are built from
/// `cap_rings` concentric rings around a center vertex.
inline TriangleMesh cylinder(double radius, double length, int segments, int length_divs, int cap_rings = 3) {
  TriangleMesh mesh;
  const double h = length / 2.0;
  auto add = [&](double x, double y, double z) {
    mesh.vertices.emplace_back(x, y, z);
    return static_cast<int>(mesh.vertices.size()) - 1;
  };
  // Rings from the bottom cap center out to the wall, up the wall, and in to the top center.
  std::vector<std::pair<double, double>> rings;  // (radius, z)
  for (int c = 1; c <= cap_rings; ++c) rings.emplace_back(radius * c / cap_rings, -h);
  for (int l = 1; l < length_divs; ++l) rings.emplace_back(radius, -h + length * l / length_divs);
  for (int c = cap_rings; c >= 1; --c) rings.emplace_back(radius * c / cap_rings, h);
  const int bottom = add(0, 0, -h);
  std::vector<int> first(rings.size());
  for (std::size_t r = 0; r < rings.size(); ++r) {
    first[r] = static_cast<int>(mesh.vertices.size());
    for (int s = 0; s < segments; ++s) {
      const double phi = 2.0 * std::numbers::pi * s / segments;
      add(rings[r].first * std::cos(phi), rings[r].first * std::sin(phi), rings[r].second);
    }
  }
  const int top = add(0, 0, h);
  auto at = [&](std::size_t r, int s) { return first[r] + (s % segments); };
  for (int s = 0; s < segments; ++s) mesh.triangles.push_back({bottom, at(0, s + 1), at(0, s)});
  for (std::size_t r = 0; r + 1 < rings.size(); ++r)
    for (int s = 0; s < segments; ++s) {
      mesh.triangles.push_back({at(r, s), at(r, s + 1), at(r + 1, s + 1)});
      mesh.triangles.push_back({at(r, s), at(r + 1, s + 1), at(r + 1, s)});
    }
  for (int s = 0; s < segments; ++s) mesh.triangles.push_back({top, at(rings.size() - 1, s), at(rings.size() - 1, s + 1)});
  detail::orient_outward(mesh, [h, radius](const Vec3& c) {
    if (std::abs(c.z()) > h - 1e-9 * (h + radius)) return Vec3(0, 0, c.z());
    return Vec3(c.x(), c.y(), 0);
  });
  finalize_mesh(mesh);
  return mesh;
}

/// Torus in the xy plane: `major` is the tube-center radius, `minor` the tube radius.
inline TriangleMesh torus(double major, double minor, int nu, int nv) {
  TriangleMesh mesh;
  for (int i = 0; i < nu; ++i) {
    const double u = 2.0 * std::numbers::pi * i / nu;
    for (int j = 0; j < nv; ++j) {
      const double v = 2.0 * std::numbers::pi * j / nv;
      const double rr = major + minor * std::cos(v);
      mesh.vertices.emplace_back(rr * std::cos(u), rr * std::sin(u), minor * std::sin(v));
    }
  }
  auto at = [&](int i, int j) { return (i % nu) * nv + (j % nv); };
  for (int i = 0; i < nu; ++i)
    for (int j = 0; j < nv; ++j) {
      mesh.triangles.push_back({at(i, j), at(i + 1, j), at(i + 1, j + 1)});
      mesh.triangles.push_back({at(i, j), at(i + 1, j + 1), at(i, j + 1)});
    }
  detail::orient_outward(mesh, [major](const Vec3& c) {
    Vec3 ring(c.x(), c.y(), 0);
    if (ring.norm() > 0) ring = ring.normalized() * major;
    return Vec3(c - ring);
  });
  finalize_mesh(mesh);
  return mesh;
}

/// Two balls of radius `ball_radius` centered at z = +-half_span joined by a
/// bar of radius `bar_radius`.
inline TriangleMesh dumbbell(double ball_radius, double bar_radius, double half_span, int rings, int segments) {
  auto profile = [=](double z) {
    double r = 0.0;
    for (double c : {-half_span, half_span}) {
      const double dz = z - c;
      if (std::abs(dz) <= ball_radius) r = std::max(r, std::sqrt(ball_radius * ball_radius - dz * dz));
    }
    if (std::abs(z) <= half_span) r = std::max(r, bar_radius);
    return r;
  };
  return revolution(profile, -half_span - ball_radius, half_span + ball_radius, rings, segments);
}

/// Tube swept along a polyline with per-sample radii and flat end caps.
/// Poses that share sample counts share vertex indexing, so vertex i of one
/// pose corresponds to vertex i of another.
inline TriangleMesh tube(const std::vector<Vec3>& centerline, const std::vector<double>& radii, int segments,
                         int cap_rings = 2) {
  if (centerline.size() < 2 || radii.size() != centerline.size())
    fail(ErrorCode::shape, "tube needs >= 2 centerline samples and one radius per sample");
  const std::size_t m = centerline.size();
  std::vector<Vec3> tangents(m);
  for (std::size_t i = 0; i < m; ++i) {
    const Vec3 a = centerline[i == 0 ? 0 : i - 1];
    const Vec3 b = centerline[i + 1 == m ? m - 1 : i + 1];
    tangents[i] = (b - a).normalized();
  }
  // Rotation-minimizing frames by double reflection.
  std::vector<Vec3> normals(m);
  Vec3 seed = std::abs(tangents[0].z()) < 0.9 ? Vec3::UnitZ() : Vec3::UnitX();
  normals[0] = (seed - seed.dot(tangents[0]) * tangents[0]).normalized();
  for (std::size_t i = 0; i + 1 < m; ++i) {
    const Vec3 v1 = centerline[i + 1] - centerline[i];
    const double c1 = v1.squaredNorm();
    const Vec3 rL = normals[i] - (2.0 / c1) * v1.dot(normals[i]) * v1;
    const Vec3 tL = tangents[i] - (2.0 / c1) * v1.dot(tangents[i]) * v1;
    const Vec3 v2 = tangents[i + 1] - tL;
    const double c2 = v2.squaredNorm();
    normals[i + 1] = c2 > 0 ? Vec3(rL - (2.0 / c2) * v2.dot(rL) * v2) : rL;
    normals[i + 1] = (normals[i + 1] - normals[i + 1].dot(tangents[i + 1]) * tangents[i + 1]).normalized();
  }
  TriangleMesh mesh;
  auto ring_point = [&](std::size_t i, double scale, int s) {
    const double phi = 2.0 * std::numbers::pi * s / segments;
    const Vec3 binormal = tangents[i].cross(normals[i]);
    return Vec3(centerline[i] + scale * radii[i] * (std::cos(phi) * normals[i] + std::sin(phi) * binormal));
  };
  struct RingSpec {
    std::size_t sample;
    double scale;
  };
  std::vector<RingSpec> rings;
  for (int c = 1; c <= cap_rings; ++c) rings.push_back({0, static_cast<double>(c) / cap_rings});
  for (std::size_t i = 1; i + 1 < m; ++i) rings.push_back({i, 1.0});
  for (int c = cap_rings; c >= 1; --c) rings.push_back({m - 1, static_cast<double>(c) / cap_rings});
  mesh.vertices.push_back(centerline.front());
  for (const auto& r : rings)
    for (int s = 0; s < segments; ++s) mesh.vertices.push_back(ring_point(r.sample, r.scale, s));
  mesh.vertices.push_back(centerline.back());
  const int last = static_cast<int>(mesh.vertices.size()) - 1;
  auto at = [&](std::size_t r, int s) { return 1 + static_cast<int>(r) * segments + (s % segments); };
  for (int s = 0; s < segments; ++s) mesh.triangles.push_back({0, at(0, s), at(0, s + 1)});
  for (std::size_t r = 0; r + 1 < rings.size(); ++r)
    for (int s = 0; s < segments; ++s) {
      mesh.triangles.push_back({at(r, s), at(r + 1, s), at(r + 1, s + 1)});
      mesh.triangles.push_back({at(r, s), at(r + 1, s + 1), at(r, s + 1)});
    }
  for (int s = 0; s < segments; ++s) mesh.triangles.push_back({last, at(rings.size() - 1, s + 1), at(rings.size() - 1, s)});
  finalize_mesh(mesh);
  return mesh;
}

/// Prism over a union of unit cells: `mask[row][col]` marks occupied cells of
/// size `cell`; the prism spans z in [-height/2, height/2] with `height_divs`
/// wall subdivisions. Cells must not touch only at corners.
inline TriangleMesh prism(const std::vector<std::vector<int>>& mask, double cell, double height, int height_divs) {
  const int rows = static_cast<int>(mask.size());
  const int cols = rows ? static_cast<int>(mask[0].size()) : 0;
  auto filled = [&](int r, int c) { return r >= 0 && c >= 0 && r < rows && c < cols && mask[r][c] != 0; };
  TriangleMesh mesh;
  std::map<std::tuple<int, int, int>, int> ids;
  auto vertex = [&](int gx, int gy, int layer) {
    auto key = std::make_tuple(gx, gy, layer);
    auto it = ids.find(key);
    if (it != ids.end()) return it->second;
    mesh.vertices.emplace_back(gx * cell, gy * cell, -height / 2 + height * layer / height_divs);
    ids.emplace(key, static_cast<int>(mesh.vertices.size()) - 1);
    return static_cast<int>(mesh.vertices.size()) - 1;
  };
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      if (!filled(r, c)) continue;
      for (int layer : {0, height_divs}) {
        const int a = vertex(c, r, layer), b = vertex(c + 1, r, layer), d = vertex(c + 1, r + 1, layer),
                  e = vertex(c, r + 1, layer);
        if (layer == 0) {
          mesh.triangles.push_back({a, d, b});
          mesh.triangles.push_back({a, e, d});
        } else {
          mesh.triangles.push_back({a, b, d});
          mesh.triangles.push_back({a, d, e});
        }
      }
      // Walls on every cell side that borders an empty cell.
      const int sides[4][4] = {{0, -1, 0, 0}, {0, 1, 0, 1}, {-1, 0, 0, 0}, {1, 0, 1, 0}};
      for (const auto& sd : sides) {
        if (filled(r + sd[1], c + sd[0])) continue;
        int x0, y0, x1, y1;
        if (sd[1] != 0) {
          x0 = c;
          x1 = c + 1;
          y0 = y1 = r + sd[3];
        } else {
          y0 = r;
          y1 = r + 1;
          x0 = x1 = c + sd[2];
        }
        for (int l = 0; l < height_divs; ++l) {
          const int a = vertex(x0, y0, l), b = vertex(x1, y1, l), d = vertex(x1, y1, l + 1), e = vertex(x0, y0, l + 1);
          mesh.triangles.push_back({a, b, d});
          mesh.triangles.push_back({a, d, e});
        }
      }
    }
  // Outward orientation from the wall/cap geometry.
  for (auto& t : mesh.triangles) {
    const Vec3& a = mesh.vertices[t[0]];
    const Vec3& b = mesh.vertices[t[1]];
    const Vec3& cc = mesh.vertices[t[2]];
    const Vec3 n = (b - a).cross(cc - a);
    const Vec3 centroid = (a + b + cc) / 3.0;
    Vec3 hint;
    if (std::abs(n.z()) > 0) {
      hint = Vec3(0, 0, centroid.z());
    } else {
      // Probe just beyond the wall: outward if that cell is empty.
      const Vec3 probe = centroid + 1e-3 * cell * n.normalized();
      const int pc = static_cast<int>(std::floor(probe.x() / cell));
      const int pr = static_cast<int>(std::floor(probe.y() / cell));
      hint = filled(pr, pc) ? Vec3(-n) : n;
    }
    if (n.dot(hint) < 0) std::swap(t[1], t[2]);
  }
  finalize_mesh(mesh);
  return mesh;
}

/// L-shaped solid: a 3x3 block grid with the upper-right 2x2 removed.
inline TriangleMesh l_solid(double cell, double height, int cell_subdiv, int height_divs) {
  const int n = 3 * cell_subdiv;
  std::vector<std::vector<int>> mask(n, std::vector<int>(n, 0));
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) mask[r][c] = (r < cell_subdiv || c < cell_subdiv) ? 1 : 0;
  return prism(mask, cell / cell_subdiv, height, height_divs);
}

/// Marching tetrahedra over a signed field (negative inside) sampled on a
/// lattice of `cells` per axis spanning [lo, hi]. Uses the six-tetrahedron
/// split of each cube along its main diagonal, which is consistent across
/// neighboring cubes, so the output is closed whenever the zero set stays
/// inside the box.
inline TriangleMesh marching_tetrahedra(const std::function<double(const Vec3&)>& field, const Vec3& lo,
                                        const Vec3& hi, int cells) {
  const int n = cells + 1;
  const Vec3 step = (hi - lo) / cells;
  std::vector<double> values(static_cast<std::size_t>(n) * n * n);
  auto id = [n](int i, int j, int k) { return static_cast<std::size_t>(i) + static_cast<std::size_t>(n) * (j + static_cast<std::size_t>(n) * k); };
  auto pos = [&](std::size_t v) {
    const int i = static_cast<int>(v % n), j = static_cast<int>((v / n) % n), k = static_cast<int>(v / (static_cast<std::size_t>(n) * n));
    return Vec3(lo + step.cwiseProduct(Vec3(i, j, k)));
  };
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        double v = field(lo + step.cwiseProduct(Vec3(i, j, k)));
        if (v == 0.0) v = 1e-12;
        values[id(i, j, k)] = v;
      }
  TriangleMesh mesh;
  std::map<std::pair<std::size_t, std::size_t>, int> edge_vertex;
  auto cut = [&](std::size_t a, std::size_t b) {
    if (a > b) std::swap(a, b);
    auto key = std::make_pair(a, b);
    auto it = edge_vertex.find(key);
    if (it != edge_vertex.end()) return it->second;
    const double fa = values[a], fb = values[b];
    const double t = fa / (fa - fb);
    mesh.vertices.push_back(pos(a) + t * (pos(b) - pos(a)));
    edge_vertex.emplace(key, static_cast<int>(mesh.vertices.size()) - 1);
    return static_cast<int>(mesh.vertices.size()) - 1;
  };
  auto emit = [&](int a, int b, int c, const Vec3& outward) {
    const Vec3 nrm = (mesh.vertices[b] - mesh.vertices[a]).cross(mesh.vertices[c] - mesh.vertices[a]);
    if (nrm.dot(outward) < 0) std::swap(b, c);
    mesh.triangles.push_back({a, b, c});
  };
  static const int tets[6][4] = {{0, 1, 3, 7}, {0, 3, 2, 7}, {0, 2, 6, 7}, {0, 6, 4, 7}, {0, 4, 5, 7}, {0, 5, 1, 7}};
  for (int k = 0; k < cells; ++k)
    for (int j = 0; j < cells; ++j)
      for (int i = 0; i < cells; ++i) {
        std::size_t corner[8];
        for (int c = 0; c < 8; ++c) corner[c] = id(i + (c & 1), j + ((c >> 1) & 1), k + ((c >> 2) & 1));
        for (const auto& tet : tets) {
          std::vector<std::size_t> in, out;
          for (int c : tet) (values[corner[c]] < 0 ? in : out).push_back(corner[c]);
          if (in.empty() || out.empty()) continue;
          Vec3 cin = Vec3::Zero(), cout = Vec3::Zero();
          for (auto v : in) cin += pos(v) / static_cast<double>(in.size());
          for (auto v : out) cout += pos(v) / static_cast<double>(out.size());
          const Vec3 outward = cout - cin;
          if (in.size() == 1 || out.size() == 1) {
            const auto lone = in.size() == 1 ? in[0] : out[0];
            const auto& others = in.size() == 1 ? out : in;
            emit(cut(lone, others[0]), cut(lone, others[1]), cut(lone, others[2]), outward);
          } else {
            const int a = cut(in[0], out[0]), b = cut(in[0], out[1]), c = cut(in[1], out[1]), d = cut(in[1], out[0]);
            emit(a, b, c, outward);
            emit(a, c, d, outward);
          }
        }
      }
  finalize_mesh(mesh);
  return mesh;
}

/// Capped cylinder (axis z) with a torus-segment handle on its +x side; genus 1.
inline TriangleMesh cylinder_with_handle(double radius, double length, int cells) {
  const double h = length / 2.0;
  const double handle_major = 0.32 * length;
  const double handle_minor = 0.22 * radius;
  const Vec3 handle_center(radius, 0, 0);
  auto field = [=](const Vec3& p) {
    const Eigen::Vector2d q(std::hypot(p.x(), p.y()) - radius, std::abs(p.z()) - h);
    const double cyl = std::min(std::max(q.x(), q.y()), 0.0) + q.cwiseMax(0.0).norm();
    // Torus in the xz plane around handle_center.
    const Vec3 d = p - handle_center;
    const double ring = std::hypot(d.x(), d.z()) - handle_major;
    const double tor = std::hypot(ring, d.y()) - handle_minor;
    return std::min(cyl, tor);
  };
  const double margin = 0.1 * length;
  const Vec3 lo(-radius - margin, -radius - margin, -h - margin);
  const Vec3 hi(radius + handle_major + handle_minor + margin, radius + margin, h + margin);
  return marching_tetrahedra(field, lo, hi, cells);
}

}  // namespace medspec::shapes
