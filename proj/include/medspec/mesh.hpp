#pragma once

#include <Eigen/Core>
#include <Eigen/Eigenvalues>
#include <Eigen/Geometry>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "medspec/error.hpp"

namespace medspec {

using Vec3 = Eigen::Vector3d;
using Triangle = std::array<int, 3>;
using ScalarChannels = std::map<std::string, std::vector<double>>;

/// Triangulated boundary surface. Vertex order is significant: external label
/// and ground-truth files are index-aligned with it.
struct TriangleMesh {
  std::vector<Vec3> vertices;
  std::vector<Triangle> triangles;
  ScalarChannels channels;
  bool watertight = false;

  std::size_t vertex_count() const { return vertices.size(); }
  std::size_t triangle_count() const { return triangles.size(); }
};

struct BoundingBox {
  Vec3 min = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 max = Vec3::Constant(-std::numeric_limits<double>::infinity());

  void extend(const Vec3& p) {
    min = min.cwiseMin(p);
    max = max.cwiseMax(p);
  }
  Vec3 extent() const { return max - min; }
};

inline BoundingBox bounding_box(const std::vector<Vec3>& points) {
  BoundingBox box;
  for (const auto& p : points) box.extend(p);
  return box;
}

inline std::uint64_t edge_key(int a, int b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
         static_cast<std::uint32_t>(b);
}

/// Undirected edges, each listed once with first < second, sorted.
inline std::vector<std::pair<int, int>> unique_edges(const TriangleMesh& mesh) {
  std::vector<std::pair<int, int>> edges;
  edges.reserve(mesh.triangles.size() * 3);
  for (const auto& t : mesh.triangles) {
    for (int e = 0; e < 3; ++e) {
      int a = t[e];
      int b = t[(e + 1) % 3];
      if (a > b) std::swap(a, b);
      edges.emplace_back(a, b);
    }
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  return edges;
}

/// True iff every edge is shared by exactly two triangles.
inline bool is_watertight(const TriangleMesh& mesh) {
  if (mesh.triangles.empty()) return false;
  std::unordered_map<std::uint64_t, int> uses;
  uses.reserve(mesh.triangles.size() * 3);
  for (const auto& t : mesh.triangles)
    for (int e = 0; e < 3; ++e) ++uses[edge_key(t[e], t[(e + 1) % 3])];
  return std::all_of(uses.begin(), uses.end(), [](const auto& kv) { return kv.second == 2; });
}

inline double triangle_area(const TriangleMesh& mesh, const Triangle& t) {
  const Vec3& a = mesh.vertices[t[0]];
  const Vec3& b = mesh.vertices[t[1]];
  const Vec3& c = mesh.vertices[t[2]];
  return 0.5 * (b - a).cross(c - a).norm();
}

/// Validates indices, drops zero-area and repeated-index faces, and refreshes
/// the watertight flag. Vertices are never reordered or removed.
inline void finalize_mesh(TriangleMesh& mesh) {
  const int n = static_cast<int>(mesh.vertices.size());
  for (const auto& t : mesh.triangles)
    for (int idx : t)
      if (idx < 0 || idx >= n)
        fail(ErrorCode::index_range,
             "triangle references vertex " + std::to_string(idx) + " of " + std::to_string(n));
  std::erase_if(mesh.triangles, [&](const Triangle& t) {
    if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2]) return true;
    return !(triangle_area(mesh, t) > 0.0);
  });
  for (const auto& [name, values] : mesh.channels)
    if (values.size() != mesh.vertices.size())
      fail(ErrorCode::shape, "channel '" + name + "' length does not match vertex count");
  mesh.watertight = is_watertight(mesh);
}

/// Vertex adjacency lists (sorted, unique).
inline std::vector<std::vector<int>> vertex_neighbors(const TriangleMesh& mesh) {
  std::vector<std::vector<int>> adj(mesh.vertices.size());
  for (const auto& [a, b] : unique_edges(mesh)) {
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  for (auto& list : adj) std::sort(list.begin(), list.end());
  return adj;
}

/// Applies x -> rotation * x + translation to every vertex.
inline TriangleMesh transformed(TriangleMesh mesh, const Eigen::Matrix3d& rotation,
                                const Vec3& translation) {
  for (auto& v : mesh.vertices) v = rotation * v + translation;
  return mesh;
}

/// x -> rotation * x + translation.
struct RigidPose {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Vec3 translation = Vec3::Zero();
};

/// Pose that moves the area-weighted surface centroid to the origin and the
/// principal axes (descending variance) onto x, y, z. The x and y axis signs
/// make the third moment along them positive; z completes a right-handed
/// frame. Rigid copies of a shape get the same canonical coordinates unless
/// the shape has a repeated principal variance or a vanishing third moment.
inline RigidPose canonical_pose(const TriangleMesh& mesh) {
  if (mesh.triangles.empty()) fail(ErrorCode::empty_input, "mesh has no faces");
  double area = 0.0;
  Vec3 c = Vec3::Zero();
  std::vector<std::pair<Vec3, double>> samples;
  samples.reserve(mesh.triangles.size());
  for (const auto& t : mesh.triangles) {
    const double a = triangle_area(mesh, t);
    const Vec3 m = (mesh.vertices[t[0]] + mesh.vertices[t[1]] + mesh.vertices[t[2]]) / 3.0;
    samples.emplace_back(m, a);
    c += a * m;
    area += a;
  }
  if (!(area > 0.0)) fail(ErrorCode::data, "mesh has zero surface area");
  c /= area;
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (const auto& [m, a] : samples) cov += a * (m - c) * (m - c).transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(cov / area);
  Eigen::Matrix3d axes;
  for (int i = 0; i < 3; ++i) axes.col(i) = es.eigenvectors().col(2 - i);
  for (int i = 0; i < 2; ++i) {
    double m3 = 0.0;
    for (const auto& [m, a] : samples) m3 += a * std::pow(axes.col(i).dot(m - c), 3);
    if (m3 < 0) axes.col(i) = -axes.col(i);
  }
  axes.col(2) = axes.col(0).cross(axes.col(1));
  RigidPose pose;
  pose.rotation = axes.transpose();
  pose.translation = -pose.rotation * c;
  return pose;
}

}  // namespace medspec
