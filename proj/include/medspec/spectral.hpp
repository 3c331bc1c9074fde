#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "medspec/eigensolver.hpp"
#include "medspec/kdtree.hpp"
#include "medspec/recon.hpp"
#include "medspec/sphere_overlap.hpp"

namespace medspec {

/// Boundary vertex -> skeletal point association.
struct BoundaryMedialMap {
  std::vector<int> skeletal;      ///< skeletal index per vertex
  std::vector<double> distance;   ///< vertex to matched surface voxel center

  std::size_t size() const { return skeletal.size(); }
};

/// Occupied voxels of `grid` with at least one empty (or out-of-lattice)
/// 6-neighbor.
inline std::vector<std::size_t> surface_voxels(const VoxelGrid& grid) {
  const auto& g = grid.geometry;
  std::vector<std::size_t> out;
  static constexpr int off[6][3] = {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}};
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!grid.occupancy[i]) continue;
    const Index3 p = g.unravel(i);
    for (const auto& o : off)
      if (!grid.at(p[0] + o[0], p[1] + o[1], p[2] + o[2])) {
        out.push_back(i);
        break;
      }
  }
  return out;
}

/// Each vertex adopts the generator of the nearest surface voxel of the
/// reconstruction.
inline BoundaryMedialMap map_boundary_to_medial(const TriangleMesh& mesh, const SkeletalPointSet& skel,
                                                const ReconGrid& recon) {
  const auto& g = recon.grid.geometry;
  if (recon.generator.size() != g.size()) fail(ErrorCode::shape, "generator map does not match grid");
  const auto surf = surface_voxels(recon.grid);
  if (surf.empty()) fail(ErrorCode::precondition, "reconstruction is empty");
  std::vector<double> pts;
  pts.reserve(surf.size() * 3);
  for (std::size_t idx : surf) {
    const Vec3 c = g.center(idx);
    pts.insert(pts.end(), {c.x(), c.y(), c.z()});
  }
  const KdTree tree(std::move(pts), 3);
  BoundaryMedialMap map;
  map.skeletal.resize(mesh.vertices.size());
  map.distance.resize(mesh.vertices.size());
  for (std::size_t v = 0; v < mesh.vertices.size(); ++v) {
    const auto hit = tree.nearest(mesh.vertices[v].data());
    const std::int32_t gen = recon.generator[surf[hit.index]];
    if (gen < 0 || static_cast<std::size_t>(gen) >= skel.size())
      fail(ErrorCode::index_range, "reconstruction generator outside the skeleton");
    map.skeletal[v] = gen;
    map.distance[v] = std::sqrt(hit.dist2);
  }
  return map;
}

enum class MassForm { radius, volume };

struct GraphOptions {
  int K = 16;              ///< medial-coupling partners per vertex
  double epsilon = 1e-6;   ///< floor fraction for non-overlapping mesh edges
  MassForm mass = MassForm::radius;
};

struct MedialGraph {
  int n = 0;
  SparseMatrix W;           ///< symmetric, zero diagonal
  Eigen::VectorXd dsym;     ///< mass per vertex
  std::size_t mesh_edges = 0, shared_edges = 0, overlap_edges = 0, floor_edges = 0;

  Eigen::VectorXd degree() const {
    Eigen::VectorXd d = Eigen::VectorXd::Zero(n);
    for (int c = 0; c < W.outerSize(); ++c)
      for (SparseMatrix::InnerIterator it(W, c); it; ++it) d[it.row()] += it.value();
    return d;
  }
  SparseMatrix laplacian() const {
    SparseMatrix D(n, n);
    D.reserve(Eigen::VectorXi::Ones(n));
    const Eigen::VectorXd d = degree();
    for (int i = 0; i < n; ++i) D.insert(i, i) = d[i];
    SparseMatrix L = D - W;
    L.makeCompressed();
    return L;
  }
};

inline std::vector<double> vertex_radii(const BoundaryMedialMap& map, const SkeletalPointSet& skel) {
  std::vector<double> r(map.size());
  for (std::size_t i = 0; i < map.size(); ++i) r[i] = skel.points.at(map.skeletal[i]).radius;
  return r;
}

/// Edge set: mesh edges, all pairs of vertices sharing a skeletal point, and
/// for every vertex the <= K vertices whose balls overlap its ball most.
/// Every edge weighs the overlap volume of the two balls; mesh edges with
/// disjoint balls get a small floor weight instead.
/// Skeletal centers are the voxel centers of `skel.geometry`.
inline MedialGraph build_graph(const TriangleMesh& mesh, const BoundaryMedialMap& map, const SkeletalPointSet& skel,
                               const GraphOptions& opt = {}) {
  const int n = static_cast<int>(mesh.vertices.size());
  if (n < 2) fail(ErrorCode::empty_input, "mesh needs at least two vertices");
  if (static_cast<int>(map.size()) != n) fail(ErrorCode::shape, "map size differs from vertex count");
  if (opt.K < 0) fail(ErrorCode::domain, "K must be nonnegative");
  if (!(opt.epsilon > 0)) fail(ErrorCode::domain, "epsilon must be positive");
  for (int s : map.skeletal)
    if (s < 0 || static_cast<std::size_t>(s) >= skel.size()) fail(ErrorCode::index_range, "map index outside skeleton");

  // Group vertices by skeletal point (vertex lists ascend).
  std::map<int, std::vector<int>> groups;
  for (int v = 0; v < n; ++v) groups[map.skeletal[v]].push_back(v);
  std::vector<int> spheres;
  for (const auto& [s, vs] : groups) spheres.push_back(s);
  const int S = static_cast<int>(spheres.size());

  // Overlaps are evaluated in lattice units (integer center offsets, radii
  // snapped to sqrt of an integer when they are lattice distances), so equal
  // configurations tie exactly wherever the grid sits in space.
  const double h = skel.geometry.spacing;
  if (!(h > 0)) fail(ErrorCode::shape, "skeleton has no grid spacing");
  auto lattice_center = [&](int s) {
    const Index3& p = skel.points[s].voxel;
    return Vec3(p[0], p[1], p[2]);
  };
  auto lattice_radius = [&](int s) {
    const double q = std::pow(skel.points[s].radius / h, 2);
    const double qi = std::round(q);
    return std::abs(q - qi) <= 1e-9 * std::max(1.0, q) ? std::sqrt(qi) : std::sqrt(q);
  };
  auto overlap = [&](int s, int t) {
    return sphere_overlap_volume(lattice_center(s), lattice_radius(s), lattice_center(t), lattice_radius(t)) * h * h * h;
  };
  std::vector<Vec3> centers(S);
  std::vector<double> radii(S);
  double rmax = 0.0;
  std::vector<double> buf;
  for (int a = 0; a < S; ++a) {
    centers[a] = lattice_center(spheres[a]);
    radii[a] = lattice_radius(spheres[a]);
    rmax = std::max(rmax, radii[a]);
    buf.insert(buf.end(), {centers[a].x(), centers[a].y(), centers[a].z()});
  }
  const KdTree tree(std::move(buf), 3);

  std::vector<std::uint64_t> keys;
  auto add = [&](int i, int j) {
    if (i == j) return;
    if (i > j) std::swap(i, j);
    keys.push_back(static_cast<std::uint64_t>(i) << 32 | static_cast<std::uint32_t>(j));
  };
  MedialGraph g;
  g.n = n;
  const auto mesh_pairs = unique_edges(mesh);
  for (const auto& [a, b] : mesh_pairs) add(a, b);
  for (const auto& [s, vs] : groups)
    for (std::size_t a = 0; a < vs.size(); ++a)
      for (std::size_t b = a + 1; b < vs.size(); ++b) add(vs[a], vs[b]);

  if (opt.K > 0) {
    for (int a = 0; a < S; ++a) {
      const double reach = radii[a] + rmax;
      auto hits = tree.radius(centers[a].data(), reach * reach);
      std::vector<std::pair<double, int>> cand;  // (overlap, sphere slot)
      for (const auto& hit : hits) {
        if (hit.index == a) continue;
        const double ov = sphere_overlap_volume(centers[a], radii[a], centers[hit.index], radii[hit.index]);
        if (ov > 0) cand.emplace_back(ov, hit.index);
      }
      std::sort(cand.begin(), cand.end(), [](const auto& x, const auto& y) { return x.first > y.first; });
      std::vector<int> partners;
      for (std::size_t c = 0; c < cand.size() && static_cast<int>(partners.size()) < opt.K;) {
        std::size_t e = c;
        std::vector<int> tier;
        while (e < cand.size() && cand[e].first == cand[c].first) {
          const auto& vs = groups[spheres[cand[e].second]];
          tier.insert(tier.end(), vs.begin(), vs.end());
          ++e;
        }
        std::sort(tier.begin(), tier.end());
        for (int v : tier) {
          if (static_cast<int>(partners.size()) >= opt.K) break;
          partners.push_back(v);
        }
        c = e;
      }
      for (int i : groups[spheres[a]])
        for (int j : partners) add(i, j);
    }
  }
  std::sort(keys.begin(), keys.end());
  keys.erase(std::unique(keys.begin(), keys.end()), keys.end());

  g.mesh_edges = mesh_pairs.size();

  const auto r = vertex_radii(map, skel);
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(keys.size() * 2);
  std::vector<std::vector<int>> adj(n);
  for (std::uint64_t key : keys) {
    const int i = static_cast<int>(key >> 32), j = static_cast<int>(key & 0xffffffffu);
    double w;
    if (map.skeletal[i] == map.skeletal[j]) {
      w = ball_volume(r[i]);
      ++g.shared_edges;
    } else {
      w = overlap(map.skeletal[i], map.skeletal[j]);
      if (w > 0) {
        ++g.overlap_edges;
      } else {
        // Only mesh edges can reach this branch.
        w = opt.epsilon * ball_volume(std::min(r[i], r[j]));
        ++g.floor_edges;
      }
    }
    trip.emplace_back(i, j, w);
    trip.emplace_back(j, i, w);
    adj[i].push_back(j);
    adj[j].push_back(i);
  }
  g.W.resize(n, n);
  g.W.setFromTriplets(trip.begin(), trip.end());
  g.W.makeCompressed();

  g.dsym.resize(n);
  for (int i = 0; i < n; ++i) g.dsym[i] = opt.mass == MassForm::radius ? r[i] : ball_volume(r[i]);

  std::vector<char> seen(n, 0);
  std::vector<int> stack{0};
  seen[0] = 1;
  int reached = 1;
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    for (int u : adj[v])
      if (!seen[u]) {
        seen[u] = 1;
        ++reached;
        stack.push_back(u);
      }
  }
  if (reached != n)
    fail(ErrorCode::connectivity, "medial graph is disconnected (" + std::to_string(reached) + " of " +
                                      std::to_string(n) + " vertices reachable); process components separately");
  return g;
}

/// k smallest nonzero eigenpairs of (D_deg - W) E = lambda D E.
struct SpectralEmbedding {
  Eigen::VectorXd eigenvalues;  ///< ascending, trivial zero removed
  Eigen::MatrixXd coords;       ///< n x k; column i is eigenvector i
  Eigen::VectorXd mass;         ///< D^sym diagonal (empty when loaded from file)

  int k() const { return static_cast<int>(eigenvalues.size()); }
  int n() const { return static_cast<int>(coords.rows()); }
};

/// Flips each column so its entry of largest magnitude (first on ties) is
/// positive.
inline void fix_signs(Eigen::MatrixXd& vectors) {
  for (int j = 0; j < vectors.cols(); ++j) {
    Eigen::Index arg = 0;
    double best = -1.0;
    for (Eigen::Index i = 0; i < vectors.rows(); ++i)
      if (std::abs(vectors(i, j)) > best) {
        best = std::abs(vectors(i, j));
        arg = i;
      }
    if (vectors(arg, j) < 0) vectors.col(j) = -vectors.col(j);
  }
}

inline SpectralEmbedding solve_eigens(const MedialGraph& g, int k, const EigenOptions& opt = {}) {
  if (k < 1 || k >= g.n) fail(ErrorCode::domain, "k must lie in [1, n-1]");
  const SparseMatrix L = g.laplacian();
  const EigenResult res = smallest_generalized(L, g.dsym, k + 1, opt);
  SpectralEmbedding emb;
  emb.eigenvalues = res.values.tail(k).cwiseMax(0.0);
  emb.coords = res.vectors.rightCols(k);
  fix_signs(emb.coords);
  emb.mass = g.dsym;
  return emb;
}

/// Per-channel projections m_ic = c^T D E_i and S_C(i) = lambda_i sum_c m_ic^2
/// over channels x, y, z, r.
struct SpectralSignature {
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXd projections;  ///< k x 4, columns x, y, z, r
  Eigen::VectorXd values;       ///< S_C
};

inline Eigen::MatrixXd signature_channels(const TriangleMesh& mesh, const std::vector<double>& radius) {
  const int n = static_cast<int>(mesh.vertices.size());
  if (static_cast<int>(radius.size()) != n) fail(ErrorCode::shape, "radius channel length differs from vertex count");
  Eigen::MatrixXd C(n, 4);
  for (int i = 0; i < n; ++i) C.row(i) << mesh.vertices[i].x(), mesh.vertices[i].y(), mesh.vertices[i].z(), radius[i];
  return C;
}

inline SpectralSignature spectral_signature(const Eigen::MatrixXd& channels, const SpectralEmbedding& emb) {
  if (channels.rows() != emb.n()) fail(ErrorCode::shape, "channel length differs from embedding size");
  if (emb.mass.size() != emb.n()) fail(ErrorCode::precondition, "embedding carries no mass matrix");
  SpectralSignature sig;
  sig.eigenvalues = emb.eigenvalues;
  sig.projections = emb.coords.transpose() * (emb.mass.asDiagonal() * channels);
  sig.values = emb.eigenvalues.cwiseProduct(sig.projections.rowwise().squaredNorm());
  return sig;
}

inline SpectralSignature spectral_signature(const TriangleMesh& mesh, const std::vector<double>& radius,
                                            const SpectralEmbedding& emb) {
  return spectral_signature(signature_channels(mesh, radius), emb);
}

// ---- persistence -----------------------------------------------------------

inline void save_embedding(const SpectralEmbedding& emb, const std::filesystem::path& path) {
  auto out = open_output(path);
  out << "medial-embedding 1\n";
  out << "n " << emb.n() << " k " << emb.k() << '\n';
  out << "eigenvalues";
  for (int i = 0; i < emb.k(); ++i) out << ' ' << format_g17(emb.eigenvalues[i]);
  out << '\n';
  for (int r = 0; r < emb.n(); ++r) {
    for (int c = 0; c < emb.k(); ++c) out << (c ? " " : "") << format_g17(emb.coords(r, c));
    out << '\n';
  }
  if (!out) fail(ErrorCode::io, "write failed for " + path.string());
}

inline SpectralEmbedding load_embedding(const std::filesystem::path& path) {
  LineReader reader(path);
  std::string line = reader.require("header");
  auto tok = split_ws(line);
  if (tok.size() != 2 || tok[0] != "medial-embedding" || tok[1] != "1") reader.error("not a medial-embedding v1 file");
  line = reader.require("size line");
  tok = split_ws(line);
  if (tok.size() != 4 || tok[0] != "n" || tok[2] != "k") reader.error("expected 'n N k K'");
  const int n = parse_number<int>(tok[1], reader), k = parse_number<int>(tok[3], reader);
  if (n < 1 || k < 1) reader.error("n and k must be positive");
  line = reader.require("eigenvalues");
  tok = split_ws(line);
  if (static_cast<int>(tok.size()) != k + 1 || tok[0] != "eigenvalues") reader.error("expected k eigenvalues");
  SpectralEmbedding emb;
  emb.eigenvalues.resize(k);
  for (int i = 0; i < k; ++i) emb.eigenvalues[i] = parse_number<double>(tok[i + 1], reader);
  emb.coords.resize(n, k);
  for (int r = 0; r < n; ++r) {
    line = reader.require("embedding row");
    tok = split_ws(line);
    if (static_cast<int>(tok.size()) != k) reader.error("expected " + std::to_string(k) + " coordinates");
    for (int c = 0; c < k; ++c) emb.coords(r, c) = parse_number<double>(tok[c], reader);
  }
  return emb;
}

inline void save_signature(const SpectralSignature& sig, const std::filesystem::path& path) {
  auto out = open_output(path);
  out << "# lambda S_C m_x m_y m_z m_r\n";
  for (Eigen::Index i = 0; i < sig.values.size(); ++i) {
    out << format_g17(sig.eigenvalues[i]) << ' ' << format_g17(sig.values[i]);
    for (int c = 0; c < 4; ++c) out << ' ' << format_g17(sig.projections(i, c));
    out << '\n';
  }
  if (!out) fail(ErrorCode::io, "write failed for " + path.string());
}

inline void save_map(const BoundaryMedialMap& map, const SkeletalPointSet& skel, const std::filesystem::path& path) {
  auto out = open_output(path);
  out << "# skeletal distance radius\n";
  for (std::size_t i = 0; i < map.size(); ++i)
    out << map.skeletal[i] << ' ' << format_g17(map.distance[i]) << ' '
        << format_g17(skel.points[map.skeletal[i]].radius) << '\n';
  if (!out) fail(ErrorCode::io, "write failed for " + path.string());
}

/// Per-vertex radii from a saved map (third column).
inline std::vector<double> load_map_radii(const std::filesystem::path& path) {
  LineReader reader(path);
  std::vector<double> r;
  std::string line;
  while (reader.next(line, true)) {
    auto tok = split_ws(line);
    if (tok.empty()) continue;
    if (tok.size() != 3) reader.error("expected 3 columns: skeletal distance radius");
    r.push_back(parse_number<double>(tok[2], reader));
  }
  return r;
}

// ---- one-call driver ---------------------------------------------------------

struct SpectralParams {
  int k = 30;
  GraphOptions graph;
  EigenOptions eig;
};

struct SpectralResult {
  BoundaryMedialMap map;
  MedialGraph graph;
  SpectralEmbedding embedding;
  SpectralSignature signature;
  std::vector<double> radius;  ///< mapped radius per vertex
};

inline SpectralResult medial_spectral(const TriangleMesh& mesh, const SkeletalPointSet& skel, const ReconGrid& recon,
                                      const SpectralParams& p) {
  SpectralResult res;
  res.map = map_boundary_to_medial(mesh, skel, recon);
  res.radius = vertex_radii(res.map, skel);
  res.graph = build_graph(mesh, res.map, skel, p.graph);
  res.embedding = solve_eigens(res.graph, p.k, p.eig);
  res.signature = spectral_signature(mesh, res.radius, res.embedding);
  return res;
}

}  // namespace medspec
