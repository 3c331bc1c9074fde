#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <limits>
#include <queue>
#include <string>
#include <vector>

#include "medspec/assignment.hpp"
#include "medspec/eigensolver.hpp"
#include "medspec/kdtree.hpp"
#include "medspec/mesh.hpp"
#include "medspec/spectral.hpp"
#include "medspec/text_io.hpp"

namespace medspec {

struct AlignOptions {
  double alpha = 0.4;  ///< eigenvalue term
  double beta = 0.3;   ///< histogram term
  double gamma = 0.3;  ///< spatial term
  int bins = 32;
  int samples = 256;
};

/// Column a of A pairs with column perm[a] of B, multiplied by sign[a].
struct SpectrumAlignment {
  std::vector<int> perm;
  std::vector<int> sign;
  Eigen::MatrixXd cost;  ///< cost(a, b) at the better sign
  double total = 0.0;
  int frame = 0;         ///< 0: centroid/scale only, 1-4: principal-axis frames

  SpectrumAlignment inverse() const {
    SpectrumAlignment inv;
    const int k = static_cast<int>(perm.size());
    inv.perm.assign(k, -1);
    inv.sign.assign(k, 1);
    for (int a = 0; a < k; ++a) {
      inv.perm[perm[a]] = a;
      inv.sign[perm[a]] = sign[a];
    }
    inv.cost = cost.transpose();
    inv.total = total;
    inv.frame = frame;
    return inv;
  }
};

namespace detail {

/// Zero-mean, unit-variance copy of every column (zero columns stay zero).
inline Eigen::MatrixXd standardize_columns(const Eigen::MatrixXd& m) {
  Eigen::MatrixXd z = m;
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    const double mean = m.col(c).mean();
    z.col(c).array() -= mean;
    const double sd = std::sqrt(z.col(c).squaredNorm() / static_cast<double>(m.rows()));
    if (sd > 0) z.col(c) /= sd;
  }
  return z;
}

/// Normalized histogram of standardized values over [-4, 4]; outliers go to
/// the end bins.
inline std::vector<double> value_histogram(const Eigen::VectorXd& z, int bins, double sign) {
  std::vector<double> h(bins, 0.0);
  const double lo = -4.0, width = 8.0 / bins;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    const int b = std::clamp(static_cast<int>(std::floor((sign * z[i] - lo) / width)), 0, bins - 1);
    h[b] += 1.0;
  }
  for (double& x : h) x /= static_cast<double>(z.size());
  return h;
}

/// Farthest-point sample of `count` indices, seeded at the point farthest
/// from the centroid; ties go to the lower index.
inline std::vector<int> farthest_point_sample(const std::vector<Vec3>& pts, int count) {
  const int n = static_cast<int>(pts.size());
  count = std::min(count, n);
  std::vector<int> out;
  if (count <= 0) return out;
  Vec3 c = Vec3::Zero();
  for (const auto& p : pts) c += p;
  c /= n;
  int first = 0;
  for (int i = 1; i < n; ++i)
    if ((pts[i] - c).squaredNorm() > (pts[first] - c).squaredNorm()) first = i;
  std::vector<double> d(n, std::numeric_limits<double>::infinity());
  int cur = first;
  for (int s = 0; s < count; ++s) {
    out.push_back(cur);
    int next = -1;
    for (int i = 0; i < n; ++i) {
      d[i] = std::min(d[i], (pts[i] - pts[cur]).squaredNorm());
      if (next < 0 || d[i] > d[next]) next = i;
    }
    cur = next;
  }
  return out;
}

struct NormalizedShape {
  std::vector<Vec3> points;  ///< centered, unit RMS radius
  Eigen::Matrix3d axes;      ///< principal axes (columns, ascending variance)
};

inline NormalizedShape normalize_shape(const std::vector<Vec3>& pts) {
  if (pts.empty()) fail(ErrorCode::empty_input, "shape has no vertices");
  Vec3 c = Vec3::Zero();
  for (const auto& p : pts) c += p;
  c /= static_cast<double>(pts.size());
  double ss = 0.0;
  for (const auto& p : pts) ss += (p - c).squaredNorm();
  const double scale = std::sqrt(ss / static_cast<double>(pts.size()));
  NormalizedShape out;
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (const auto& p : pts) {
    const Vec3 q = scale > 0 ? Vec3((p - c) / scale) : Vec3::Zero();
    out.points.push_back(q);
    cov += q * q.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(cov);
  out.axes = es.eigenvectors();
  return out;
}

/// Rotations taking B's normalized frame into A's: identity, then the four
/// proper rotations mapping B's principal axes onto A's.
inline std::vector<Eigen::Matrix3d> candidate_frames(const NormalizedShape& a, const NormalizedShape& b) {
  std::vector<Eigen::Matrix3d> out{Eigen::Matrix3d::Identity()};
  const double det = a.axes.determinant() * b.axes.determinant();
  static constexpr std::array<std::array<double, 3>, 4> signs = {
      {{1, 1, 1}, {1, -1, -1}, {-1, 1, -1}, {-1, -1, 1}}};
  for (const auto& s : signs) {
    const Eigen::Vector3d d(s[0] * det, s[1] * det, s[2] * det);
    out.push_back(a.axes * d.asDiagonal() * b.axes.transpose());
  }
  return out;
}

}  // namespace detail

/// Resolves eigenvector order and sign between two embeddings. `pos_a` and
/// `pos_b` enable the spatial term; pass empty vectors to disable it.
inline SpectrumAlignment align_spectra(const SpectralEmbedding& a, const SpectralEmbedding& b,
                                       const std::vector<Vec3>& pos_a, const std::vector<Vec3>& pos_b,
                                       const AlignOptions& opt = {}) {
  const int k = a.k();
  if (b.k() != k) fail(ErrorCode::shape, "embeddings differ in dimension");
  if (k < 1) fail(ErrorCode::empty_input, "embeddings have no eigenvectors");
  if (opt.bins < 1 || opt.samples < 1) fail(ErrorCode::domain, "bins and samples must be positive");
  const bool spatial = !pos_a.empty() && !pos_b.empty() && opt.gamma != 0.0;
  if (spatial && (static_cast<int>(pos_a.size()) != a.n() || static_cast<int>(pos_b.size()) != b.n()))
    fail(ErrorCode::shape, "vertex positions do not match embedding rows");

  const Eigen::MatrixXd za = detail::standardize_columns(a.coords);
  const Eigen::MatrixXd zb = detail::standardize_columns(b.coords);

  // Eigenvalue term and sign-resolved histogram distances.
  Eigen::MatrixXd eig_term(k, k);
  std::array<Eigen::MatrixXd, 2> hist_term{Eigen::MatrixXd(k, k), Eigen::MatrixXd(k, k)};
  std::vector<std::vector<double>> ha(k), hb_pos(k), hb_neg(k);
  for (int i = 0; i < k; ++i) {
    ha[i] = detail::value_histogram(za.col(i), opt.bins, 1.0);
    hb_pos[i] = detail::value_histogram(zb.col(i), opt.bins, 1.0);
    hb_neg[i] = detail::value_histogram(zb.col(i), opt.bins, -1.0);
  }
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) {
      const double la = a.eigenvalues[i], lb = b.eigenvalues[j];
      eig_term(i, j) = la + lb > 0 ? std::abs(la - lb) / (la + lb) : 0.0;
      double dp = 0.0, dn = 0.0;
      for (int t = 0; t < opt.bins; ++t) {
        dp += std::abs(ha[i][t] - hb_pos[j][t]);
        dn += std::abs(ha[i][t] - hb_neg[j][t]);
      }
      hist_term[0](i, j) = 0.5 * dp;
      hist_term[1](i, j) = 0.5 * dn;
    }

  auto solve_with = [&](const std::array<Eigen::MatrixXd, 2>& spatial_term) {
    SpectrumAlignment al;
    al.cost.resize(k, k);
    Eigen::MatrixXi best_sign(k, k);
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j) {
        const double cp = opt.beta * hist_term[0](i, j) + opt.gamma * spatial_term[0](i, j);
        const double cn = opt.beta * hist_term[1](i, j) + opt.gamma * spatial_term[1](i, j);
        best_sign(i, j) = cn < cp ? -1 : 1;
        al.cost(i, j) = opt.alpha * eig_term(i, j) + std::min(cp, cn);
      }
    al.perm = solve_assignment(al.cost);
    al.sign.resize(k);
    for (int i = 0; i < k; ++i) al.sign[i] = best_sign(i, al.perm[i]);
    al.total = assignment_cost(al.cost, al.perm);
    return al;
  };

  if (!spatial) return solve_with({Eigen::MatrixXd::Zero(k, k), Eigen::MatrixXd::Zero(k, k)});

  const auto na = detail::normalize_shape(pos_a), nb = detail::normalize_shape(pos_b);
  const auto sa = detail::farthest_point_sample(pos_a, opt.samples);
  const auto sb = detail::farthest_point_sample(pos_b, opt.samples);
  std::vector<double> buf_a;
  for (const auto& p : na.points) buf_a.insert(buf_a.end(), {p.x(), p.y(), p.z()});
  const KdTree tree_a(std::move(buf_a), 3);

  SpectrumAlignment best;
  bool have = false;
  const auto frames = detail::candidate_frames(na, nb);
  for (std::size_t f = 0; f < frames.size(); ++f) {
    const Eigen::Matrix3d& R = frames[f];
    std::vector<double> buf_b;
    std::vector<Vec3> rb(nb.points.size());
    for (std::size_t i = 0; i < nb.points.size(); ++i) {
      rb[i] = R * nb.points[i];
      buf_b.insert(buf_b.end(), {rb[i].x(), rb[i].y(), rb[i].z()});
    }
    const KdTree tree_b(std::move(buf_b), 3);
    // Pairs (A vertex, B vertex): A samples to nearest B, B samples to nearest A.
    std::vector<std::pair<int, int>> ab, ba;
    for (int i : sa) ab.emplace_back(i, tree_b.nearest(na.points[i].data()).index);
    for (int j : sb) ba.emplace_back(tree_a.nearest(rb[j].data()).index, j);
    std::array<Eigen::MatrixXd, 2> sp{Eigen::MatrixXd(k, k), Eigen::MatrixXd(k, k)};
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j)
        for (int s = 0; s < 2; ++s) {
          const double sg = s == 0 ? 1.0 : -1.0;
          double d1 = 0.0, d2 = 0.0;
          for (const auto& [u, v] : ab) d1 += std::abs(za(u, i) - sg * zb(v, j));
          for (const auto& [u, v] : ba) d2 += std::abs(za(u, i) - sg * zb(v, j));
          sp[s](i, j) = 0.25 * (d1 / static_cast<double>(ab.size()) + d2 / static_cast<double>(ba.size()));
        }
    SpectrumAlignment al = solve_with(sp);
    al.frame = static_cast<int>(f);
    if (!have || al.total < best.total) {
      best = std::move(al);
      have = true;
    }
  }
  return best;
}

inline SpectrumAlignment align_spectra(const SpectralEmbedding& a, const SpectralEmbedding& b,
                                       const AlignOptions& opt = {}) {
  return align_spectra(a, b, {}, {}, opt);
}

/// Both embeddings after alignment, columns scaled to unit RMS.
struct AlignedEmbeddings {
  Eigen::MatrixXd a, b;
  bool aligned = false;
};

inline AlignedEmbeddings apply_alignment(const SpectralEmbedding& a, const SpectralEmbedding& b,
                                         const SpectrumAlignment& al) {
  const int k = a.k();
  if (b.k() != k || static_cast<int>(al.perm.size()) != k || static_cast<int>(al.sign.size()) != k)
    fail(ErrorCode::shape, "alignment does not match embedding dimension");
  AlignedEmbeddings out;
  out.a = a.coords;
  out.b.resize(b.n(), k);
  for (int i = 0; i < k; ++i) out.b.col(i) = al.sign[i] * b.coords.col(al.perm[i]);
  for (int i = 0; i < k; ++i) {
    const double ra = std::sqrt(out.a.col(i).squaredNorm() / out.a.rows());
    const double rb = std::sqrt(out.b.col(i).squaredNorm() / out.b.rows());
    if (ra > 0) out.a.col(i) /= ra;
    if (rb > 0) out.b.col(i) /= rb;
  }
  out.aligned = true;
  return out;
}

enum class MatchMode { nearest, drift };

inline MatchMode parse_match_mode(const std::string& s) {
  if (s == "nearest") return MatchMode::nearest;
  if (s == "drift") return MatchMode::drift;
  fail(ErrorCode::validation, "unknown correspondence mode '" + s + "' (nearest|drift)");
}

inline const char* to_string(MatchMode m) { return m == MatchMode::nearest ? "nearest" : "drift"; }

struct DriftOptions {
  int iterations = 50;
  double coherence = 2.0;  ///< regularization weight on displacement smoothness
  double width = 2.0;      ///< Gaussian kernel width in normalized units
  int rank = 40;           ///< low-rank approximation of the kernel matrix
  int max_points = 5000;   ///< kernel is stored densely
};

struct CorrespondenceMap {
  std::vector<int> target;         ///< B vertex per A vertex
  std::vector<double> confidence;  ///< posterior of the read-out match (drift mode only)

  std::size_t size() const { return target.size(); }
};

namespace detail {

inline std::vector<int> nearest_rows(const Eigen::MatrixXd& query, const Eigen::MatrixXd& data) {
  const int d = static_cast<int>(data.cols());
  std::vector<double> buf(static_cast<std::size_t>(data.rows()) * d);
  for (Eigen::Index r = 0; r < data.rows(); ++r)
    for (int c = 0; c < d; ++c) buf[static_cast<std::size_t>(r) * d + c] = data(r, c);
  const KdTree tree(std::move(buf), d);
  std::vector<int> out(query.rows());
  std::vector<double> q(d);
  for (Eigen::Index r = 0; r < query.rows(); ++r) {
    for (int c = 0; c < d; ++c) q[c] = query(r, c);
    out[r] = tree.nearest(q.data()).index;
  }
  return out;
}

/// Nonrigid coherent point drift: moves the rows of Y toward X and returns
/// the moved rows.
inline Eigen::MatrixXd coherent_drift(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y, const DriftOptions& opt,
                                      Eigen::MatrixXd* posterior = nullptr) {
  const int N = static_cast<int>(X.rows()), M = static_cast<int>(Y.rows()), D = static_cast<int>(X.cols());
  if (M > opt.max_points)
    fail(ErrorCode::domain, "drift mode supports at most " + std::to_string(opt.max_points) +
                                " target vertices; use nearest mode");
  // Initial variance from the mean nearest-neighbor spacing of Y.
  double spacing = 0.0;
  {
    std::vector<double> buf(static_cast<std::size_t>(M) * D);
    for (int r = 0; r < M; ++r)
      for (int c = 0; c < D; ++c) buf[static_cast<std::size_t>(r) * D + c] = Y(r, c);
    const KdTree tree(std::move(buf), D);
    std::vector<double> q(D);
    for (int r = 0; r < M; ++r) {
      for (int c = 0; c < D; ++c) q[c] = Y(r, c);
      const auto h = tree.knn(q.data(), 1, r);
      if (!h.empty()) spacing += std::sqrt(h[0].dist2);
    }
    spacing /= M;
  }
  const double floor2 = 1e-12 * std::max(1.0, Y.squaredNorm() / M);
  double sigma2 = std::max(spacing * spacing, floor2);

  // Kernel G = exp(-|yi - yj|^2 / (2 width^2)) and its leading eigenpairs.
  Eigen::MatrixXd G(M, M);
  const double inv2b2 = 1.0 / (2.0 * opt.width * opt.width);
  for (int i = 0; i < M; ++i) {
    G(i, i) = 1.0;
    for (int j = i + 1; j < M; ++j) G(i, j) = G(j, i) = std::exp(-(Y.row(i) - Y.row(j)).squaredNorm() * inv2b2);
  }
  Eigen::MatrixXd Q;
  Eigen::VectorXd Lam;
  const int rank = std::min(opt.rank, M - 1);
  if (rank >= 1 && M > 2 * rank + 2) {
    const auto eig = largest_symmetric(M, rank, [&](const double* x, double* y) {
      Eigen::Map<Eigen::VectorXd>(y, M).noalias() = G * Eigen::Map<const Eigen::VectorXd>(x, M);
    });
    Q = eig.vectors;
    Lam = eig.values;
  } else {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G);
    Q = es.eigenvectors();
    Lam = es.eigenvalues();
  }
  G.resize(0, 0);

  Eigen::MatrixXd T = Y, W = Eigen::MatrixXd::Zero(M, D), P(M, N);
  for (int it = 0; it < opt.iterations; ++it) {
    // E-step, column-wise softmax over the mixture centroids.
    for (int n = 0; n < N; ++n) {
      double dmin = std::numeric_limits<double>::infinity();
      for (int m = 0; m < M; ++m) {
        P(m, n) = (X.row(n) - T.row(m)).squaredNorm();
        dmin = std::min(dmin, P(m, n));
      }
      double s = 0.0;
      for (int m = 0; m < M; ++m) {
        P(m, n) = std::exp(-(P(m, n) - dmin) / (2.0 * sigma2));
        s += P(m, n);
      }
      P.col(n) /= s;
    }
    const Eigen::VectorXd P1 = P.rowwise().sum(), Pt1 = P.colwise().sum().transpose();
    const double Np = P1.sum();
    const Eigen::MatrixXd PX = P * X;
    // M-step: (dP G + lambda sigma2 I) W = PX - dP Y with G = Q Lam Q^T (Woodbury).
    const double ls = opt.coherence * sigma2;
    const Eigen::MatrixXd F = PX - P1.asDiagonal() * Y;
    const Eigen::MatrixXd dPQ = P1.asDiagonal() * Q;
    const Eigen::MatrixXd inner =
        ls * Eigen::MatrixXd::Identity(Q.cols(), Q.cols()) + Lam.asDiagonal() * (Q.transpose() * dPQ);
    W = (F - dPQ * inner.partialPivLu().solve(Lam.asDiagonal() * (Q.transpose() * F))) / ls;
    T = Y + Q * (Lam.asDiagonal() * (Q.transpose() * W));
    const double xpx = (Pt1.asDiagonal() * X).cwiseProduct(X).sum();
    const double trpxt = PX.cwiseProduct(T).sum();
    const double tpt = (P1.asDiagonal() * T).cwiseProduct(T).sum();
    sigma2 = std::max((xpx - 2.0 * trpxt + tpt) / (Np * D), floor2);
  }
  if (posterior) *posterior = std::move(P);
  return T;
}

}  // namespace detail

/// Dense correspondence A -> B from aligned embeddings.
inline CorrespondenceMap match_points(const AlignedEmbeddings& e, MatchMode mode, const DriftOptions& opt = {}) {
  if (!e.aligned) fail(ErrorCode::precondition, "embeddings must be aligned with align_spectra first");
  if (e.a.cols() != e.b.cols()) fail(ErrorCode::shape, "aligned embeddings differ in dimension");
  if (e.a.rows() == 0 || e.b.rows() == 0) fail(ErrorCode::empty_input, "empty embedding");
  CorrespondenceMap map;
  if (mode == MatchMode::nearest) {
    map.target = detail::nearest_rows(e.a, e.b);
    return map;
  }
  // Shared normalization: unit RMS row norm of the target set.
  const double scale = std::sqrt(e.b.squaredNorm() / e.b.rows());
  const double s = scale > 0 ? 1.0 / scale : 1.0;
  Eigen::MatrixXd P;
  const Eigen::MatrixXd T = detail::coherent_drift(s * e.a, s * e.b, opt, &P);
  map.target = detail::nearest_rows(s * e.a, T);
  map.confidence.resize(map.target.size());
  for (std::size_t i = 0; i < map.target.size(); ++i)
    map.confidence[i] = P(map.target[i], static_cast<Eigen::Index>(i));
  return map;
}

// ---- evaluation --------------------------------------------------------------

/// Mesh edge graph with Euclidean edge lengths.
struct EdgeGraph {
  std::vector<std::vector<std::pair<int, double>>> adj;

  explicit EdgeGraph(const TriangleMesh& mesh) : adj(mesh.vertices.size()) {
    for (const auto& [a, b] : unique_edges(mesh)) {
      const double w = (mesh.vertices[a] - mesh.vertices[b]).norm();
      adj[a].emplace_back(b, w);
      adj[b].emplace_back(a, w);
    }
  }

  int size() const { return static_cast<int>(adj.size()); }

  std::vector<double> dijkstra(int source) const {
    std::vector<double> d(adj.size(), std::numeric_limits<double>::infinity());
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    d[source] = 0.0;
    pq.emplace(0.0, source);
    while (!pq.empty()) {
      const auto [du, u] = pq.top();
      pq.pop();
      if (du > d[u]) continue;
      for (const auto& [v, w] : adj[u])
        if (du + w < d[v]) {
          d[v] = du + w;
          pq.emplace(d[v], v);
        }
    }
    return d;
  }
};

/// Largest finite shortest-path distance. Exact (all sources) up to
/// `exact_limit` vertices, otherwise four rounds of the double-sweep bound.
inline double geodesic_diameter(const EdgeGraph& g, int exact_limit = 4000) {
  auto ecc = [&](int s, int* far) {
    const auto d = g.dijkstra(s);
    double best = 0.0;
    for (int i = 0; i < g.size(); ++i)
      if (std::isfinite(d[i]) && d[i] > best) {
        best = d[i];
        if (far) *far = i;
      }
    return best;
  };
  double diam = 0.0;
  if (g.size() <= exact_limit) {
    for (int s = 0; s < g.size(); ++s) diam = std::max(diam, ecc(s, nullptr));
    return diam;
  }
  int cur = 0;
  for (int round = 0; round < 4; ++round) {
    int far = cur;
    diam = std::max(diam, ecc(cur, &far));
    cur = far;
  }
  return diam;
}

struct AccuracyCurve {
  std::vector<double> threshold;  ///< fraction of the geodesic diameter
  std::vector<double> fraction;
  double diameter = 0.0;
};

/// Fraction of A vertices whose match lies within geodesic t * diameter of the
/// ground-truth vertex on B, for t = 0, 0.01, ..., 0.25.
inline AccuracyCurve eval_correspondence(const CorrespondenceMap& map, const std::vector<int>& gt,
                                         const TriangleMesh& mesh_b) {
  if (map.size() != gt.size()) fail(ErrorCode::shape, "map and ground truth differ in length");
  if (map.size() == 0) fail(ErrorCode::empty_input, "empty correspondence");
  const int nb = static_cast<int>(mesh_b.vertices.size());
  for (std::size_t i = 0; i < gt.size(); ++i)
    if (gt[i] < 0 || gt[i] >= nb || map.target[i] < 0 || map.target[i] >= nb)
      fail(ErrorCode::index_range, "correspondence index outside mesh B");
  const EdgeGraph g(mesh_b);
  AccuracyCurve curve;
  curve.diameter = geodesic_diameter(g);

  std::vector<int> order(gt.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::stable_sort(order.begin(), order.end(), [&](int x, int y) { return gt[x] < gt[y]; });
  std::vector<double> err(gt.size());
  for (std::size_t p = 0; p < order.size();) {
    const int src = gt[order[p]];
    const auto d = g.dijkstra(src);
    for (; p < order.size() && gt[order[p]] == src; ++p) err[order[p]] = d[map.target[order[p]]];
  }
  // The sweep estimate is a lower bound on large meshes; no geodesic error
  // can exceed the true diameter.
  for (double e : err) curve.diameter = std::max(curve.diameter, e);
  for (int t = 0; t <= 25; ++t) {
    const double thr = t / 100.0;
    const double limit = thr * curve.diameter;
    std::size_t hit = 0;
    for (double e : err) hit += e <= limit;
    curve.threshold.push_back(thr);
    curve.fraction.push_back(static_cast<double>(hit) / static_cast<double>(err.size()));
  }
  return curve;
}

// ---- persistence -------------------------------------------------------------

inline void save_correspondence(const CorrespondenceMap& map, const std::filesystem::path& path) {
  auto out = open_output(path);
  out << "# src dst\n";
  for (std::size_t i = 0; i < map.size(); ++i) out << i << ' ' << map.target[i] << '\n';
  if (!out) fail(ErrorCode::io, "write failed for " + path.string());
}

inline CorrespondenceMap load_correspondence(const std::filesystem::path& path) {
  LineReader reader(path);
  CorrespondenceMap map;
  std::string line;
  while (reader.next(line)) {
    const auto tok = split_ws(line);
    if (tok.size() != 2) reader.error("expected 'src dst'");
    const auto src = parse_number<long long>(tok[0], reader);
    if (src != static_cast<long long>(map.target.size())) reader.error("source indices must be 0, 1, 2, ...");
    const int dst = parse_number<int>(tok[1], reader);
    if (dst < 0) reader.error("negative destination index");
    map.target.push_back(dst);
  }
  if (map.target.empty()) fail(ErrorCode::empty_input, path.string() + ": no correspondences");
  return map;
}

inline void save_curve(const AccuracyCurve& curve, const std::filesystem::path& path) {
  auto out = open_output(path);
  out << "# threshold fraction (threshold as a fraction of geodesic diameter " << format_g9(curve.diameter) << ")\n";
  for (std::size_t i = 0; i < curve.threshold.size(); ++i)
    out << format_g9(curve.threshold[i]) << ' ' << format_g9(curve.fraction[i]) << '\n';
  if (!out) fail(ErrorCode::io, "write failed for " + path.string());
}

}  // namespace medspec
