#pragma once

#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "medspec/eigensolver.hpp"
#include "medspec/error.hpp"
#include "medspec/kdtree.hpp"
#include "medspec/mesh.hpp"
#include "medspec/spectral.hpp"
#include "medspec/text_io.hpp"

namespace medspec {

using SegmentLabels = std::vector<int>;

/// Unstandardized per-vertex features with column names and clustering weights.
struct RawFeatures {
  Eigen::MatrixXd values;
  std::vector<std::string> names;
  std::vector<double> weights;
};

/// Standardized features: every kept column has mean 0 and unit population
/// variance. `weights` scale columns inside the clusterer only.
struct FeatureMatrix {
  Eigen::MatrixXd values;
  std::vector<std::string> names;
  std::vector<double> weights;
  std::vector<double> mean, scale;   ///< per kept column
  std::vector<std::string> dropped;  ///< zero-variance columns

  Eigen::Index rows() const { return values.rows(); }
  Eigen::Index cols() const { return values.cols(); }
  Eigen::MatrixXd weighted() const {
    Eigen::MatrixXd m = values;
    for (Eigen::Index c = 0; c < m.cols(); ++c) m.col(c) *= weights[c];
    return m;
  }
};

struct FeatureOptions {
  int spectral_columns = -1;  ///< leading modes to use; -1 means all
  bool eigen_weighting = true;
};

/// [x, y, z, r] followed by the leading spectral coordinates. With weighting
/// on, mode i gets sqrt(lambda_1 / lambda_i).
inline RawFeatures raw_features(const TriangleMesh& mesh, const std::vector<double>& radius,
                                const SpectralEmbedding* emb, const FeatureOptions& opt = {}) {
  const auto n = static_cast<Eigen::Index>(mesh.vertices.size());
  if (n == 0) fail(ErrorCode::empty_input, "mesh has no vertices");
  if (static_cast<Eigen::Index>(radius.size()) != n) fail(ErrorCode::shape, "radius length differs from vertex count");
  int k = 0;
  if (emb) {
    if (emb->n() != n) fail(ErrorCode::shape, "embedding rows differ from vertex count");
    if (!emb->coords.allFinite() || !emb->eigenvalues.allFinite()) fail(ErrorCode::data, "embedding has non-finite entries");
    k = opt.spectral_columns < 0 ? emb->k() : std::min(opt.spectral_columns, emb->k());
  }
  RawFeatures f;
  f.values.resize(n, 4 + k);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Vec3& p = mesh.vertices[i];
    f.values.row(i).head(4) << p.x(), p.y(), p.z(), radius[i];
  }
  f.names = {"x", "y", "z", "r"};
  f.weights.assign(4, 1.0);
  for (int c = 0; c < k; ++c) {
    f.values.col(4 + c) = emb->coords.col(c);
    f.names.push_back("phi" + std::to_string(c + 1));
    double w = 1.0;
    if (opt.eigen_weighting) {
      const double l0 = emb->eigenvalues[0], li = emb->eigenvalues[c];
      w = (l0 > 0 && li > 0) ? std::sqrt(l0 / li) : 1.0;
    }
    f.weights.push_back(w);
  }
  if (!f.values.allFinite()) fail(ErrorCode::data, "feature matrix has non-finite entries");
  return f;
}

/// Per-column standardization with population variance. Columns whose spread
/// is at round-off level relative to their magnitude are dropped.
inline FeatureMatrix standardize(const RawFeatures& raw) {
  const Eigen::Index n = raw.values.rows();
  if (n == 0) fail(ErrorCode::empty_input, "no feature rows");
  if (!raw.values.allFinite()) fail(ErrorCode::data, "feature matrix has non-finite entries");
  FeatureMatrix f;
  std::vector<Eigen::Index> keep;
  for (Eigen::Index c = 0; c < raw.values.cols(); ++c) {
    const double mu = raw.values.col(c).mean();
    const double var = (raw.values.col(c).array() - mu).square().mean();
    const double sd = std::sqrt(var);
    const double mag = raw.values.col(c).cwiseAbs().maxCoeff();
    if (!(sd > 1e-12 * std::max(mag, 1e-300))) {
      f.dropped.push_back(raw.names[c]);
      continue;
    }
    keep.push_back(c);
    f.mean.push_back(mu);
    f.scale.push_back(sd);
    f.names.push_back(raw.names[c]);
    f.weights.push_back(raw.weights[c]);
  }
  f.values.resize(n, static_cast<Eigen::Index>(keep.size()));
  for (std::size_t j = 0; j < keep.size(); ++j)
    f.values.col(j) = (raw.values.col(keep[j]).array() - f.mean[j]) / f.scale[j];
  return f;
}

inline FeatureMatrix augment_features(const TriangleMesh& mesh, const std::vector<double>& radius,
                                      const SpectralEmbedding& emb, const FeatureOptions& opt = {}) {
  return standardize(raw_features(mesh, radius, &emb, opt));
}

/// Positional features only: [x, y, z, r].
inline FeatureMatrix plain_features(const TriangleMesh& mesh, const std::vector<double>& radius) {
  return standardize(raw_features(mesh, radius, nullptr));
}

// ---- clustering ---------------------------------------------------------------

struct ClusterOptions {
  int neighbors = 15;
  int kmeans_restarts = 10;
  int kmeans_iterations = 300;
  double regularization = 0.01;  ///< tau as a multiple of the mean fused degree; 0 disables
  std::uint64_t seed = 7;
};

namespace detail {

/// Uniform integer in [0, bound) from the raw engine, so the stream does not
/// depend on the standard library's distribution implementation.
inline std::uint64_t draw_below(std::mt19937_64& rng, std::uint64_t bound) { return rng() % bound; }

inline std::vector<int> random_subset(int d, int size, std::mt19937_64& rng) {
  std::vector<int> idx(d);
  std::iota(idx.begin(), idx.end(), 0);
  for (int i = 0; i < size; ++i) std::swap(idx[i], idx[i + draw_below(rng, d - i)]);
  idx.resize(size);
  std::sort(idx.begin(), idx.end());
  return idx;
}

/// Symmetric kNN Gaussian similarity on the chosen columns, as (i, j, w)
/// triplets with i < j. Bandwidth is the median neighbour distance.
inline std::vector<Eigen::Triplet<double>> knn_similarity(const Eigen::MatrixXd& x, const std::vector<int>& cols,
                                                          int neighbors) {
  const int n = static_cast<int>(x.rows());
  const int d = static_cast<int>(cols.size());
  std::vector<double> buf(static_cast<std::size_t>(n) * d);
  for (int i = 0; i < n; ++i)
    for (int c = 0; c < d; ++c) buf[static_cast<std::size_t>(i) * d + c] = x(i, cols[c]);
  const KdTree tree(buf, d);
  const int kk = std::min(neighbors, n - 1);
  std::vector<std::vector<KdTree::Hit>> hits(n);
  std::vector<double> dists;
  dists.reserve(static_cast<std::size_t>(n) * kk);
  for (int i = 0; i < n; ++i) {
    hits[i] = tree.knn(tree.point(i), kk, i);
    for (const auto& h : hits[i]) dists.push_back(std::sqrt(h.dist2));
  }
  auto mid = dists.begin() + static_cast<std::ptrdiff_t>(dists.size() / 2);
  std::nth_element(dists.begin(), mid, dists.end());
  double sigma = *mid;
  if (!(sigma > 0)) sigma = *std::max_element(dists.begin(), dists.end());
  if (!(sigma > 0)) sigma = 1.0;  // all points coincide
  std::map<std::uint64_t, double> edges;
  for (int i = 0; i < n; ++i)
    for (const auto& h : hits[i]) {
      const double w = std::exp(-h.dist2 / (2.0 * sigma * sigma));
      auto& slot = edges[edge_key(i, h.index)];
      slot = std::max(slot, w);
    }
  std::vector<Eigen::Triplet<double>> out;
  out.reserve(edges.size());
  for (const auto& [key, w] : edges)
    out.emplace_back(static_cast<int>(key >> 32), static_cast<int>(key & 0xffffffffu), w);
  return out;
}

inline double sq_dist(const Eigen::MatrixXd& x, Eigen::Index i, const Eigen::MatrixXd& c, Eigen::Index j) {
  return (x.row(i) - c.row(j)).squaredNorm();
}

/// Lloyd iterations from k-means++ seeds; best of `restarts` by inertia.
inline std::vector<int> kmeans(const Eigen::MatrixXd& x, int k, const ClusterOptions& opt, std::mt19937_64& rng) {
  const Eigen::Index n = x.rows();
  std::vector<int> best;
  double best_inertia = std::numeric_limits<double>::infinity();
  for (int run = 0; run < std::max(1, opt.kmeans_restarts); ++run) {
    Eigen::MatrixXd c(k, x.cols());
    std::vector<double> d2(n, std::numeric_limits<double>::infinity());
    Eigen::Index first = static_cast<Eigen::Index>(draw_below(rng, n));
    c.row(0) = x.row(first);
    for (int j = 1; j < k; ++j) {
      double total = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        d2[i] = std::min(d2[i], sq_dist(x, i, c, j - 1));
        total += d2[i];
      }
      Eigen::Index pick = n - 1;
      if (total > 0) {
        const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53 * total;
        double acc = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
          acc += d2[i];
          if (acc > u) {
            pick = i;
            break;
          }
        }
      } else {
        pick = static_cast<Eigen::Index>(draw_below(rng, n));
      }
      c.row(j) = x.row(pick);
    }
    std::vector<int> label(n, -1);
    double inertia = 0.0;
    for (int it = 0; it < opt.kmeans_iterations; ++it) {
      bool changed = false;
      inertia = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        int arg = 0;
        double bd = sq_dist(x, i, c, 0);
        for (int j = 1; j < k; ++j) {
          const double dd = sq_dist(x, i, c, j);
          if (dd < bd) {
            bd = dd;
            arg = j;
          }
        }
        inertia += bd;
        if (label[i] != arg) {
          label[i] = arg;
          changed = true;
        }
      }
      Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(k, x.cols());
      std::vector<int> count(k, 0);
      for (Eigen::Index i = 0; i < n; ++i) {
        sum.row(label[i]) += x.row(i);
        ++count[label[i]];
      }
      for (int j = 0; j < k; ++j) {
        if (count[j] > 0) {
          c.row(j) = sum.row(j) / count[j];
          continue;
        }
        // Empty cluster: move it to the point farthest from its centre.
        Eigen::Index far = 0;
        double fd = -1.0;
        for (Eigen::Index i = 0; i < n; ++i) {
          const double dd = sq_dist(x, i, c, label[i]);
          if (dd > fd) {
            fd = dd;
            far = i;
          }
        }
        c.row(j) = x.row(far);
        label[far] = j;
        changed = true;
      }
      if (!changed) break;
    }
    if (inertia < best_inertia) {
      best_inertia = inertia;
      best = label;
    }
  }
  return best;
}

/// Renames labels to 0, 1, ... in order of first appearance.
inline SegmentLabels canonical_labels(const std::vector<int>& labels) {
  std::map<int, int> ids;
  SegmentLabels out(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto [it, fresh] = ids.try_emplace(labels[i], static_cast<int>(ids.size()));
    out[i] = it->second;
  }
  return out;
}

/// Average of the kNN similarity graphs over the given column subsets.
inline SparseMatrix fused_affinity(const Eigen::MatrixXd& x, const std::vector<std::vector<int>>& subsets,
                                   int neighbors) {
  const int n = static_cast<int>(x.rows());
  std::vector<Eigen::Triplet<double>> trip;
  const double share = 1.0 / static_cast<double>(subsets.size());
  for (const auto& cols : subsets)
    for (const auto& t : knn_similarity(x, cols, neighbors)) {
      trip.emplace_back(t.row(), t.col(), t.value() * share);
      trip.emplace_back(t.col(), t.row(), t.value() * share);
    }
  SparseMatrix W(n, n);
  W.setFromTriplets(trip.begin(), trip.end());
  return W;
}

/// Normalized spectral partition of an affinity matrix: leading eigenvectors
/// of D^-1/2 (W + tau/n 1 1^T) D^-1/2, rows normalized, then k-means++.
inline SegmentLabels spectral_partition(const SparseMatrix& W, int k_parts, const ClusterOptions& opt,
                                        std::mt19937_64& rng) {
  const int n = static_cast<int>(W.rows());
  // A small constant term keeps the Lanczos iteration converging when the
  // fused graph has nearly detached pieces.
  Eigen::VectorXd deg(n);
  for (int i = 0; i < n; ++i) deg[i] = W.col(i).sum();
  const double tau = opt.regularization * deg.mean();
  Eigen::VectorXd isd(n);
  for (int i = 0; i < n; ++i) {
    const double dt = deg[i] + tau;
    isd[i] = dt > 0 ? 1.0 / std::sqrt(dt) : 0.0;
  }
  // Shift-invert on the Laplacian is avoided: the fused graph joins points far
  // apart on the surface, and a sparse factorization fills in almost fully.
  Eigen::MatrixXd U;
  if (n <= 1500) {
    Eigen::MatrixXd dense = Eigen::MatrixXd(W);
    dense.array() += tau / n;
    dense = isd.asDiagonal() * dense * isd.asDiagonal();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense);
    U = es.eigenvectors().rightCols(k_parts);
  } else {
    const SparseMatrix S = isd.asDiagonal() * W * isd.asDiagonal();
    auto mv = [&](const double* in, double* out) {
      Eigen::Map<const Eigen::VectorXd> v(in, n);
      Eigen::Map<Eigen::VectorXd> y(out, n);
      y = S * v;
      y += isd * (tau / n * isd.dot(v));
    };
    EigenOptions eo;
    eo.tol = 1e-10;
    eo.ncv = std::max(4 * k_parts + 1, 48);
    U = largest_symmetric(n, k_parts, mv, eo).vectors;
  }
  for (int i = 0; i < n; ++i) {
    const double norm = U.row(i).norm();
    if (norm > 0) U.row(i) /= norm;
  }
  return canonical_labels(kmeans(U, k_parts, opt, rng));
}

}  // namespace detail

/// Subspace-randomized spectral clustering. Each of `subspaces` random
/// column subsets of size ceil(d/2) yields a kNN Gaussian graph; the graphs
/// are averaged, and the k_parts leading eigenvectors of D^-1/2 W D^-1/2
/// (row-normalized) are clustered with k-means++.
inline SegmentLabels cluster(const FeatureMatrix& features, int k_parts, int subspaces, const ClusterOptions& opt = {}) {
  const int n = static_cast<int>(features.rows());
  const int d = static_cast<int>(features.cols());
  if (k_parts < 2) fail(ErrorCode::domain, "k_parts must be at least 2");
  if (subspaces < 1) fail(ErrorCode::domain, "subspaces must be at least 1");
  if (k_parts > n) fail(ErrorCode::domain, "k_parts exceeds the number of points");
  if (d == 0) fail(ErrorCode::empty_input, "feature matrix has no columns");
  if (opt.neighbors < 1) fail(ErrorCode::domain, "neighbors must be positive");
  if (!features.values.allFinite()) fail(ErrorCode::data, "feature matrix has non-finite entries");
  if (k_parts == n) {
    SegmentLabels id(n);
    std::iota(id.begin(), id.end(), 0);
    return id;
  }

  const Eigen::MatrixXd x = features.weighted();
  std::mt19937_64 rng(opt.seed);
  std::vector<std::vector<int>> subsets;
  for (int s = 0; s < subspaces; ++s) subsets.push_back(detail::random_subset(d, (d + 1) / 2, rng));
  const SparseMatrix W = detail::fused_affinity(x, subsets, opt.neighbors);
  return detail::spectral_partition(W, k_parts, opt, rng);
}

inline SegmentLabels cluster(const FeatureMatrix& features, int k_parts, int subspaces, std::uint64_t seed) {
  ClusterOptions opt;
  opt.seed = seed;
  return cluster(features, k_parts, subspaces, opt);
}

/// Clusters several meshes jointly: raw features are stacked, standardized
/// together, clustered once and split back per mesh. Spectral columns of
/// different meshes should be aligned beforehand.
inline std::vector<SegmentLabels> cosegment(const std::vector<RawFeatures>& parts, int k_parts, int subspaces,
                                            const ClusterOptions& opt = {}) {
  if (parts.empty()) fail(ErrorCode::empty_input, "no feature matrices to co-segment");
  RawFeatures all;
  all.names = parts.front().names;
  all.weights = parts.front().weights;
  Eigen::Index rows = 0;
  for (const auto& p : parts) {
    if (p.names != all.names) fail(ErrorCode::shape, "co-segmented feature matrices have different columns");
    rows += p.values.rows();
  }
  all.values.resize(rows, static_cast<Eigen::Index>(all.names.size()));
  Eigen::Index at = 0;
  for (const auto& p : parts) {
    all.values.middleRows(at, p.values.rows()) = p.values;
    at += p.values.rows();
  }
  const auto labels = cluster(standardize(all), k_parts, subspaces, opt);
  std::vector<SegmentLabels> out;
  at = 0;
  for (const auto& p : parts) {
    out.emplace_back(labels.begin() + at, labels.begin() + at + p.values.rows());
    at += p.values.rows();
  }
  return out;
}

// ---- scoring ------------------------------------------------------------------

/// 1 - Rand index over all unordered pairs, from the contingency table.
inline double rand_index_error(const SegmentLabels& labels, const SegmentLabels& gt) {
  if (labels.size() != gt.size()) fail(ErrorCode::shape, "label vectors differ in length");
  const auto n = static_cast<std::int64_t>(labels.size());
  if (n < 2) return 0.0;
  std::map<std::pair<int, int>, std::int64_t> joint;
  std::map<int, std::int64_t> ra, rb;
  for (std::int64_t i = 0; i < n; ++i) {
    ++joint[{labels[i], gt[i]}];
    ++ra[labels[i]];
    ++rb[gt[i]];
  }
  auto pairs = [](std::int64_t m) { return m * (m - 1) / 2; };
  std::int64_t both = 0, sa = 0, sb = 0;
  for (const auto& [key, m] : joint) both += pairs(m);
  for (const auto& [key, m] : ra) sa += pairs(m);
  for (const auto& [key, m] : rb) sb += pairs(m);
  const std::int64_t total = pairs(n);
  // Disagreeing pairs: together in exactly one labeling. Dividing the count
  // directly keeps simple ratios such as 2/3 correctly rounded.
  const std::int64_t disagree = sa + sb - 2 * both;
  return static_cast<double>(disagree) / static_cast<double>(total);
}

// ---- persistence --------------------------------------------------------------

inline void save_labels(const SegmentLabels& labels, const std::filesystem::path& path) {
  auto out = open_output(path);
  for (int l : labels) out << l << '\n';
  if (!out) fail(ErrorCode::io, "write failed for " + path.string());
}

inline SegmentLabels load_labels(const std::filesystem::path& path) {
  LineReader reader(path);
  SegmentLabels labels;
  std::string line;
  while (reader.next(line, true)) {
    auto tok = split_ws(line);
    if (tok.empty()) continue;
    if (tok.size() != 1) reader.error("expected one label per line");
    labels.push_back(parse_number<int>(tok[0], reader));
  }
  return labels;
}

inline void save_features(const FeatureMatrix& f, const std::filesystem::path& path) {
  auto out = open_output(path);
  out << "medial-features 1\n";
  out << "columns";
  for (const auto& name : f.names) out << ' ' << name;
  out << "\nweights";
  for (double w : f.weights) out << ' ' << format_g17(w);
  out << '\n';
  for (Eigen::Index r = 0; r < f.rows(); ++r) {
    for (Eigen::Index c = 0; c < f.cols(); ++c) out << (c ? " " : "") << format_g17(f.values(r, c));
    out << '\n';
  }
  if (!out) fail(ErrorCode::io, "write failed for " + path.string());
}

/// Reads a file written by save_features. Values are taken as already
/// standardized; mean and scale are not stored.
inline FeatureMatrix load_features(const std::filesystem::path& path) {
  LineReader reader(path);
  auto line = reader.require("header");
  auto tok = split_ws(line);
  if (tok.size() != 2 || tok[0] != "medial-features" || tok[1] != "1") reader.error("not a medial-features v1 file");
  FeatureMatrix f;
  line = reader.require("columns");
  tok = split_ws(line);
  if (tok.size() < 2 || tok[0] != "columns") reader.error("expected 'columns name...'");
  for (std::size_t i = 1; i < tok.size(); ++i) f.names.emplace_back(tok[i]);
  const auto d = static_cast<Eigen::Index>(f.names.size());
  line = reader.require("weights");
  tok = split_ws(line);
  if (static_cast<Eigen::Index>(tok.size()) != d + 1 || tok[0] != "weights") reader.error("expected one weight per column");
  for (std::size_t i = 1; i < tok.size(); ++i) f.weights.push_back(parse_number<double>(tok[i], reader));
  std::vector<double> vals;
  while (reader.next(line, true)) {
    tok = split_ws(line);
    if (tok.empty()) continue;
    if (static_cast<Eigen::Index>(tok.size()) != d) reader.error("expected " + std::to_string(d) + " values");
    for (auto t : tok) vals.push_back(parse_number<double>(t, reader));
  }
  const Eigen::Index n = static_cast<Eigen::Index>(vals.size()) / d;
  if (n == 0) fail(ErrorCode::empty_input, path.string() + ": no feature rows");
  f.values = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(vals.data(), n, d);
  f.mean.assign(d, 0.0);
  f.scale.assign(d, 1.0);
  return f;
}

}  // namespace medspec
