#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "medspec/error.hpp"
#include "medspec/kdtree.hpp"
#include "medspec/mesh.hpp"
#include "medspec/mesh_io.hpp"
#include "medspec/spectral.hpp"
#include "medspec/text_io.hpp"

namespace medspec {

/// n x 9 rows (x, y, z, mu_x, mu_y, mu_z, sigma_x, sigma_y, sigma_z): each
/// point followed by the mean and population deviation of the positions of
/// its k nearest neighbours in embedding space.
struct GscFeatures {
  Eigen::MatrixXd values;
  Eigen::Index rows() const { return values.rows(); }
};

inline const std::vector<std::string>& gsc_columns() {
  static const std::vector<std::string> names = {"x", "y", "z", "mu_x", "mu_y", "mu_z", "sigma_x", "sigma_y", "sigma_z"};
  return names;
}

/// Self is excluded; distance ties go to the lower point index.
inline GscFeatures gsc(const std::vector<Vec3>& points, const Eigen::MatrixXd& coords, int k) {
  const int n = static_cast<int>(points.size());
  if (n == 0) fail(ErrorCode::empty_input, "point cloud is empty");
  if (coords.rows() != n) fail(ErrorCode::shape, "embedding rows differ from point count");
  if (coords.cols() < 1) fail(ErrorCode::shape, "embedding has no columns");
  if (k < 1 || k >= n) fail(ErrorCode::domain, "k must lie in [1, n-1]");
  if (!coords.allFinite()) fail(ErrorCode::data, "embedding has non-finite entries");
  const int d = static_cast<int>(coords.cols());
  std::vector<double> buf(static_cast<std::size_t>(n) * d);
  for (int i = 0; i < n; ++i)
    for (int c = 0; c < d; ++c) buf[static_cast<std::size_t>(i) * d + c] = coords(i, c);
  const KdTree tree(std::move(buf), d);
  GscFeatures f;
  f.values.resize(n, 9);
  for (int i = 0; i < n; ++i) {
    const auto hits = tree.knn(tree.point(i), k, i);
    Vec3 mu = Vec3::Zero();
    for (const auto& h : hits) mu += points[h.index];
    mu /= k;
    Vec3 var = Vec3::Zero();
    for (const auto& h : hits) var += (points[h.index] - mu).cwiseAbs2();
    const Vec3 sigma = (var / k).cwiseSqrt();
    f.values.row(i) << points[i].transpose(), mu.transpose(), sigma.transpose();
  }
  return f;
}

inline GscFeatures gsc(const std::vector<Vec3>& points, const SpectralEmbedding& emb, int k) {
  return gsc(points, emb.coords, k);
}

// ---- surface sampling -------------------------------------------------------

struct SurfaceSample {
  std::vector<Vec3> points;
  std::vector<int> triangle;
  std::vector<Vec3> barycentric;
};

/// Area-uniform samples on the mesh surface.
inline SurfaceSample sample_surface(const TriangleMesh& mesh, int count, std::uint64_t seed) {
  if (count < 1) fail(ErrorCode::domain, "sample count must be positive");
  if (mesh.triangles.empty()) fail(ErrorCode::empty_input, "mesh has no faces");
  std::vector<double> cum(mesh.triangles.size());
  double total = 0.0;
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) cum[t] = total += triangle_area(mesh, mesh.triangles[t]);
  if (!(total > 0)) fail(ErrorCode::data, "mesh has zero surface area");
  std::mt19937_64 rng(seed);
  auto unit = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  SurfaceSample s;
  for (int i = 0; i < count; ++i) {
    const double u = unit() * total;
    const auto t = static_cast<int>(std::min<std::size_t>(
        std::upper_bound(cum.begin(), cum.end(), u) - cum.begin(), cum.size() - 1));
    double a = unit(), b = unit();
    if (a + b > 1.0) {
      a = 1.0 - a;
      b = 1.0 - b;
    }
    const Vec3 bc(1.0 - a - b, a, b);
    const auto& tri = mesh.triangles[t];
    s.points.push_back(bc[0] * mesh.vertices[tri[0]] + bc[1] * mesh.vertices[tri[1]] + bc[2] * mesh.vertices[tri[2]]);
    s.triangle.push_back(t);
    s.barycentric.push_back(bc);
  }
  return s;
}

/// Barycentric interpolation of per-vertex rows at the sample locations.
inline Eigen::MatrixXd interpolate_rows(const TriangleMesh& mesh, const Eigen::MatrixXd& rows, const SurfaceSample& s) {
  if (rows.rows() != static_cast<Eigen::Index>(mesh.vertices.size()))
    fail(ErrorCode::shape, "per-vertex rows differ from vertex count");
  Eigen::MatrixXd out(static_cast<Eigen::Index>(s.points.size()), rows.cols());
  for (std::size_t i = 0; i < s.points.size(); ++i) {
    const auto& tri = mesh.triangles[s.triangle[i]];
    const Vec3& bc = s.barycentric[i];
    out.row(i) = bc[0] * rows.row(tri[0]) + bc[1] * rows.row(tri[1]) + bc[2] * rows.row(tri[2]);
  }
  return out;
}

// ---- export -------------------------------------------------------------------

/// Whitespace table with a header row; 9 significant digits; an optional
/// trailing class id column.
inline void export_features(const GscFeatures& f, std::optional<int> label, const std::filesystem::path& path) {
  auto out = open_output(path);
  for (std::size_t c = 0; c < gsc_columns().size(); ++c) out << (c ? " " : "") << gsc_columns()[c];
  if (label) out << " label";
  out << '\n';
  for (Eigen::Index r = 0; r < f.rows(); ++r) {
    for (int c = 0; c < 9; ++c) out << (c ? " " : "") << format_g9(f.values(r, c));
    if (label) out << ' ' << *label;
    out << '\n';
  }
  if (!out) fail(ErrorCode::io, "write failed for " + path.string());
}

struct LoadedFeatures {
  GscFeatures features;
  std::vector<int> labels;  ///< empty when the file has no label column
};

inline LoadedFeatures load_exported_features(const std::filesystem::path& path) {
  LineReader reader(path);
  auto line = reader.require("header");
  auto tok = split_ws(line);
  const bool labelled = tok.size() == 10 && tok[9] == "label";
  if (tok.size() != 9 && !labelled) reader.error("expected a 9 or 10 column header");
  for (int c = 0; c < 9; ++c)
    if (tok[c] != gsc_columns()[c]) reader.error("unexpected column name '" + std::string(tok[c]) + "'");
  std::vector<double> vals;
  LoadedFeatures lf;
  while (reader.next(line, true)) {
    tok = split_ws(line);
    if (tok.empty()) continue;
    if (tok.size() != (labelled ? 10u : 9u)) reader.error("wrong column count");
    for (int c = 0; c < 9; ++c) vals.push_back(parse_number<double>(tok[c], reader));
    if (labelled) lf.labels.push_back(parse_number<int>(tok[9], reader));
  }
  const auto n = static_cast<Eigen::Index>(vals.size() / 9);
  lf.features.values = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, 9, Eigen::RowMajor>>(vals.data(), n, 9);
  return lf;
}

struct DirectoryExport {
  std::vector<std::string> classes;  ///< class id = position
  std::size_t files = 0;
};

/// Walks root/<class>/<name>.xyz, each with an embedding root/<class>/<name>.emb,
/// and writes out/<class>/<name>.gsc with the class id column. Classes are
/// numbered in sorted name order.
inline DirectoryExport export_directory(const std::filesystem::path& root, const std::filesystem::path& out, int k) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(root)) fail(ErrorCode::io, root.string() + " is not a directory");
  DirectoryExport res;
  for (const auto& entry : fs::directory_iterator(root))
    if (entry.is_directory()) res.classes.push_back(entry.path().filename().string());
  std::sort(res.classes.begin(), res.classes.end());
  for (std::size_t c = 0; c < res.classes.size(); ++c) {
    std::vector<fs::path> clouds;
    for (const auto& entry : fs::directory_iterator(root / res.classes[c]))
      if (entry.is_regular_file() && entry.path().extension() == ".xyz") clouds.push_back(entry.path());
    std::sort(clouds.begin(), clouds.end());
    for (const auto& cloud : clouds) {
      fs::path emb_path = cloud;
      emb_path.replace_extension(".emb");
      if (!fs::exists(emb_path)) fail(ErrorCode::dependency, "missing embedding " + emb_path.string());
      const auto pts = load_points(cloud);
      const auto emb = load_embedding(emb_path);
      export_features(gsc(pts, emb, k), static_cast<int>(c),
                      out / res.classes[c] / (cloud.stem().string() + ".gsc"));
      ++res.files;
    }
  }
  return res;
}

}  // namespace medspec
