#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "fixtures.hpp"
#include "medspec/features.hpp"
#include "medspec/mesh_io.hpp"
#include "medspec/shapes.hpp"

namespace {

using namespace medspec;

/// Direct evaluation: sort every other point by (embedding distance, index).
Eigen::MatrixXd brute_gsc(const std::vector<Vec3>& pts, const Eigen::MatrixXd& coords, int k) {
  const int n = static_cast<int>(pts.size());
  Eigen::MatrixXd out(n, 9);
  for (int i = 0; i < n; ++i) {
    std::vector<std::pair<double, int>> order;
    for (int j = 0; j < n; ++j)
      if (j != i) order.emplace_back((coords.row(j) - coords.row(i)).squaredNorm(), j);
    std::sort(order.begin(), order.end());
    Vec3 mu = Vec3::Zero();
    for (int t = 0; t < k; ++t) mu += pts[order[t].second];
    mu /= k;
    Vec3 var = Vec3::Zero();
    for (int t = 0; t < k; ++t) var += (pts[order[t].second] - mu).cwiseAbs2();
    out.row(i) << pts[i].transpose(), mu.transpose(), (var / k).cwiseSqrt().transpose();
  }
  return out;
}

struct Cloud {
  std::vector<Vec3> pts;
  Eigen::MatrixXd coords;
};

Cloud random_cloud(int n, int d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Cloud c;
  for (int i = 0; i < n; ++i) c.pts.emplace_back(g(rng), g(rng), g(rng));
  c.coords.resize(n, d);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) c.coords(i, j) = g(rng);
  return c;
}

TEST(Gsc, ShapeAndColumns) {
  const Cloud c = random_cloud(40, 4, 1);
  EXPECT_EQ(gsc(c.pts, c.coords, 5).values.cols(), 9);
  EXPECT_EQ(gsc(c.pts, c.coords, 5).values.rows(), 40);
  EXPECT_EQ(gsc_columns().size(), 9u);
}

TEST(Gsc, MatchesBruteForce) {
  for (std::uint64_t s = 0; s < 5; ++s) {
    const Cloud c = random_cloud(80, 3 + static_cast<int>(s), 10 + s);
    for (int k : {1, 4, 17, 79}) {
      const Eigen::MatrixXd want = brute_gsc(c.pts, c.coords, k);
      EXPECT_LT((gsc(c.pts, c.coords, k).values - want).cwiseAbs().maxCoeff(), 1e-12) << "k " << k;
    }
  }
}

TEST(Gsc, SingleNeighbourHasZeroSpread) {
  const Cloud c = random_cloud(30, 5, 2);
  const GscFeatures f = gsc(c.pts, c.coords, 1);
  EXPECT_EQ(f.values.rightCols(3).cwiseAbs().maxCoeff(), 0.0);
  for (int i = 0; i < 30; ++i) {
    Eigen::Index best = -1;
    double bd = std::numeric_limits<double>::infinity();
    for (int j = 0; j < 30; ++j) {
      const double dd = (c.coords.row(j) - c.coords.row(i)).squaredNorm();
      if (j != i && dd < bd) {
        bd = dd;
        best = j;
      }
    }
    EXPECT_EQ(Vec3(f.values.row(i).segment<3>(3)), c.pts[best]);
  }
}

TEST(Gsc, DegenerateCloudCollapses) {
  const std::vector<Vec3> pts(6, Vec3(1, -2, 3));
  const GscFeatures f = gsc(pts, Eigen::MatrixXd::Zero(6, 2), 3);
  for (int i = 0; i < 6; ++i) {
    EXPECT_EQ(Vec3(f.values.row(i).head<3>()), pts[0]);
    EXPECT_EQ(Vec3(f.values.row(i).segment<3>(3)), pts[0]);
    EXPECT_EQ(f.values.row(i).tail<3>().norm(), 0.0);
  }
}

TEST(Gsc, PermutationEquivariant) {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 20; ++t) {
    const Cloud c = random_cloud(50, 4, 100 + t);
    std::vector<int> perm(50);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    Cloud p;
    p.coords.resize(50, 4);
    for (int i = 0; i < 50; ++i) {
      p.pts.push_back(c.pts[perm[i]]);
      p.coords.row(i) = c.coords.row(perm[i]);
    }
    const GscFeatures a = gsc(c.pts, c.coords, 6), b = gsc(p.pts, p.coords, 6);
    for (int i = 0; i < 50; ++i) EXPECT_LT((b.values.row(i) - a.values.row(perm[i])).norm(), 1e-12);
  }
}

TEST(Gsc, CylinderMedialPull) {
  const TriangleMesh m = shapes::cylinder(0.3, 2.0, 32, 20);
  const auto chain = fixture::run_chain(m, 64, 8);
  const GscFeatures spectral = gsc(m.vertices, chain.spectral.embedding, 8);
  Eigen::MatrixXd pos(m.vertex_count(), 3);
  for (std::size_t i = 0; i < m.vertex_count(); ++i) pos.row(i) = m.vertices[i].transpose();
  const GscFeatures positional = gsc(m.vertices, pos, 8);
  double ds = 0.0, dp = 0.0;
  int wall = 0;
  for (std::size_t i = 0; i < m.vertex_count(); ++i) {
    const Vec3& v = m.vertices[i];
    if (std::abs(v.z()) > 0.6 || std::hypot(v.x(), v.y()) < 0.29) continue;
    ds += std::hypot(spectral.values(i, 3), spectral.values(i, 4));
    dp += std::hypot(positional.values(i, 3), positional.values(i, 4));
    ++wall;
  }
  ASSERT_GT(wall, 100);
  EXPECT_LT(ds / wall, dp / wall);
}

TEST(Gsc, Errors) {
  const Cloud c = random_cloud(10, 2, 4);
  EXPECT_THROW(gsc(c.pts, c.coords, 0), Error);
  EXPECT_THROW(gsc(c.pts, c.coords, 10), Error);
  EXPECT_THROW(gsc(c.pts, Eigen::MatrixXd::Zero(9, 2), 3), Error);
  EXPECT_THROW(gsc({}, Eigen::MatrixXd::Zero(0, 2), 1), Error);
}

TEST(SurfaceSample, PointsLieOnTrianglesAndInterpolate) {
  const TriangleMesh m = shapes::torus(1.0, 0.3, 16, 8);
  const SurfaceSample s = sample_surface(m, 500, 9);
  ASSERT_EQ(s.points.size(), 500u);
  Eigen::MatrixXd pos(m.vertex_count(), 3);
  for (std::size_t i = 0; i < m.vertex_count(); ++i) pos.row(i) = m.vertices[i].transpose();
  const Eigen::MatrixXd back = interpolate_rows(m, pos, s);
  for (std::size_t i = 0; i < s.points.size(); ++i) {
    EXPECT_NEAR(s.barycentric[i].sum(), 1.0, 1e-12);
    EXPECT_GE(s.barycentric[i].minCoeff(), 0.0);
    EXPECT_LT((Vec3(back.row(i)) - s.points[i]).norm(), 1e-12);
  }
  const SurfaceSample again = sample_surface(m, 500, 9);
  EXPECT_EQ(again.triangle, s.triangle);
}

TEST(Export, TwoPointFile) {
  fixture::TempDir dir;
  const std::vector<Vec3> pts = {Vec3(0, 0, 0), Vec3(1, 2, 3)};
  Eigen::MatrixXd coords(2, 1);
  coords << 0.0, 1.0;
  export_features(gsc(pts, coords, 1), 4, dir / "f.gsc");
  EXPECT_EQ(fixture::read_text(dir / "f.gsc"),
            "x y z mu_x mu_y mu_z sigma_x sigma_y sigma_z label\n"
            "0 0 0 1 2 3 0 0 0 4\n"
            "1 2 3 0 0 0 0 0 0 4\n");
}

TEST(Export, RoundTripAtNineDigits) {
  fixture::TempDir dir;
  const Cloud c = random_cloud(25, 3, 5);
  const GscFeatures f = gsc(c.pts, c.coords, 4);
  export_features(f, std::nullopt, dir / "f.gsc");
  const LoadedFeatures back = load_exported_features(dir / "f.gsc");
  EXPECT_TRUE(back.labels.empty());
  ASSERT_EQ(back.features.values.rows(), 25);
  for (Eigen::Index i = 0; i < f.values.size(); ++i) {
    const double v = f.values.data()[i];
    EXPECT_NEAR(back.features.values(i % 25, i / 25), v, 1e-8 * std::max(1.0, std::abs(v)));
  }
}

TEST(Export, DirectoryWalk) {
  fixture::TempDir dir;
  const std::filesystem::path root = dir / "in", out = dir / "out";
  int files = 0;
  for (const char* cls : {"mug", "chair"})
    for (int s = 0; s < 2; ++s) {
      std::filesystem::create_directories(root / cls);
      const Cloud c = random_cloud(12, 3, 50 + files);
      const std::string stem = std::string("s") + std::to_string(s);
      save_points(c.pts, root / cls / (stem + ".xyz"));
      SpectralEmbedding e;
      e.coords = c.coords;
      e.eigenvalues = Eigen::Vector3d(1, 2, 3);
      save_embedding(e, root / cls / (stem + ".emb"));
      ++files;
    }
  const DirectoryExport res = export_directory(root, out, 3);
  EXPECT_EQ(res.files, 4u);
  EXPECT_EQ(res.classes, (std::vector<std::string>{"chair", "mug"}));
  const LoadedFeatures mug = load_exported_features(out / "mug" / "s1.gsc");
  EXPECT_EQ(mug.labels, std::vector<int>(12, 1));
  std::filesystem::remove(root / "mug" / "s0.emb");
  try {
    export_directory(root, out, 3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::dependency);
  }
}

}  // namespace
