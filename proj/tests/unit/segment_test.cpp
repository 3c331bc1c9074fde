#include <gtest/gtest.h>

#include <numeric>
#include <random>

#include "fixtures.hpp"
#include "medspec/segment.hpp"
#include "medspec/shapes.hpp"
#include "oracles.hpp"

namespace {

using namespace medspec;

TEST(RandIndex, HandExamples) {
  EXPECT_DOUBLE_EQ(rand_index_error({0, 0, 1, 1}, {0, 0, 1, 1}), 0.0);
  EXPECT_DOUBLE_EQ(rand_index_error({0, 0, 1, 1}, {5, 5, 2, 2}), 0.0);
  EXPECT_EQ(rand_index_error({0, 0, 1, 1}, {0, 1, 0, 1}), 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(rand_index_error({0, 1, 2}, {0, 0, 0}), 1.0);
  EXPECT_DOUBLE_EQ(rand_index_error({3}, {4}), 0.0);
  EXPECT_THROW(rand_index_error({0, 1}, {0}), Error);
}

TEST(RandIndex, MatchesPairOracleAndIsPermutationInvariant) {
  std::mt19937_64 rng(21);
  for (int t = 0; t < 100; ++t) {
    const int n = 2 + static_cast<int>(rng() % 60);
    const int ka = 1 + static_cast<int>(rng() % 5), kb = 1 + static_cast<int>(rng() % 5);
    SegmentLabels a(n), b(n);
    for (int i = 0; i < n; ++i) {
      a[i] = static_cast<int>(rng() % ka);
      b[i] = static_cast<int>(rng() % kb);
    }
    const double e = rand_index_error(a, b);
    EXPECT_NEAR(e, oracle::rand_error_pairs(a, b), 1e-15);
    EXPECT_DOUBLE_EQ(rand_index_error(b, a), e);
    // Relabel a by a random bijection.
    std::vector<int> relabel(ka);
    std::iota(relabel.begin(), relabel.end(), 10);
    std::shuffle(relabel.begin(), relabel.end(), rng);
    SegmentLabels ra(n);
    for (int i = 0; i < n; ++i) ra[i] = relabel[a[i]];
    EXPECT_DOUBLE_EQ(rand_index_error(ra, b), e);
    // Reordering points together leaves the score unchanged.
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    SegmentLabels pa(n), pb(n);
    for (int i = 0; i < n; ++i) {
      pa[i] = a[order[i]];
      pb[i] = b[order[i]];
    }
    EXPECT_DOUBLE_EQ(rand_index_error(pa, pb), e);
  }
}

SpectralEmbedding synthetic_embedding(int n, int k) {
  SpectralEmbedding e;
  e.eigenvalues.resize(k);
  e.coords.resize(n, k);
  for (int j = 0; j < k; ++j) {
    e.eigenvalues[j] = 0.5 * (j + 1);
    for (int i = 0; i < n; ++i) e.coords(i, j) = std::cos(0.37 * (j + 1) * i + j);
  }
  return e;
}

TEST(Features, StandardizedColumns) {
  const TriangleMesh m = shapes::torus(1.0, 0.3, 24, 12);
  std::vector<double> r(m.vertex_count());
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = 0.3 + 0.01 * std::sin(static_cast<double>(i));
  const FeatureMatrix f = augment_features(m, r, synthetic_embedding(static_cast<int>(m.vertex_count()), 5));
  ASSERT_EQ(f.cols(), 9);
  for (Eigen::Index c = 0; c < f.cols(); ++c) {
    EXPECT_NEAR(f.values.col(c).mean(), 0.0, 1e-9);
    EXPECT_NEAR(f.values.col(c).squaredNorm() / f.rows(), 1.0, 1e-9);
  }
  EXPECT_EQ(f.names.back(), "phi5");
  EXPECT_DOUBLE_EQ(f.weights[4], 1.0);
  EXPECT_DOUBLE_EQ(f.weights[8], std::sqrt(0.5 / 2.5));
}

TEST(Features, ConstantRadiusIsDropped) {
  const TriangleMesh m = shapes::icosphere(1.0, 2);
  const FeatureMatrix f = plain_features(m, std::vector<double>(m.vertex_count(), 1.0));
  EXPECT_EQ(f.cols(), 3);
  EXPECT_EQ(f.dropped, std::vector<std::string>{"r"});
}

TEST(Features, SpectralColumnSelection) {
  const TriangleMesh m = shapes::torus(1.0, 0.3, 24, 12);
  const int n = static_cast<int>(m.vertex_count());
  std::vector<double> r(n);
  for (int i = 0; i < n; ++i) r[i] = 1.0 + 0.1 * (i % 3);
  const SpectralEmbedding e = synthetic_embedding(n, 5);
  FeatureOptions opt;
  opt.spectral_columns = 2;
  EXPECT_EQ(augment_features(m, r, e, opt).cols(), 6);
  opt.spectral_columns = 0;
  const FeatureMatrix none = augment_features(m, r, e, opt);
  const FeatureMatrix plain = plain_features(m, r);
  EXPECT_EQ(none.names, plain.names);
  EXPECT_EQ(none.values, plain.values);
  opt.spectral_columns = -1;
  opt.eigen_weighting = false;
  const FeatureMatrix flat = augment_features(m, r, e, opt);
  EXPECT_EQ(flat.weights, std::vector<double>(9, 1.0));
}

/// Two icospheres four radii apart.
TriangleMesh two_blobs(std::vector<int>* gt) {
  TriangleMesh a = shapes::icosphere(1.0, 2);
  const TriangleMesh b = transformed(a, Eigen::Matrix3d::Identity(), Vec3(4, 0, 0));
  const int na = static_cast<int>(a.vertex_count());
  gt->assign(na, 0);
  gt->resize(na + b.vertex_count(), 1);
  for (const auto& v : b.vertices) a.vertices.push_back(v);
  for (const auto& t : b.triangles) a.triangles.push_back({t[0] + na, t[1] + na, t[2] + na});
  return a;
}

TEST(Cluster, SeparatesTwoBlobs) {
  std::vector<int> gt;
  const TriangleMesh m = two_blobs(&gt);
  std::vector<double> r(m.vertex_count(), 1.0);
  const SegmentLabels labels = cluster(plain_features(m, r), 2, 4);
  EXPECT_EQ(rand_index_error(labels, gt), 0.0);
}

TEST(Cluster, DeterministicForASeed) {
  const TriangleMesh m = shapes::dumbbell(0.5, 0.2, 1.0, 16, 16);
  std::vector<double> r(m.vertex_count());
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = std::abs(m.vertices[i].z()) < 0.5 ? 0.2 : 0.5;
  const FeatureMatrix f = plain_features(m, r);
  EXPECT_EQ(cluster(f, 3, 4, 11), cluster(f, 3, 4, 11));
}

TEST(Cluster, LabelsAreCanonical) {
  std::vector<int> gt;
  const TriangleMesh m = two_blobs(&gt);
  const SegmentLabels labels = cluster(plain_features(m, std::vector<double>(m.vertex_count(), 1.0)), 2, 2);
  EXPECT_EQ(labels.front(), 0);
  EXPECT_EQ(detail::canonical_labels({7, 7, 3, 9, 3}), (SegmentLabels{0, 0, 1, 2, 1}));
}

TEST(Cluster, DomainErrors) {
  const TriangleMesh m = shapes::icosphere(1.0, 1);
  const FeatureMatrix f = plain_features(m, std::vector<double>(m.vertex_count(), 1.0));
  EXPECT_THROW(cluster(f, 1, 4), Error);
  EXPECT_THROW(cluster(f, 2, 0), Error);
  EXPECT_THROW(cluster(f, static_cast<int>(m.vertex_count()) + 1, 4), Error);
}

TEST(Cosegment, SplitsBackPerMesh) {
  std::vector<int> gt;
  const TriangleMesh m = two_blobs(&gt);
  const std::vector<double> r(m.vertex_count(), 1.0);
  const RawFeatures f = raw_features(m, r, nullptr);
  const auto parts = cosegment({f, f}, 2, 4);
  ASSERT_EQ(parts.size(), 2u);
  EXPECT_EQ(parts[0].size(), m.vertex_count());
  EXPECT_EQ(parts[0], parts[1]);
  EXPECT_EQ(rand_index_error(parts[0], gt), 0.0);
  RawFeatures other = f;
  other.names.back() = "radius";
  EXPECT_THROW(cosegment({f, other}, 2, 4), Error);
}

TEST(SegmentIo, LabelsRoundTrip) {
  fixture::TempDir dir;
  const SegmentLabels labels = {0, 2, 1, 1, 0};
  save_labels(labels, dir / "l.txt");
  EXPECT_EQ(load_labels(dir / "l.txt"), labels);
}

TEST(SegmentIo, FeaturesRoundTrip) {
  fixture::TempDir dir;
  const TriangleMesh m = shapes::torus(1.0, 0.3, 16, 8);
  std::vector<double> r(m.vertex_count());
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = 0.2 + 0.001 * static_cast<double>(i);
  const FeatureMatrix f = augment_features(m, r, synthetic_embedding(static_cast<int>(m.vertex_count()), 3));
  save_features(f, dir / "f.txt");
  const FeatureMatrix back = load_features(dir / "f.txt");
  EXPECT_EQ(back.names, f.names);
  EXPECT_EQ(back.weights, f.weights);
  EXPECT_EQ(back.values, f.values);
}

}  // namespace
