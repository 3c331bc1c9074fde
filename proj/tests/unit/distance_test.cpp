#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "medspec/distance.hpp"
#include "medspec/flux.hpp"
#include "oracles.hpp"

namespace {

using namespace medspec;

TEST(DistanceTransform, SingleVoxel) {
  VoxelGrid g = oracle::grid_from({3, 3, 3}, [](int x, int y, int z) { return x == 1 && y == 1 && z == 1; });
  g.geometry.spacing = 0.5;
  const DistanceField df = distance_transform(g);
  EXPECT_DOUBLE_EQ(df.d[g.geometry.linear(1, 1, 1)], 0.5);
  EXPECT_EQ(df.squared[g.geometry.linear(1, 1, 1)], 1);
}

TEST(DistanceTransform, CubeCenterMaximum) {
  const VoxelGrid g = oracle::grid_from({12, 12, 12}, [](int x, int y, int z) {
    return x >= 2 && x < 10 && y >= 2 && y < 10 && z >= 2 && z < 10;
  });
  const DistanceField df = distance_transform(g);
  double best = 0.0;
  for (double d : df.d) best = std::max(best, d);
  EXPECT_DOUBLE_EQ(best, 4.0);
  for (int z = 5; z <= 6; ++z)
    for (int y = 5; y <= 6; ++y)
      for (int x = 5; x <= 6; ++x) EXPECT_DOUBLE_EQ(df.d[g.geometry.linear(x, y, z)], 4.0);
}

TEST(DistanceTransform, BallRadius) {
  const VoxelGrid g = oracle::grid_from({25, 25, 25}, [](int x, int y, int z) {
    return (x - 12) * (x - 12) + (y - 12) * (y - 12) + (z - 12) * (z - 12) <= 100;
  });
  const DistanceField df = distance_transform(g);
  double best = 0.0;
  for (double d : df.d) best = std::max(best, d);
  EXPECT_NEAR(best, 10.0, 1.0);
}

TEST(DistanceTransform, MatchesBruteForce) {
  std::mt19937_64 rng(2024);
  for (int t = 0; t < 50; ++t) {
    const VoxelGrid g = oracle::random_grid(rng, 16, t % 2 ? 0.9 : 0.6);
    const DistanceField df = distance_transform(g);
    const auto want = oracle::brute_edt(g);
    ASSERT_EQ(df.squared, want) << "grid " << t;
    for (std::size_t i = 0; i < g.size(); ++i) {
      ASSERT_DOUBLE_EQ(df.d[i], std::sqrt(static_cast<double>(want[i])));
      const Index3 p = g.geometry.unravel(i), q = g.geometry.unravel(df.feature[i]);
      ASSERT_FALSE(g.occupancy[df.feature[i]]);
      std::int64_t s = 0;
      for (int c = 0; c < 3; ++c) s += std::int64_t(p[c] - q[c]) * (p[c] - q[c]);
      ASSERT_EQ(s, want[i]);
    }
  }
}

TEST(DistanceTransform, ZeroOffObjectAndLipschitz) {
  std::mt19937_64 rng(5);
  const VoxelGrid g = oracle::random_grid(rng, 14, 0.85);
  const DistanceField df = distance_transform(g);
  const auto& geo = g.geometry;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!g.occupancy[i]) {
      EXPECT_EQ(df.d[i], 0.0);
      continue;
    }
    const Index3 p = geo.unravel(i);
    for (int a = 0; a < 3; ++a) {
      Index3 q = p;
      ++q[a];
      if (!g.at(q)) continue;
      EXPECT_LE(std::abs(df.d[i] - df.d[geo.linear(q)]), geo.spacing + 1e-12);
    }
  }
}

TEST(DistanceTransform, RejectsFullAndEmptyGrids) {
  medspec::GridGeometry geo;
  geo.dims = {4, 4, 4};
  VoxelGrid empty(geo);
  EXPECT_THROW(distance_transform(empty), Error);
  VoxelGrid full(geo);
  for (auto& v : full.occupancy) v = 1;
  EXPECT_THROW(distance_transform(full), Error);
}

TEST(GradientField, WallNeighbourPointsInward) {
  const VoxelGrid g = oracle::grid_from({8, 8, 8}, [](int, int, int z) { return z >= 1; });
  const VectorField vf = gradient_field(distance_transform(g));
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 8; ++x) EXPECT_LT((vf.q[g.geometry.linear(x, y, 1)] - Vec3(0, 0, 1)).norm(), 1e-12);
}

TEST(GradientField, MatchesBruteForceDirection) {
  std::mt19937_64 rng(9);
  for (int t = 0; t < 5; ++t) {
    const VoxelGrid g = oracle::random_grid(rng, 16, 0.9);
    const VectorField vf = gradient_field(distance_transform(g));
    const auto sq = oracle::brute_edt(g);
    const auto& geo = g.geometry;
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (!g.occupancy[i]) continue;
      EXPECT_NEAR(vf.q[i].norm(), 1.0, 1e-9);
      // Any empty voxel at the minimal distance is an acceptable foot point.
      const Index3 p = geo.unravel(i);
      bool matched = false;
      for (std::size_t j = 0; j < g.size() && !matched; ++j) {
        if (g.occupancy[j]) continue;
        const Index3 b = geo.unravel(j);
        const Vec3 diff(p[0] - b[0], p[1] - b[1], p[2] - b[2]);
        if (static_cast<std::int64_t>(diff.squaredNorm()) != sq[i]) continue;
        matched = (vf.q[i] - diff.normalized()).norm() < 1e-12;
      }
      EXPECT_TRUE(matched) << "voxel " << i;
    }
  }
}

TEST(GradientField, SmoothedFieldIsUnit) {
  const VoxelGrid g = oracle::grid_from({20, 20, 20}, [](int x, int y, int z) {
    return (x - 10) * (x - 10) + (y - 10) * (y - 10) + 4 * (z - 10) * (z - 10) <= 64;
  });
  const VectorField vf = smoothed_gradient_field(distance_transform(g));
  for (std::size_t i = 0; i < g.size(); ++i)
    if (g.occupancy[i]) { EXPECT_NEAR(vf.q[i].norm(), 1.0, 1e-9); }
}

}  // namespace
