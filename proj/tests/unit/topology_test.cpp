#include <gtest/gtest.h>

#include <random>

#include "medspec/topology.hpp"
#include "oracles.hpp"

namespace {

using namespace medspec;

VoxelGrid block_of(std::uint32_t mask) {
  return oracle::grid_from({3, 3, 3}, [mask](int x, int y, int z) { return (mask >> (x + 3 * y + 9 * z)) & 1u; });
}

std::uint32_t bit(int x, int y, int z) { return 1u << (x + 3 * y + 9 * z); }

/// Removal preserves object components, background components and the Euler
/// characteristic of the whole configuration.
bool simple_by_oracle(std::uint32_t mask) {
  const VoxelGrid before = block_of(mask | topo::kCenterBit);
  const VoxelGrid after = block_of(mask & ~topo::kCenterBit);
  if (after.count() == 0) return false;
  return oracle::components26(before) == oracle::components26(after) &&
         oracle::background_components6(before) == oracle::background_components6(after) &&
         oracle::euler_characteristic(before) == oracle::euler_characteristic(after);
}

TEST(SimplePoint, LineEndIsSimple) {
  const VoxelGrid g = oracle::grid_from({7, 3, 3}, [](int x, int y, int z) { return y == 1 && z == 1 && x >= 1 && x <= 5; });
  EXPECT_TRUE(is_simple(g, {1, 1, 1}));
  EXPECT_TRUE(is_simple(g, {5, 1, 1}));
}

TEST(SimplePoint, LineMiddleIsNotSimple) {
  const VoxelGrid g = oracle::grid_from({7, 3, 3}, [](int x, int y, int z) { return y == 1 && z == 1 && x >= 1 && x <= 5; });
  EXPECT_FALSE(is_simple(g, {3, 1, 1}));
}

TEST(SimplePoint, PlateCenterOpensTunnel) {
  std::uint32_t plate = 0;
  for (int y = 0; y < 3; ++y)
    for (int x = 0; x < 3; ++x) plate |= bit(x, y, 1);
  EXPECT_FALSE(topo::is_simple_mask(plate));
  EXPECT_FALSE(simple_by_oracle(plate));
}

TEST(SimplePoint, InteriorVoxelIsNotSimple) {
  EXPECT_FALSE(topo::is_simple_mask((1u << 27) - 1));
}

TEST(SimplePoint, AgreesWithGlobalOracle) {
  std::mt19937_64 rng(42);
  int disagreements = 0;
  for (int t = 0; t < 4000; ++t) {
    const double fill = 0.2 + 0.6 * (t % 7) / 6.0;
    std::bernoulli_distribution occ(fill);
    std::uint32_t mask = topo::kCenterBit;
    for (int b = 0; b < 27; ++b)
      if (b != topo::kCenter && occ(rng)) mask |= 1u << b;
    if (topo::is_simple_mask(mask) != simple_by_oracle(mask)) ++disagreements;
  }
  EXPECT_EQ(disagreements, 0);
}

TEST(SimplePoint, OutsideLatticeCountsAsEmpty) {
  const VoxelGrid g = oracle::grid_from({2, 1, 1}, [](int, int, int) { return true; });
  EXPECT_EQ(neighborhood_mask(g, {0, 0, 0}), topo::kCenterBit | bit(2, 1, 1));
  EXPECT_TRUE(is_simple(g, {0, 0, 0}));
}

TEST(Endpoint, LineTip) {
  const VoxelGrid g = oracle::grid_from({7, 3, 3}, [](int x, int y, int z) { return y == 1 && z == 1 && x >= 1 && x <= 5; });
  EXPECT_TRUE(is_endpoint(g, {1, 1, 1}));
  EXPECT_FALSE(is_endpoint(g, {3, 1, 1}));
}

TEST(Endpoint, PlaneInteriorAndRim) {
  const VoxelGrid g = oracle::grid_from({9, 9, 3}, [](int x, int y, int z) { return z == 1 && x >= 1 && x <= 7 && y >= 1 && y <= 7; });
  EXPECT_FALSE(is_endpoint(g, {4, 4, 1}));
  EXPECT_TRUE(is_endpoint(g, {1, 4, 1}));
  EXPECT_TRUE(is_endpoint(g, {1, 1, 1}));
}

TEST(Endpoint, RequiresOccupiedVoxel) {
  const VoxelGrid g = oracle::grid_from({3, 3, 3}, [](int, int, int) { return false; });
  EXPECT_THROW(is_endpoint(g, {1, 1, 1}), Error);
  EXPECT_THROW(is_simple(g, {1, 1, 1}), Error);
}

}  // namespace
