// Shared helpers for tests: scratch directories and the common
// voxelize -> thin -> spectral chain.
#pragma once

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include "medspec/mesh.hpp"
#include "medspec/recon.hpp"
#include "medspec/shapes.hpp"
#include "medspec/spectral.hpp"
#include "medspec/thinning.hpp"
#include "medspec/voxelize.hpp"

namespace fixture {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    std::string name = "medspec";
    if (info) name += std::string("_") + info->test_suite_name() + "_" + info->name();
    path_ = std::filesystem::temp_directory_path() / name;
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& leaf) const { return path_ / leaf; }

 private:
  std::filesystem::path path_;
};

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream(path) << text;
}

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

struct Chain {
  medspec::VoxelGrid grid;
  medspec::SkeletalPointSet skeleton;
  medspec::ReconGrid recon;
  medspec::SpectralResult spectral;
};

/// Voxelizes `mesh` as given (no canonical pose), thins at `tau`, and solves
/// for `k` eigenpairs with default graph options.
inline Chain run_chain(const medspec::TriangleMesh& mesh, int resolution, int k, double tau = 0.25) {
  Chain c;
  c.grid = medspec::voxelize(mesh, resolution);
  c.skeleton = medspec::extract_medial_surface(c.grid, tau);
  c.recon = medspec::reconstruct(c.skeleton, c.grid.geometry);
  medspec::SpectralParams p;
  p.k = k;
  c.spectral = medspec::medial_spectral(mesh, c.skeleton, c.recon, p);
  return c;
}

/// Icosphere with a smooth radial bump pattern; no symmetries, so its
/// canonical pose is well defined.
inline medspec::TriangleMesh blob(int subdivisions) {
  medspec::TriangleMesh m = medspec::shapes::icosphere(1.0, subdivisions);
  for (auto& v : m.vertices) {
    const medspec::Vec3 u = v.normalized();
    const double r = 1 + 0.18 * std::sin(2 * u.x() + 0.3) + 0.12 * std::cos(3 * u.y() - u.z()) + 0.1 * u.x() * u.z() +
                     0.08 * std::sin(4 * u.z() + 1);
    v = r * u;
  }
  return m;
}

/// `mesh` moved into its canonical pose.
inline medspec::TriangleMesh posed(const medspec::TriangleMesh& mesh) {
  const medspec::RigidPose p = medspec::canonical_pose(mesh);
  return medspec::transformed(mesh, p.rotation, p.translation);
}

inline Eigen::Matrix3d random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> n01;
  Eigen::Quaterniond q(n01(rng), n01(rng), n01(rng), n01(rng));
  return q.normalized().toRotationMatrix();
}

}  // namespace fixture
