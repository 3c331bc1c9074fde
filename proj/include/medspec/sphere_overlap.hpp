#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>

#include "medspec/error.hpp"
#include "medspec/mesh.hpp"

namespace medspec {

inline double ball_volume(double r) { return 4.0 / 3.0 * std::numbers::pi * r * r * r; }

/// Volume of the intersection of two balls (the lens between them).
inline double sphere_overlap_volume(const Vec3& c1, double r1, const Vec3& c2, double r2) {
  if (!(r1 > 0) || !(r2 > 0) || !std::isfinite(r1) || !std::isfinite(r2))
    fail(ErrorCode::domain, "sphere radii must be positive and finite");
  const double d = (c1 - c2).norm();
  if (d >= r1 + r2) return 0.0;
  if (d <= std::abs(r1 - r2)) return ball_volume(std::min(r1, r2));
  const double s = r1 + r2 - d;
  const double dr = r1 - r2;
  return std::numbers::pi * s * s * (d * d + 2.0 * d * (r1 + r2) - 3.0 * dr * dr) / (12.0 * d);
}

}  // namespace medspec
