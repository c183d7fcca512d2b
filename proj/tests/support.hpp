#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <string>

#include "ogmc/random.hpp"
#include "ogmc/volume.hpp"

namespace ogmc::test {

inline Vec3 center_mm(const Voxel& v, const Spacing& s) { return {v.x * s.x, v.y * s.y, v.z * s.z}; }

/// Solid segment a-b of radius r (all in mm) rasterized into `m`.
inline void stamp_capsule(Mask& m, const Vec3& a, const Vec3& b, double r) {
  const Spacing& s = m.spacing();
  const Vec3 ab = b - a;
  const double len2 = dot(ab, ab);
  const auto& e = m.extent();
  for (int z = 0; z < e.nz; ++z)
    for (int y = 0; y < e.ny; ++y)
      for (int x = 0; x < e.nx; ++x) {
        const Vec3 c{x * s.x, y * s.y, z * s.z};
        const double t = len2 > 0 ? std::clamp(dot(c - a, ab) / len2, 0.0, 1.0) : 0.0;
        if (norm(c - (a + t * ab)) <= r) m(x, y, z) = 1;
      }
}

inline Mask capsule(Extent e, const Vec3& a, const Vec3& b, double r, Spacing s = {}) {
  Mask m(e, s);
  stamp_capsule(m, a, b, r);
  return m;
}

/// Independent Bernoulli voxels.
inline Mask random_mask(Extent e, double p, Rng& rng, Spacing s = {}) {
  Mask m(e, s);
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = rng.uniform() < p ? 1 : 0;
  return m;
}

/// Smoothed random blobs: thresholded sum of a few random balls.
inline Mask random_blobs(Extent e, int balls, Rng& rng) {
  Mask m(e, {});
  for (int k = 0; k < balls; ++k) {
    const Vec3 c{rng.uniform(2, e.nx - 3), rng.uniform(2, e.ny - 3), rng.uniform(2, e.nz - 3)};
    const double r = rng.uniform(1.5, 4.0);
    stamp_capsule(m, c, c, r);
  }
  return m;
}

inline std::filesystem::path tmp_dir() {
  std::filesystem::path p = OGMC_TEST_TMP;
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace ogmc::test
