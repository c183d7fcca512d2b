#include <array>
#include <bit>
#include <cstdint>
#include <vector>

#include "ogmc/morphology.hpp"

namespace ogmc {
namespace {

constexpr int kCenter = 13;

constexpr int bit_of(int dx, int dy, int dz) { return (dx + 1) + 3 * (dy + 1) + 9 * (dz + 1); }

struct NeighborTables {
  std::array<std::uint32_t, 27> adj26{};  // 26-adjacency, center excluded
  std::array<std::uint32_t, 27> adj6{};   // 6-adjacency inside N18, center excluded
  std::uint32_t n18 = 0;
  std::uint32_t n6 = 0;
};

const NeighborTables& tables() {
  static const NeighborTables t = [] {
    NeighborTables t;
    for (int i = 0; i < 27; ++i) {
      const int ix = i % 3 - 1, iy = (i / 3) % 3 - 1, iz = i / 9 - 1;
      const int l1 = std::abs(ix) + std::abs(iy) + std::abs(iz);
      if (i != kCenter && l1 <= 2) t.n18 |= 1u << i;
      if (l1 == 1) t.n6 |= 1u << i;
      for (int j = 0; j < 27; ++j) {
        if (j == i || j == kCenter) continue;
        const int jx = j % 3 - 1, jy = (j / 3) % 3 - 1, jz = j / 9 - 1;
        const int dx = std::abs(ix - jx), dy = std::abs(iy - jy), dz = std::abs(iz - jz);
        if (dx <= 1 && dy <= 1 && dz <= 1) t.adj26[i] |= 1u << j;
        if (dx + dy + dz == 1) t.adj6[i] |= 1u << j;
      }
    }
    return t;
  }();
  return t;
}

std::uint32_t flood(std::uint32_t seed, std::uint32_t allowed, const std::array<std::uint32_t, 27>& adj) {
  std::uint32_t comp = seed;
  std::uint32_t frontier = seed;
  while (frontier) {
    std::uint32_t grow = 0;
    for (std::uint32_t f = frontier; f; f &= f - 1) grow |= adj[std::countr_zero(f)];
    grow &= allowed & ~comp;
    comp |= grow;
    frontier = grow;
  }
  return comp;
}

// Number of 26-components of the foreground in N26 minus the center.
int foreground_components(std::uint32_t nb) {
  const auto& t = tables();
  std::uint32_t rest = nb & ~(1u << kCenter) & ((1u << 27) - 1);
  int count = 0;
  while (rest) {
    const std::uint32_t seed = rest & (~rest + 1);
    rest &= ~flood(seed, rest, t.adj26);
    if (++count > 1) break;
  }
  return count;
}

// Number of 6-components of the background in N18 that are 6-adjacent to the center.
int background_components(std::uint32_t nb) {
  const auto& t = tables();
  const std::uint32_t bg = ~nb & t.n18;
  std::uint32_t faces = bg & t.n6;
  std::uint32_t seen = 0;
  int count = 0;
  while (faces) {
    const std::uint32_t seed = faces & (~faces + 1);
    const std::uint32_t comp = flood(seed, bg, t.adj6);
    seen |= comp;
    faces &= ~seen;
    if (++count > 1) break;
  }
  return count;
}

std::uint32_t neighborhood(const Mask& m, const Voxel& v) {
  std::uint32_t nb = 0;
  for (int dz = -1; dz <= 1; ++dz)
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx)
        if (m.value_or(v.x + dx, v.y + dy, v.z + dz, 0)) nb |= 1u << bit_of(dx, dy, dz);
  return nb;
}

bool is_line_end(std::uint32_t nb) { return std::popcount(nb & ~(1u << kCenter)) == 1; }

}  // namespace

bool is_simple_point(std::uint32_t nb) { return foreground_components(nb) == 1 && background_components(nb) == 1; }

Mask skeletonize(const Mask& vol) {
  Mask img = vol;
  std::vector<std::size_t> fg;
  for (std::size_t i = 0; i < img.size(); ++i)
    if (img[i]) fg.push_back(i);

  // U, D, N, S, E, W
  static constexpr std::array<Voxel, 6> directions = {
      Voxel{0, 0, 1}, Voxel{0, 0, -1}, Voxel{0, -1, 0}, Voxel{0, 1, 0}, Voxel{1, 0, 0}, Voxel{-1, 0, 0}};

  std::vector<std::size_t> candidates;
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& dir : directions) {
      candidates.clear();
      for (const std::size_t idx : fg) {
        const Voxel v = img.voxel(idx);
        if (img.value_or(v.x + dir.x, v.y + dir.y, v.z + dir.z, 0)) continue;
        const std::uint32_t nb = neighborhood(img, v);
        if (is_line_end(nb) || !is_simple_point(nb)) continue;
        candidates.push_back(idx);
      }
      bool removed = false;
      for (const std::size_t idx : candidates) {
        if (!is_simple_point(neighborhood(img, img.voxel(idx)))) continue;
        img[idx] = 0;
        removed = true;
      }
      if (removed) {
        changed = true;
        std::erase_if(fg, [&](std::size_t i) { return img[i] == 0; });
      }
    }
  }
  return img;
}

}  // namespace ogmc
