#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "ogmc/metrics.hpp"
#include "ogmc/morphology.hpp"
#include "ogmc/synth.hpp"
#include "support.hpp"

using namespace ogmc;

namespace {

std::vector<Voxel> offsets(const StructuringElement& se) {
  std::vector<Voxel> out;
  const int r = se.radius;
  for (int dz = -r; dz <= r; ++dz)
    for (int dy = -r; dy <= r; ++dy)
      for (int dx = -r; dx <= r; ++dx) {
        const bool in = se.shape == StructuringElement::Shape::cross6
                            ? std::abs(dx) + std::abs(dy) + std::abs(dz) <= r
                            : true;
        if (in) out.push_back({dx, dy, dz});
      }
  return out;
}

// Direct min/max over the element, out of bounds = background.
Mask brute_morph(const Mask& m, MorphOp op, const StructuringElement& se) {
  Mask out(m.extent(), m.spacing());
  const auto offs = offsets(se);
  for (std::size_t i = 0; i < m.size(); ++i) {
    const Voxel v = m.voxel(i);
    bool any = false;
    bool all = true;
    for (const Voxel& d : offs) {
      const std::uint8_t x = m.value_or(v.x + d.x, v.y + d.y, v.z + d.z, 0);
      any = any || x;
      all = all && x;
    }
    out[i] = op == MorphOp::dilate ? any : all;
  }
  return out;
}

bool subset(const Mask& a, const Mask& b) {
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] && !b[i]) return false;
  return true;
}

// Nearest background center, with every voxel outside the grid counted as background.
double brute_edt(const Mask& m, const Voxel& v) {
  const Spacing& s = m.spacing();
  const auto& e = m.extent();
  if (!m(v)) return 0.0;
  double best = std::min({(v.x + 1) * s.x, (e.nx - v.x) * s.x, (v.y + 1) * s.y, (e.ny - v.y) * s.y,
                          (v.z + 1) * s.z, (e.nz - v.z) * s.z});
  for (std::size_t j = 0; j < m.size(); ++j) {
    if (m[j]) continue;
    const Voxel w = m.voxel(j);
    best = std::min(best, distance(test::center_mm(v, s), test::center_mm(w, s)));
  }
  return best;
}

int endpoint_count(const Mask& skel) {
  int n = 0;
  for (std::size_t i = 0; i < skel.size(); ++i) {
    if (!skel[i]) continue;
    const Voxel v = skel.voxel(i);
    int k = 0;
    for (const Voxel& d : neighbors26()) k += skel.value_or(v.x + d.x, v.y + d.y, v.z + d.z, 0);
    n += k == 1;
  }
  return n;
}

// The attachment set of the center cube (its boundary cells covered by a
// foreground neighbor) must be a contractible subcomplex of the cube
// boundary: nonempty, connected, Euler characteristic 1.
bool simple_by_attachment(std::uint32_t nb) {
  struct Cell {
    int c[3];  // 0: at 0, 1: spans [0,1], 2: at 1
    int dim;
  };
  std::vector<Cell> cells;
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b)
      for (int c = 0; c < 3; ++c) {
        if (a == 1 && b == 1 && c == 1) continue;
        cells.push_back({{a, b, c}, (a == 1) + (b == 1) + (c == 1)});
      }
  auto covered = [&](const Cell& cell) {
    for (int i = 0; i < 27; ++i) {
      if (i == 13 || !((nb >> i) & 1u)) continue;
      const int d[3] = {i % 3 - 1, (i / 3) % 3 - 1, i / 9 - 1};
      bool ok = true;
      for (int k = 0; k < 3 && ok; ++k) {
        if (d[k] == -1) ok = cell.c[k] == 0;
        if (d[k] == 1) ok = cell.c[k] == 2;
      }
      if (ok) return true;
    }
    return false;
  };
  std::vector<int> in;
  long chi = 0;
  for (std::size_t i = 0; i < cells.size(); ++i)
    if (covered(cells[i])) {
      in.push_back(static_cast<int>(i));
      chi += cells[i].dim == 1 ? -1 : 1;
    }
  if (in.empty()) return false;
  // Union vertices through covered edges; every covered cell has covered vertices.
  std::vector<int> parent(cells.size());
  for (std::size_t i = 0; i < parent.size(); ++i) parent[i] = static_cast<int>(i);
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  auto is_face = [&](const Cell& f, const Cell& g) {
    for (int k = 0; k < 3; ++k)
      if (g.c[k] != 1 && f.c[k] != g.c[k]) return false;
    return f.dim < g.dim;
  };
  for (int i : in)
    for (int j : in)
      if (is_face(cells[i], cells[j])) parent[find(i)] = find(j);
  int roots = 0;
  for (int i : in) roots += find(i) == i;
  return roots == 1 && chi == 1;
}

}  // namespace

TEST_CASE("erosion removes an isolated voxel") {
  Mask m({5, 5, 5}, {});
  m(2, 2, 2) = 1;
  CHECK(count_foreground(erode(m)) == 0);
}

TEST_CASE("dilating a center voxel by cross6 gives a plus of 7") {
  Mask m({5, 5, 5}, {});
  m(2, 2, 2) = 1;
  const Mask d = dilate(m);
  CHECK(count_foreground(d) == 7);
  for (const Voxel& n : neighbors6()) CHECK(d(2 + n.x, 2 + n.y, 2 + n.z) == 1);
}

TEST_CASE("morph matches the brute-force definition") {
  Rng rng(3);
  for (int trial = 0; trial < 12; ++trial) {
    const Mask m = test::random_mask({9, 8, 7}, 0.55, rng);
    for (auto shape : {StructuringElement::Shape::cross6, StructuringElement::Shape::cube26})
      for (int r : {1, 2}) {
        const StructuringElement se{shape, r};
        CHECK(erode(m, se) == brute_morph(m, MorphOp::erode, se));
        CHECK(dilate(m, se) == brute_morph(m, MorphOp::dilate, se));
      }
  }
}

TEST_CASE("closing is extensive and morph is monotone") {
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const Mask x = test::random_mask({16, 16, 16}, 0.3, rng);
    // Extensive away from the border; outside the grid counts as background.
    const Mask closed = erode(dilate(x));
    bool extensive = true;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const Voxel v = x.voxel(i);
      const bool interior = v.x > 0 && v.y > 0 && v.z > 0 && v.x < 15 && v.y < 15 && v.z < 15;
      if (interior && x[i] && !closed[i]) extensive = false;
    }
    CHECK(extensive);
    CHECK(subset(erode(x), x));
    CHECK(subset(x, dilate(x)));
    Mask y = x;
    for (std::size_t i = 0; i < y.size(); ++i)
      if (rng.uniform() < 0.1) y[i] = 1;
    CHECK(subset(erode(x), erode(y)));
    CHECK(subset(dilate(x), dilate(y)));
  }
}

TEST_CASE("edge map of an empty mask is empty") {
  CHECK(count_foreground(edge_map(Mask({6, 6, 6}, {}))) == 0);
}

TEST_CASE("edge map of a solid cube is the shell D minus E") {
  Mask m({9, 9, 9}, {});
  for (int z = 2; z <= 6; ++z)
    for (int y = 2; y <= 6; ++y)
      for (int x = 2; x <= 6; ++x) m(x, y, z) = 1;
  const Mask e = edge_map(m);
  for (int z = 3; z <= 5; ++z)
    for (int y = 3; y <= 5; ++y)
      for (int x = 3; x <= 5; ++x) CHECK(e(x, y, z) == 0);
  // cube shell (125 - 27) plus the 6 x 25 face-adjacent outside voxels
  CHECK(count_foreground(e) == 98 + 150);
  const Mask d = brute_morph(m, MorphOp::dilate, {});
  const Mask er = brute_morph(m, MorphOp::erode, {});
  for (std::size_t i = 0; i < m.size(); ++i) CHECK(e[i] == (d[i] && !er[i]));
}

TEST_CASE("edge map partitions the dilation") {
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const Mask x = test::random_mask({16, 16, 16}, 0.4, rng);
    const Mask e = edge_map(x);
    const Mask d = dilate(x);
    const Mask er = erode(x);
    bool ok = true;
    for (std::size_t i = 0; i < x.size(); ++i) {
      ok = ok && ((e[i] || er[i]) == d[i]) && !(e[i] && er[i]);
    }
    CHECK(ok);
  }
}

TEST_CASE("gaussian smoothing") {
  Rng rng(2);
  const Mask m = test::random_mask({7, 6, 5}, 0.5, rng);
  const ScalarVolume s0 = gaussian_smooth(m, 0.0);
  for (std::size_t i = 0; i < m.size(); ++i) CHECK(s0[i] == static_cast<float>(m[i]));

  const ScalarVolume ones({8, 8, 8}, {1, 2, 0.5}, 1.0f);
  const ScalarVolume s = gaussian_smooth(ones, 1.3);
  for (std::size_t i = 0; i < s.size(); ++i) CHECK(s[i] == doctest::Approx(1.0).epsilon(1e-6));

  Mask impulse({15, 15, 15}, {});
  impulse(7, 7, 7) = 1;
  const double expected = std::pow(2.0 * std::numbers::pi, -1.5);
  CHECK(std::abs(gaussian_smooth(impulse, 1.0)(7, 7, 7) - expected) < 1e-3);

  CHECK_THROWS_AS(gaussian_smooth(m, -1.0), InvalidArgument);
}

TEST_CASE("distance transform matches brute force") {
  Rng rng(23);
  for (int trial = 0; trial < 6; ++trial) {
    const Spacing s = trial % 2 ? Spacing{1, 1, 1} : Spacing{0.7, 1.3, 2.1};
    const Mask m = test::random_mask({10, 9, 8}, 0.75, rng, s);
    const ScalarVolume dt = distance_transform(m);
    for (std::size_t i = 0; i < m.size(); ++i)
      CHECK(dt[i] == doctest::Approx(brute_edt(m, m.voxel(i))).epsilon(1e-6));
  }
}

TEST_CASE("distance transform examples") {
  const Mask full({5, 5, 5}, {}, std::uint8_t{1});
  const ScalarVolume d = distance_transform(full);
  CHECK(d(0, 0, 0) == doctest::Approx(1.0));
  CHECK(d(2, 2, 2) == doctest::Approx(3.0));
  CHECK(d(1, 2, 2) == doctest::Approx(2.0));

  Mask one({5, 5, 5}, {});
  one(2, 2, 2) = 1;
  CHECK(distance_transform(one)(2, 2, 2) == doctest::Approx(1.0));

  const Mask ball = test::capsule({16, 16, 16}, {8, 8, 8}, {8, 8, 8}, 5.0);
  const double center = distance_transform(ball)(8, 8, 8);
  CHECK(center == doctest::Approx(brute_edt(ball, {8, 8, 8})));
  CHECK(std::abs(center - 5.0) <= 1.0);
}

TEST_CASE("distance_to_set matches brute force") {
  Rng rng(31);
  const Spacing s{0.5, 1.0, 1.5};
  const Mask t = test::random_mask({9, 8, 7}, 0.05, rng, s);
  const auto d = distance_to_set(t);
  for (std::size_t i = 0; i < t.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < t.size(); ++j)
      if (t[j]) best = std::min(best, distance(t.to_mm(t.voxel(i)), t.to_mm(t.voxel(j))));
    CHECK(d[i] == doctest::Approx(best).epsilon(1e-9));
  }
  for (double v : distance_to_set(Mask({3, 3, 3}, {}))) CHECK(std::isinf(v));
}

TEST_CASE("simple-point test agrees with the attachment-set oracle") {
  Rng rng(101);
  int simple = 0;
  for (int trial = 0; trial < 60000; ++trial) {
    const double p = 0.1 + 0.8 * rng.uniform();
    std::uint32_t nb = 0;
    for (int i = 0; i < 27; ++i)
      if (i != 13 && rng.uniform() < p) nb |= 1u << i;
    const bool expected = simple_by_attachment(nb);
    simple += expected;
    if (is_simple_point(nb) != expected) {
      INFO("neighborhood " << nb);
      CHECK(is_simple_point(nb) == expected);
    }
  }
  CHECK(simple > 1000);  // the sample covers both classes
  CHECK_FALSE(is_simple_point(0));
  CHECK_FALSE(is_simple_point((1u << 27) - 1 - (1u << 13)));  // interior point
  CHECK(is_simple_point(1u << 4));                            // single face neighbor
}

TEST_CASE("skeleton of an empty mask is empty") {
  CHECK(count_foreground(skeletonize(Mask({8, 8, 8}, {}))) == 0);
}

TEST_CASE("cylinder thins to a single path with two endpoints") {
  const Mask cyl = test::capsule({20, 20, 50}, {10, 10, 5}, {10, 10, 44}, 3.0);
  const Mask skel = skeletonize(cyl);
  CHECK(subset(skel, cyl));
  CHECK(endpoint_count(skel) == 2);
  CHECK(betti_numbers(skel) == Betti{1, 0, 0});
  CHECK(skeletonize(skel) == skel);
}

TEST_CASE("oblique tube has no spurs") {
  const Mask tube = test::capsule({48, 30, 20}, {6, 6, 8}, {42, 24, 8}, 3.0);
  CHECK(endpoint_count(skeletonize(tube)) == 2);
}

TEST_CASE("thinning preserves topology") {
  Rng rng(77);
  for (int trial = 0; trial < 15; ++trial) {
    const Mask x = test::random_blobs({20, 20, 20}, 6, rng);
    const Mask s = skeletonize(x);
    CHECK(subset(s, x));
    CHECK(betti_numbers(s) == betti_numbers(x));
    CHECK(euler_characteristic(s) == euler_characteristic(x));
    CHECK(skeletonize(s) == s);
  }
  // ring keeps its loop
  Mask ring({24, 24, 8}, {});
  for (int k = 0; k < 64; ++k) {
    const double a = 2 * std::numbers::pi * k / 64;
    const Vec3 c{12 + 7 * std::cos(a), 12 + 7 * std::sin(a), 4};
    test::stamp_capsule(ring, c, c, 2.0);
  }
  CHECK(betti_numbers(skeletonize(ring)) == Betti{1, 1, 0});
}

TEST_CASE("thinning keeps one component per synthetic tree") {
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    SynthParams p;
    p.seed = seed;
    p.extent = {96, 96, 96};
    p.length_mm = {16, 24};
    const auto tree = generate_tree(p);
    const Mask s = skeletonize(tree.mask);
    CHECK(betti_numbers(s).b0 == 1);
    CHECK(skeletonize(s) == s);
  }
}
