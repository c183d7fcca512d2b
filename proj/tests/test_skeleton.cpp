#include <doctest.h>

#include <algorithm>

#include "ogmc/morphology.hpp"
#include "ogmc/skeleton_graph.hpp"
#include "support.hpp"

using namespace ogmc;

namespace {

Mask draw_path(Mask m, Voxel from, Voxel step, int count) {
  for (int i = 0; i < count; ++i) m(from.x + i * step.x, from.y + i * step.y, from.z + i * step.z) = 1;
  return m;
}

ScalarVolume unit_dt(const Mask& m) { return ScalarVolume(m.extent(), m.spacing(), 1.0f); }

int count_kind(const SkeletonComponent& c, NodeKind k) {
  return static_cast<int>(std::count_if(c.voxels.begin(), c.voxels.end(), [k](const auto& n) { return n.kind == k; }));
}

// Star with arms along the xy diagonals (and -y) so no two arm voxels touch.
Mask star(int arms, int arm_len) {
  const Voxel dirs[] = {{1, 1, 0}, {-1, 1, 0}, {0, -1, 0}, {1, -1, 0}, {-1, -1, 0}};
  Mask m({30, 30, 3}, {});
  m(15, 15, 1) = 1;
  for (int a = 0; a < arms; ++a) m = draw_path(m, {15 + dirs[a].x, 15 + dirs[a].y, 1}, dirs[a], arm_len);
  return m;
}

}  // namespace

TEST_CASE("straight path is one component with one branch") {
  const Mask m = draw_path(Mask({14, 5, 5}, {}), {2, 2, 2}, {1, 0, 0}, 10);
  const SkeletonGraph g = build_graph(m, unit_dt(m));
  REQUIRE(g.components.size() == 1);
  const auto& c = g.components[0];
  CHECK(count_kind(c, NodeKind::endpoint) == 2);
  CHECK(count_kind(c, NodeKind::bifurcation) == 0);
  CHECK(c.branches.size() == 1);
  CHECK(c.length_mm == doctest::Approx(9.0));
  CHECK(c.branches[0].step_length_mm == doctest::Approx(9.0));
}

TEST_CASE("Y shape has three endpoints, one bifurcation, three branches") {
  const Mask m = star(3, 6);
  const SkeletonGraph g = build_graph(m, unit_dt(m));
  REQUIRE(g.components.size() == 1);
  const auto& c = g.components[0];
  CHECK(count_kind(c, NodeKind::endpoint) == 3);
  CHECK(count_kind(c, NodeKind::bifurcation) == 1);
  CHECK(c.branches.size() == 3);
}

TEST_CASE("n-star has n endpoints") {
  for (int n = 3; n <= 5; ++n) {
    const Mask m = star(n, 5);
    const SkeletonGraph g = build_graph(m, unit_dt(m));
    REQUIRE(g.components.size() == 1);
    CHECK(count_kind(g.components[0], NodeKind::endpoint) == n);
    CHECK(g.components[0].endpoints().size() == static_cast<std::size_t>(n));
  }
}

TEST_CASE("two disjoint paths are two components") {
  Mask m = draw_path(Mask({12, 12, 5}, {}), {1, 2, 2}, {1, 0, 0}, 8);
  m = draw_path(m, {1, 8, 2}, {1, 0, 0}, 8);
  const SkeletonGraph g = build_graph(m, unit_dt(m));
  CHECK(g.components.size() == 2);
  CHECK(g.branch_count() == 2);
}

TEST_CASE("branch lengths add up to the skeleton length") {
  Rng rng(4);
  for (int trial = 0; trial < 8; ++trial) {
    const Mask x = test::random_blobs({24, 24, 24}, 8, rng);
    const Mask s = skeletonize(x);
    if (count_foreground(s) == 0) continue;
    const SkeletonGraph g = build_graph(s, distance_transform(x));
    double sum = 0.0;
    std::size_t voxels = 0;
    for (const auto& c : g.components) {
      double comp = 0.0;
      for (const auto& b : c.branches) comp += b.length_mm;
      CHECK(comp == doctest::Approx(c.length_mm));
      sum += comp;
      voxels += c.voxels.size();
    }
    CHECK(sum == doctest::Approx(g.total_length_mm()));
    CHECK(voxels == count_foreground(s));
    const TreeSet trees = build_trees(g);
    double tree_sum = trees.main.total_length_mm;
    for (const auto& t : trees.subtrees) tree_sum += t.total_length_mm;
    CHECK(tree_sum == doctest::Approx(g.total_length_mm()));
  }
}

TEST_CASE("build_trees picks the longest component and sorts the rest") {
  Mask m({110, 12, 3}, {});
  m = draw_path(m, {2, 9, 1}, {1, 0, 0}, 8);     // 7 mm
  m = draw_path(m, {2, 2, 1}, {1, 0, 0}, 101);   // 100 mm
  m = draw_path(m, {2, 5, 1}, {1, 0, 0}, 41);    // 40 mm
  const TreeSet t = build_trees(build_graph(m, unit_dt(m)));
  CHECK(t.main.total_length_mm == doctest::Approx(100.0));
  CHECK(t.main.directed);
  CHECK(t.main.id == 0);
  REQUIRE(t.subtrees.size() == 2);
  CHECK(t.subtrees[0].total_length_mm == doctest::Approx(40.0));
  CHECK(t.subtrees[1].total_length_mm == doctest::Approx(7.0));
  CHECK_FALSE(t.subtrees[0].directed);
  CHECK_FALSE(t.subtrees[0].root.has_value());
}

TEST_CASE("single component gives no subtrees") {
  const Mask m = draw_path(Mask({12, 5, 5}, {}), {1, 2, 2}, {1, 0, 0}, 9);
  const TreeSet t = build_trees(build_graph(m, unit_dt(m)));
  CHECK(t.subtrees.empty());
  CHECK_THROWS_AS(build_trees(build_graph(Mask({4, 4, 4}, {}), ScalarVolume({4, 4, 4}, {}))), InvalidArgument);
}

TEST_CASE("root is the thickest endpoint, ties to the smaller voxel") {
  const Mask m = draw_path(Mask({14, 5, 5}, {}), {2, 2, 2}, {1, 0, 0}, 10);
  ScalarVolume dt = unit_dt(m);
  dt(11, 2, 2) = 3.0f;
  dt(2, 2, 2) = 2.0f;
  TreeSet t = build_trees(build_graph(m, dt));
  REQUIRE(t.main.root.has_value());
  CHECK(*t.main.root == Voxel{11, 2, 2});
  for (const auto& b : t.main.branches) CHECK(b.voxels.front() == Voxel{11, 2, 2});

  dt(2, 2, 2) = 3.0f;
  t = build_trees(build_graph(m, dt));
  CHECK(*t.main.root == Voxel{2, 2, 2});
}

TEST_CASE("directed main tree branches point away from the root") {
  const Mask m = star(3, 6);
  ScalarVolume dt = unit_dt(m);
  dt(15, 15 - 6, 1) = 5.0f;  // tip of the -y arm
  const TreeSet t = build_trees(build_graph(m, dt));
  REQUIRE(t.main.root.has_value());
  CHECK(*t.main.root == Voxel{15, 9, 1});
  int from_root = 0;
  for (const auto& b : t.main.branches) from_root += b.voxels.front() == *t.main.root;
  CHECK(from_root == 1);
  for (const auto& b : t.main.branches) CHECK(b.voxels.back() != *t.main.root);
}

TEST_CASE("endpoint curves") {
  const Mask path = draw_path(Mask({14, 5, 5}, {2, 1, 1}), {2, 2, 2}, {1, 0, 0}, 10);
  const TreeSet t = build_trees(build_graph(path, unit_dt(path)));
  const EndpointInfo e = endpoint_curve(t.main, {2, 2, 2}, 5);
  REQUIRE(e.chain_mm.size() == 5);
  CHECK_FALSE(e.degenerate);
  for (int i = 0; i < 5; ++i) {
    CHECK(e.chain[i] == Voxel{2 + i, 2, 2});
    CHECK(e.chain_mm[i].x == doctest::Approx(2.0 * (2 + i)));
    CHECK(e.chain_mm[i].y == doctest::Approx(2.0));
  }
  CHECK_THROWS_AS(endpoint_curve(t.main, {5, 2, 2}, 5), InvalidArgument);

  // -y arm of length 1: one voxel from the bifurcation
  const Mask y = star(3, 6);
  Mask shortarm = y;
  for (int i = 2; i <= 6; ++i) shortarm(15, 15 - i, 1) = 0;
  const TreeSet ty = build_trees(build_graph(shortarm, unit_dt(shortarm)));
  const EndpointInfo s = endpoint_curve(ty.main, {15, 14, 1}, 5);
  CHECK(s.chain.size() == 2);
  CHECK_FALSE(s.degenerate);

  Mask lone({5, 5, 5}, {});
  lone(2, 2, 2) = 1;
  const TreeSet tl = build_trees(build_graph(lone, unit_dt(lone)));
  const EndpointInfo d = endpoint_curve(tl.main, {2, 2, 2});
  CHECK(d.degenerate);
  CHECK(d.chain.size() == 1);
}

TEST_CASE("non unit-width spots are normalized and reported") {
  Mask m = draw_path(Mask({16, 6, 6}, {}), {1, 2, 2}, {1, 0, 0}, 14);
  m(7, 3, 2) = m(8, 3, 2) = 1;  // 2x2 block
  const SkeletonGraph g = build_graph(m, unit_dt(m));
  REQUIRE(g.components.size() == 1);
  CHECK(g.components[0].voxels.size() == count_foreground(m));
  CHECK(g.diagnostics.multi_voxel_junctions + g.diagnostics.absorbed_voxels > 0);
}

TEST_CASE("graph construction is deterministic") {
  Rng rng(8);
  const Mask x = test::random_blobs({24, 24, 24}, 8, rng);
  const Mask s = skeletonize(x);
  const ScalarVolume dt = distance_transform(x);
  const auto a = to_json(build_graph(s, dt));
  const auto b = to_json(build_graph(skeletonize(x), distance_transform(x)));
  CHECK(a.dump() == b.dump());
  CHECK(a.contains("components"));
}
