#include <doctest.h>

#include <cmath>

#include "ogmc/metrics.hpp"
#include "ogmc/synth.hpp"
#include "support.hpp"

using namespace ogmc;

namespace {

SynthParams small(std::uint64_t seed, int depth = 2) {
  SynthParams p;
  p.seed = seed;
  p.depth = depth;
  p.extent = {96, 96, 96};
  p.length_mm = {18, 26};
  return p;
}

bool subset(const Mask& a, const Mask& b) {
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] && !b[i]) return false;
  return true;
}

}  // namespace

TEST_CASE("depth 0 is a single tube") {
  const SynthVolume v = generate_tree(small(1, 0));
  CHECK(v.truth.branch_count() == 1);
  CHECK(betti_numbers(v.mask) == Betti{1, 0, 0});
  CHECK(tree_stats(v.mask).branch_count == 1);
}

TEST_CASE("depth 2 has seven branches with tapered radii") {
  const SynthVolume v = generate_tree(small(2));
  REQUIRE(v.truth.warnings.empty());
  CHECK(v.truth.branch_count() == 7);
  for (const auto& b : v.truth.branches) {
    if (b.parent >= 0) {
      const auto& parent = v.truth.branches[b.parent];
      CHECK(b.depth == parent.depth + 1);
      CHECK(b.radius_mm == doctest::Approx(std::max(1.5, parent.radius_mm * 0.75)));
      CHECK(distance(b.centerline_mm.front(), parent.centerline_mm.back()) < 1e-9);
    }
    CHECK(b.radius_mm >= 1.5);
    double len = 0.0;
    for (std::size_t i = 1; i < b.centerline_mm.size(); ++i) len += distance(b.centerline_mm[i], b.centerline_mm[i - 1]);
    CHECK(b.length_mm == doctest::Approx(len));
  }
}

TEST_CASE("synthetic trees are single components without loops") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const SynthVolume v = generate_tree(small(seed));
    CHECK(betti_numbers(v.mask) == Betti{1, 0, 0});
  }
}

TEST_CASE("generation is deterministic per seed") {
  const SynthVolume a = generate_tree(small(9));
  const SynthVolume b = generate_tree(small(9));
  CHECK(a.mask == b.mask);
  CHECK(to_json(a.truth).dump() == to_json(b.truth).dump());
  const SynthVolume c = generate_tree(small(10));
  CHECK_FALSE(a.mask == c.mask);
}

TEST_CASE("ground-truth length matches the skeleton within ten percent") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    SynthParams p;
    p.seed = seed;
    const SynthVolume v = generate_tree(p);
    const double skel = tree_stats(v.mask).length_mm;
    CHECK(std::abs(skel - v.truth.total_length_mm()) <= 0.10 * v.truth.total_length_mm());
  }
}

TEST_CASE("invalid parameters are rejected") {
  SynthParams p = small(0);
  p.taper = 1.0;
  CHECK_THROWS_AS(generate_tree(p), InvalidArgument);
  p = small(0);
  p.length_mm = {30, 20};
  CHECK_THROWS_AS(generate_tree(p), InvalidArgument);
  p = small(0);
  p.radius_root_mm = 0.5;
  CHECK_THROWS_AS(generate_tree(p), InvalidArgument);
  p = small(0);
  p.extent = {8, 8, 8};
  CHECK_THROWS_AS(generate_tree(p), InvalidArgument);

  const SynthVolume v = generate_tree(small(0));
  FractureParams f;
  f.cuts = 0;
  CHECK_THROWS_AS(fracture(v.mask, v.truth, f), InvalidArgument);
}

TEST_CASE("one cut severs a straight tube") {
  SynthParams p = small(5, 0);
  p.length_mm = {40, 50};
  const SynthVolume v = generate_tree(p);
  FractureParams f;
  f.seed = 5;
  const FractureResult r = fracture(v.mask, v.truth, f);
  REQUIRE(r.cuts.size() == 1);
  CHECK(betti_numbers(r.mask).b0 == 2);
  CHECK(subset(r.mask, v.mask));
  CHECK(r.cuts[0].radius_mm >= 2.0);
  CHECK(r.cuts[0].radius_mm <= 5.0);
}

TEST_CASE("each accepted cut adds exactly one component") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const SynthVolume v = generate_tree(small(seed));
    FractureParams f;
    f.cuts = 3;
    f.seed = seed + 100;
    const FractureResult r = fracture(v.mask, v.truth, f);
    CHECK(subset(r.mask, v.mask));
    CHECK(betti_numbers(r.mask).b0 == 1 + static_cast<int>(r.cuts.size()));
    CHECK(r.requested == 3);
    CHECK(r.cuts.size() + r.warnings.size() >= 3);
    if (seed < 5) CHECK(r.cuts.size() == 3);
  }
}

TEST_CASE("severed lengths account for the lost skeleton length") {
  int checked = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    SynthParams p;
    p.seed = seed;
    const SynthVolume v = generate_tree(p);
    FractureParams f;
    f.cuts = 2;
    f.seed = seed + 7;
    const FractureResult r = fracture(v.mask, v.truth, f);
    if (r.cuts.empty()) continue;
    // Thinning retreats about one tube radius from each new cap, so the
    // skeleton loses the severed centerline plus a few radii per cut.
    double severed = 0.0, retreat = 0.0;
    for (const auto& c : r.cuts) {
      severed += c.severed_length_mm;
      retreat += 3.0 * v.truth.branches[c.branch].radius_mm + 3.0;
    }
    const double lost = tree_stats(v.mask).length_mm - tree_stats(r.mask).length_mm;
    CHECK(lost >= 0.8 * severed);
    CHECK(lost <= severed + retreat);
    ++checked;
  }
  CHECK(checked >= 8);
}

TEST_CASE("fracture is deterministic and serializes") {
  const SynthVolume v = generate_tree(small(4));
  FractureParams f;
  f.cuts = 2;
  f.seed = 44;
  const FractureResult a = fracture(v.mask, v.truth, f);
  const FractureResult b = fracture(v.mask, v.truth, f);
  CHECK(a.mask == b.mask);
  CHECK(to_json(a).dump() == to_json(b).dump());
  CHECK(to_json(a)["cuts"].size() == a.cuts.size());
}
