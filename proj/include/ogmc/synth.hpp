#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "ogmc/volume.hpp"

namespace ogmc {

struct Range {
  double lo = 0.0;
  double hi = 0.0;
};

struct SynthParams {
  std::uint64_t seed = 0;
  Extent extent{128, 128, 128};
  Spacing spacing{};
  int depth = 2;                   // bifurcation levels below the root
  double radius_root_mm = 3.0;
  double taper = 0.75;             // child / parent radius
  double radius_floor_vox = 1.5;   // in units of the smallest spacing
  Range branch_angle_deg{25.0, 45.0};
  Range length_mm{22.0, 34.0};
};

struct SynthBranch {
  int id = 0;
  int parent = -1;
  int depth = 0;
  double radius_mm = 0.0;
  double length_mm = 0.0;
  std::vector<Vec3> centerline_mm;  // from the parent junction outwards
};

struct GroundTruth {
  std::vector<SynthBranch> branches;
  std::vector<std::string> warnings;

  std::size_t branch_count() const { return branches.size(); }
  double total_length_mm() const;
};

struct SynthVolume {
  Mask mask;
  GroundTruth truth;
};

/// Bifurcating tree of cubic Bezier branches rasterized as a union of balls.
/// Each branch is redrawn until it stays inside the grid and clear of the
/// other branches; a branch that never fits is clipped to the grid, its
/// subtree dropped and a warning recorded. Deterministic per seed.
SynthVolume generate_tree(const SynthParams& params);

struct CutRecord {
  int branch = -1;
  Vec3 center_mm;
  double radius_mm = 0.0;
  double arc_mm = 0.0;          // position along the branch
  double severed_length_mm = 0.0;  // centerline length inside the ball
  std::size_t removed_voxels = 0;
  int attempts = 0;
};

struct FractureParams {
  int cuts = 1;
  std::uint64_t seed = 0;
  Range radius_vox{2.0, 5.0};
  double junction_clearance_vox = 3.0;  // gap between the cut ball and the neighboring tube surface
  int max_attempts = 20;
};

struct FractureResult {
  Mask mask;
  std::vector<CutRecord> cuts;
  int requested = 0;
  std::vector<std::string> warnings;
};

/// Deletes balls centered on interior centerline points, each accepted only
/// if it raises the 26-connected component count by exactly one. A cut that
/// cannot be placed within max_attempts draws is skipped and logged.
FractureResult fracture(const Mask& vol, const GroundTruth& truth, const FractureParams& params);

nlohmann::json to_json(const GroundTruth& truth);
nlohmann::json to_json(const FractureResult& result);
nlohmann::json to_json(const SynthParams& params);

}  // namespace ogmc
