#pragma once

#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "ogmc/curve.hpp"
#include "ogmc/geodesic.hpp"
#include "ogmc/minimal_surface.hpp"
#include "ogmc/skeleton_graph.hpp"
#include "ogmc/volume.hpp"

namespace ogmc {

struct RepairParams {
  double epsilon = std::numbers::sqrt2;  // TFD acceptance bound
  double d_max_vox = 30.0;               // endpoint distance gate, in smallest-spacing units
  int window = kDefaultEndpointWindow;
  double kappa_min = 1.0;                // 1/mm; below this the chain normal is noise
  std::optional<double> resample_step_mm;     // default: smallest spacing
  double x_min_fraction = 0.25;
  FrameTransport transport = FrameTransport::frenet_field;
  std::optional<double> sigma_mm;  // speed smoothing; default 2 x smallest spacing
  double delta = 0.05;             // speed floor
  double box_margin = 1.5;         // fast-marching box, in pair distances
  double geodesic_step = 0.5;      // voxels
  double radius_floor_vox = 1.0;
  SurfaceOptions surface;
  bool rethin = false;  // re-skeletonize after every connection instead of grafting

  double resample_step(const Spacing& s) const { return resample_step_mm.value_or(s.min()); }
  double sigma(const Spacing& s) const { return sigma_mm.value_or(2.0 * s.min()); }
};

/// Throws InvalidArgument on out-of-range values.
void validate(const RepairParams& params);

enum class PairStatus { accepted, rejected_tfd, rejected_geometry, rejected_distance, connected, failed };

const char* to_string(PairStatus s);

struct CandidatePair {
  Voxel p0;  // main-tree endpoint
  Voxel q0;  // subtree endpoint
  int tree = -1;
  double distance_mm = 0.0;
  std::optional<double> tfd;  // absent when the distance gate rejected the pair
  TfdResult::Status tfd_status = TfdResult::Status::ok;
  std::optional<double> area_mm2;  // only for pairs that passed the TFD test
  double msmo = 0.0;
  int surface_iterations = 0;
  PairStatus status = PairStatus::rejected_distance;
  std::string reason;

  // Filled once connected.
  int iteration = 0;
  double tube_radius_mm = 0.0;
  double path_length_mm = 0.0;
  std::size_t path_points = 0;
};

/// Distance gate, then TFD, then the minimal surface area for TFD-passing pairs.
CandidatePair score_pair(const EndpointInfo& main_end, const EndpointInfo& sub_end, const RepairParams& params,
                         const Spacing& spacing);

/// Strict order used to pick the next connection: smaller area, then
/// (areas within 1e-9) smaller TFD, then lexicographic (p0, q0).
bool better_pair(const CandidatePair& a, const CandidatePair& b);

struct IterationRecord {
  int iteration = 0;
  std::size_t pairs_considered = 0;
  std::size_t pairs_scored = 0;  // cache misses
  std::size_t j_size = 0;
  std::vector<CandidatePair> failed;  // geodesic failures before the connection
  std::optional<int> connected_tree;
};

struct TreeSummary {
  int id = 0;
  double length_mm = 0.0;
  std::size_t endpoints = 0;
};

struct RepairReport {
  std::vector<CandidatePair> connections;  // execution order
  std::vector<IterationRecord> iterations;
  std::vector<int> absorbed_trees;             // connected through a geodesic
  std::vector<int> incidentally_absorbed;      // joined by a tube laid for another pair
  std::vector<int> unconnected_trees;
  std::optional<TreeSummary> main_tree;
  std::vector<TreeSummary> subtrees;
  int components_before = 0;
  int components_after = 0;
  double runtime_s = 0.0;
  RepairParams params;
  std::vector<std::string> warnings;
};

struct RepairResult {
  Mask mask;
  RepairReport report;
};

/// Orientation-guided connection loop: thin, build the main tree and the
/// subtrees, then repeatedly score main x subtree endpoint pairs, connect the
/// minimal-area accepted pair with a geodesic tube and merge the subtree's
/// endpoints into the main set, until no pair is accepted. The output is a
/// superset of `seg`; an empty input is returned unchanged.
RepairResult repair(const Mask& seg, const RepairParams& params = {});

nlohmann::json to_json(const RepairParams& params);
nlohmann::json to_json(const CandidatePair& pair);
/// `timings` false zeroes runtime fields so reports are byte-stable.
nlohmann::json to_json(const RepairReport& report, bool timings = true);

}  // namespace ogmc
