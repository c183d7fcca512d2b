#pragma once

#include <optional>
#include <vector>

#include "json.hpp"
#include "ogmc/volume.hpp"

namespace ogmc {

/// Classification by the number of 26-neighbors on the skeleton:
/// 0 or 1 -> endpoint, 2 -> regular, 3+ -> bifurcation.
enum class NodeKind { endpoint, regular, bifurcation };

struct SkeletonNode {
  Voxel voxel;
  NodeKind kind = NodeKind::regular;
  double radius_mm = 0.0;  // distance-transform value of the unthinned mask
};

/// A chain of skeleton voxels between two graph nodes (endpoints or
/// junction clusters), both terminal voxels included.
struct Branch {
  std::vector<Voxel> voxels;
  double length_mm = 0.0;       // arc length of the chain after a 5-voxel moving average
  double step_length_mm = 0.0;  // raw 26-step length (1, sqrt2, sqrt3 scaled by spacing)
  int from = -1;  // graph-node ids within the component
  int to = -1;
};

/// Endpoint voxel, or a 26-connected cluster of bifurcation voxels.
struct GraphNode {
  std::vector<Voxel> voxels;
  NodeKind kind = NodeKind::endpoint;
};

struct SkeletonComponent {
  std::vector<SkeletonNode> voxels;  // raster order
  std::vector<GraphNode> nodes;
  std::vector<Branch> branches;
  double length_mm = 0.0;  // sum of branch lengths
  int cycle_count = 0;     // independent cycles of the node graph

  std::vector<Voxel> endpoints() const;
};

struct GraphDiagnostics {
  int multi_voxel_junctions = 0;  // junction clusters made of more than one voxel
  int absorbed_voxels = 0;        // regular voxels folded into a junction cluster
  int cycles = 0;
};

struct SkeletonGraph {
  Extent extent;
  Spacing spacing;
  std::vector<SkeletonComponent> components;  // ordered by first voxel in raster order
  GraphDiagnostics diagnostics;

  double total_length_mm() const;
  std::size_t branch_count() const;
};

/// Splits the skeleton into 26-connected components, classifies every voxel
/// and traces branch chains between endpoints and junction clusters.
/// Voxels clustered around a junction (non unit-width spots) are merged into
/// a single junction node and counted in the diagnostics.
SkeletonGraph build_graph(const Mask& skeleton, const ScalarVolume& distance);

struct VesselTree {
  int id = 0;
  std::vector<SkeletonNode> nodes;
  std::vector<GraphNode> graph_nodes;
  std::vector<Branch> branches;  // directed trees: oriented away from the root
  bool directed = false;
  std::optional<Voxel> root;
  double total_length_mm = 0.0;
  int cycle_count = 0;
  Spacing spacing;

  std::vector<Voxel> endpoints() const;
  const SkeletonNode* find(const Voxel& v) const;
};

struct TreeSet {
  VesselTree main;
  std::vector<VesselTree> subtrees;  // decreasing total length
};

/// The longest component becomes the directed main tree, rooted at its
/// thickest endpoint (ties: smallest voxel). Other components become
/// undirected subtrees sorted by decreasing length. Ids: main 0, subtrees
/// 1..n. Throws InvalidArgument on an empty graph.
TreeSet build_trees(const SkeletonGraph& graph);

/// Inward chain starting at a tree endpoint.
struct EndpointInfo {
  int tree_id = 0;
  Voxel endpoint;
  std::vector<Voxel> chain;    // endpoint first
  std::vector<Vec3> chain_mm;  // same points in mm
  double radius_mm = 0.0;      // distance-transform value at the endpoint
  bool degenerate = false;     // fewer than two chain voxels
};

inline constexpr int kDefaultEndpointWindow = 7;

/// Follows the branch leaving `endpoint` for up to `window` voxels, stopping
/// at (and including) the next graph node. Throws InvalidArgument if the
/// voxel is not an endpoint of the tree.
EndpointInfo endpoint_curve(const VesselTree& tree, const Voxel& endpoint, int window = kDefaultEndpointWindow);

nlohmann::json to_json(const SkeletonGraph& graph);

}  // namespace ogmc
