#pragma once

#include <vector>

#include "ogmc/volume.hpp"

namespace ogmc {

/// Symmetric structuring element. `cross6` of radius r is the L1 ball
/// (|dx|+|dy|+|dz| <= r); `cube26` is the L-infinity ball.
struct StructuringElement {
  enum class Shape { cross6, cube26 };
  Shape shape = Shape::cross6;
  int radius = 1;
};

enum class MorphOp { erode, dilate };

/// Binary erosion (min over the element) or dilation (max). Voxels outside
/// the grid count as background for both, so foreground at the border erodes.
Mask morph(const Mask& vol, MorphOp op, const StructuringElement& se = {});
Mask erode(const Mask& vol, const StructuringElement& se = {});
Mask dilate(const Mask& vol, const StructuringElement& se = {});

/// Morphological edge map |dilate(X) - erode(X)|, i.e. the set D \ E.
Mask edge_map(const Mask& vol, const StructuringElement& se = {});

/// Separable Gaussian with standard deviation `sigma_mm` (converted per axis
/// by the spacing), truncated at 3 sigma and renormalized where the kernel
/// leaves the grid. sigma 0 is a plain cast.
ScalarVolume gaussian_smooth(const Mask& vol, double sigma_mm);
ScalarVolume gaussian_smooth(const ScalarVolume& vol, double sigma_mm);

/// Exact Euclidean distance (mm) from each foreground voxel center to the
/// nearest background voxel center; everything outside the grid is
/// background. Background voxels map to 0.
ScalarVolume distance_transform(const Mask& vol);

/// Exact Euclidean distance (mm) from every voxel center to the nearest
/// foreground voxel of `target`, in raster order. The grid border is not a
/// site; an empty target gives +inf everywhere.
std::vector<double> distance_to_set(const Mask& target);

/// Topology-preserving parallel thinning to a unit-width 26-connected
/// skeleton. Six directional sub-iterations (U, D, N, S, E, W) per pass;
/// a voxel is removed only if it is a border voxel for the current
/// direction, is not a line end, and is simple (removal preserves both
/// foreground 26-topology and background 6-topology). Candidates are
/// re-checked for simplicity sequentially in raster order, so the result is
/// deterministic.
Mask skeletonize(const Mask& vol);

/// True if removing the center of the 3x3x3 neighborhood does not change
/// topology. Bit i of `neighborhood` is voxel (i%3, (i/3)%3, i/9); bit 13 is
/// the center and is ignored.
bool is_simple_point(std::uint32_t neighborhood);

}  // namespace ogmc
