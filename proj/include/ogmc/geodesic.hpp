#pragma once

#include <limits>
#include <optional>
#include <vector>

#include "ogmc/errors.hpp"
#include "ogmc/volume.hpp"

namespace ogmc {

/// Isotropic speed F(x) in [delta, 1]; the Riemannian metric is F^-2 * Id.
struct SpeedField {
  ScalarVolume speed;
  double delta = 0.05;
};

/// F = delta + (1 - delta) * gaussian_smooth(seg, sigma), clamped to
/// [delta, 1]. Throws InvalidArgument unless 0 < delta < 1.
SpeedField build_speed_field(const Mask& seg, double sigma_mm, double delta);

/// Inclusive voxel box.
struct Box {
  Voxel lo;
  Voxel hi;

  bool contains(const Voxel& v) const {
    return v.x >= lo.x && v.y >= lo.y && v.z >= lo.z && v.x <= hi.x && v.y <= hi.y && v.z <= hi.z;
  }
};

/// Box around two voxels grown by `margin_factor` times their voxel distance
/// (at least one voxel), clipped to the grid.
Box pair_box(const Voxel& a, const Voxel& b, double margin_factor, const Extent& extent);

/// Arrival time assigned to voxels the front never reached.
inline constexpr float kUnreached = std::numeric_limits<float>::max();

struct FastMarchOptions {
  std::optional<Box> box;       // march only inside this box
  std::optional<Voxel> target;  // stop shortly after this voxel is frozen
};

/// First-order upwind (Godunov) fast marching for |grad u| F = 1 on the
/// 6-neighbor grid with anisotropic spacing; u(source) = 0. Voxels outside
/// the box or beyond the stopping front hold kUnreached.
ScalarVolume fast_march(const SpeedField& speed, const Voxel& source, const FastMarchOptions& options = {});

struct GeodesicPath {
  std::vector<Vec3> points_mm;  // start first, source last
  double radius_mm = 0.0;

  double length_mm() const;
};

class GeodesicStagnation : public Error {
 public:
  GeodesicStagnation(const std::string& what, GeodesicPath partial) : Error(what), partial_(std::move(partial)) {}
  const GeodesicPath& partial() const { return partial_; }

 private:
  GeodesicPath partial_;
};

struct BacktrackOptions {
  double step = 0.5;  // in units of the smallest voxel spacing
  int max_steps = 100000;
};

/// Descends -grad u from `start` using trilinearly interpolated central
/// differences and midpoint steps; when the continuous step fails to lower
/// u it takes the steepest discrete step to a 26-neighbor instead. Ends
/// once within one voxel of `source`, whose center is appended. Throws
/// GeodesicStagnation (carrying the partial path) if no descent is possible.
GeodesicPath backtrack_geodesic(const ScalarVolume& times, const Voxel& start, const Voxel& source,
                                const BacktrackOptions& options = {});

/// seg plus every voxel whose center lies within radius_mm of the polyline,
/// plus every voxel containing a path point.
Mask fill_tube(const Mask& seg, const GeodesicPath& path, double radius_mm);

}  // namespace ogmc
