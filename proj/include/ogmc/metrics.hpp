#pragma once

#include <array>
#include <optional>

#include "json.hpp"
#include "ogmc/volume.hpp"

namespace ogmc {

/// (b0, b1, b2) of the union of closed unit cubes over the foreground.
struct Betti {
  int b0 = 0;
  int b1 = 0;
  int b2 = 0;
  long long euler = 0;

  bool operator==(const Betti& o) const { return b0 == o.b0 && b1 == o.b1 && b2 == o.b2; }
};

/// b0 counts 26-connected foreground components, b2 counts 6-connected
/// background components that do not reach a one-voxel zero pad, and
/// b1 = b0 + b2 - chi with chi = V - E + F - C of the cubical complex.
Betti betti_numbers(const Mask& vol);

/// Euler characteristic of the cubical complex alone.
long long euler_characteristic(const Mask& vol);

/// 2|A and B| / (|A| + |B|); 1 when both are empty.
double dice(const Mask& a, const Mask& b);

/// |A xor B| / |A or B|; 0 when both are empty.
double sym_diff_ratio(const Mask& a, const Mask& b);

/// Normalized surface distance. Boundaries are the edge map restricted to
/// the foreground; the score is the fraction of boundary voxels of either
/// mask within tol_mm of the other boundary. 1 when both are empty.
double nsd(const Mask& a, const Mask& b, double tol_mm);

struct TreeStats {
  double length_mm = 0.0;
  std::size_t branch_count = 0;
};

/// Skeleton length and branch count of the thinned mask.
TreeStats tree_stats(const Mask& vol);

struct TopologyReport {
  Betti betti_pred;
  Betti betti_gt;
  int betti_error = 0;  // |db0| + |db1|
  double length_pred = 0.0;
  double length_gt = 0.0;
  double lr_error = 0.0;
  std::size_t branches_pred = 0;
  std::size_t branches_gt = 0;
  double br_error = 0.0;
  bool rates_absolute = false;  // gt had no length/branches; lr/br are raw differences
  double dsc = 0.0;
  double nsd = 0.0;
  double sym_diff = 0.0;
  double nsd_tolerance_mm = 0.0;
};

/// All metrics of pred against gt. `tol_mm` defaults to the smallest spacing.
TopologyReport topology_report(const Mask& pred, const Mask& gt, std::optional<double> tol_mm = std::nullopt);

nlohmann::json to_json(const Betti& b);
nlohmann::json to_json(const TopologyReport& r);

}  // namespace ogmc
