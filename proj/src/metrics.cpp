#include "ogmc/metrics.hpp"

#include <cmath>
#include <cstdlib>

#include "ogmc/morphology.hpp"
#include "ogmc/skeleton_graph.hpp"

namespace ogmc {
namespace {

// Padded copy with a one-voxel zero border.
Mask pad1(const Mask& vol) {
  const auto& e = vol.extent();
  Mask out({e.nx + 2, e.ny + 2, e.nz + 2}, vol.spacing());
  for (int z = 0; z < e.nz; ++z)
    for (int y = 0; y < e.ny; ++y)
      for (int x = 0; x < e.nx; ++x) out(x + 1, y + 1, z + 1) = vol(x, y, z);
  return out;
}

}  // namespace

long long euler_characteristic(const Mask& vol) {
  const auto& e = vol.extent();
  auto fg = [&](int x, int y, int z) { return vol.value_or(x, y, z, 0) != 0; };
  long long v = 0, ed = 0, f = 0, c = 0;
  // Lattice point (i, j, k) is the low corner of voxel (i, j, k).
  for (int k = 0; k <= e.nz; ++k)
    for (int j = 0; j <= e.ny; ++j)
      for (int i = 0; i <= e.nx; ++i) {
        bool any = false;
        for (int dz = -1; dz <= 0 && !any; ++dz)
          for (int dy = -1; dy <= 0 && !any; ++dy)
            for (int dx = -1; dx <= 0 && !any; ++dx) any = fg(i + dx, j + dy, k + dz);
        v += any;
        // Edges from (i,j,k) along +x, +y, +z.
        ed += fg(i, j - 1, k - 1) || fg(i, j, k - 1) || fg(i, j - 1, k) || fg(i, j, k);
        ed += fg(i - 1, j, k - 1) || fg(i, j, k - 1) || fg(i - 1, j, k) || fg(i, j, k);
        ed += fg(i - 1, j - 1, k) || fg(i, j - 1, k) || fg(i - 1, j, k) || fg(i, j, k);
        // Faces with low corner (i,j,k) normal to x, y, z.
        f += fg(i - 1, j, k) || fg(i, j, k);
        f += fg(i, j - 1, k) || fg(i, j, k);
        f += fg(i, j, k - 1) || fg(i, j, k);
        c += fg(i, j, k);
      }
  return v - ed + f - c;
}

Betti betti_numbers(const Mask& vol) {
  Betti b;
  b.b0 = label_components(vol, 26).count;
  const Mask padded = pad1(vol);
  Mask background(padded.extent(), padded.spacing());
  for (std::size_t i = 0; i < padded.size(); ++i) background[i] = padded[i] ? 0 : 1;
  const Labeling bg = label_components(background, 6);
  // Only the pad's component touches the pad corner; every other one is a cavity.
  b.b2 = bg.count - 1;
  b.euler = euler_characteristic(vol);
  b.b1 = static_cast<int>(b.b0 + b.b2 - b.euler);
  return b;
}

double dice(const Mask& a, const Mask& b) {
  require_same_geometry(a, b, "dice");
  std::size_t inter = 0, sa = 0, sb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sa += a[i] != 0;
    sb += b[i] != 0;
    inter += a[i] && b[i];
  }
  if (sa + sb == 0) return 1.0;
  return 2.0 * static_cast<double>(inter) / static_cast<double>(sa + sb);
}

double sym_diff_ratio(const Mask& a, const Mask& b) {
  require_same_geometry(a, b, "sym_diff_ratio");
  std::size_t diff = 0, uni = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff += (a[i] != 0) != (b[i] != 0);
    uni += a[i] || b[i];
  }
  return uni == 0 ? 0.0 : static_cast<double>(diff) / static_cast<double>(uni);
}

double nsd(const Mask& a, const Mask& b, double tol_mm) {
  require_same_geometry(a, b, "nsd");
  if (!(tol_mm >= 0.0)) throw InvalidArgument("nsd tolerance must be non-negative");
  Mask ba = edge_map(a), bb = edge_map(b);
  for (std::size_t i = 0; i < a.size(); ++i) {
    ba[i] = ba[i] && a[i];
    bb[i] = bb[i] && b[i];
  }
  const std::size_t na = count_foreground(ba), nb = count_foreground(bb);
  if (na + nb == 0) return 1.0;
  const std::vector<double> da = distance_to_set(ba), db = distance_to_set(bb);
  std::size_t within = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (ba[i] && db[i] <= tol_mm) ++within;
    if (bb[i] && da[i] <= tol_mm) ++within;
  }
  return static_cast<double>(within) / static_cast<double>(na + nb);
}

TreeStats tree_stats(const Mask& vol) {
  if (count_foreground(vol) == 0) return {};
  const SkeletonGraph g = build_graph(skeletonize(vol), distance_transform(vol));
  return {g.total_length_mm(), g.branch_count()};
}

TopologyReport topology_report(const Mask& pred, const Mask& gt, std::optional<double> tol_mm) {
  require_same_geometry(pred, gt, "topology_report");
  TopologyReport r;
  r.nsd_tolerance_mm = tol_mm.value_or(gt.spacing().min());
  r.betti_pred = betti_numbers(pred);
  r.betti_gt = betti_numbers(gt);
  r.betti_error = std::abs(r.betti_pred.b0 - r.betti_gt.b0) + std::abs(r.betti_pred.b1 - r.betti_gt.b1);
  const TreeStats sp = tree_stats(pred), sg = tree_stats(gt);
  r.length_pred = sp.length_mm;
  r.length_gt = sg.length_mm;
  r.branches_pred = sp.branch_count;
  r.branches_gt = sg.branch_count;
  const double dl = std::abs(sp.length_mm - sg.length_mm);
  const double dbr = std::abs(static_cast<double>(sp.branch_count) - static_cast<double>(sg.branch_count));
  r.rates_absolute = sg.length_mm <= 0.0 || sg.branch_count == 0;
  r.lr_error = sg.length_mm > 0.0 ? dl / sg.length_mm : dl;
  r.br_error = sg.branch_count > 0 ? dbr / static_cast<double>(sg.branch_count) : dbr;
  r.dsc = dice(pred, gt);
  r.nsd = nsd(pred, gt, r.nsd_tolerance_mm);
  r.sym_diff = sym_diff_ratio(pred, gt);
  return r;
}

nlohmann::json to_json(const Betti& b) { return {b.b0, b.b1, b.b2}; }

nlohmann::json to_json(const TopologyReport& r) {
  return {
      {"betti_pred", to_json(r.betti_pred)},
      {"betti_gt", to_json(r.betti_gt)},
      {"betti_error", r.betti_error},
      {"length_pred_mm", r.length_pred},
      {"length_gt_mm", r.length_gt},
      {"lr_error", r.lr_error},
      {"branches_pred", r.branches_pred},
      {"branches_gt", r.branches_gt},
      {"br_error", r.br_error},
      {"rates_absolute", r.rates_absolute},
      {"dsc", r.dsc},
      {"nsd", r.nsd},
      {"sym_diff_ratio", r.sym_diff},
      {"parameters",
       {{"nsd_tolerance_mm", r.nsd_tolerance_mm},
        {"foreground_connectivity", 26},
        {"background_connectivity", 6},
        {"betti_error_dimensions", {0, 1}}}},
  };
}

}  // namespace ogmc
