#include "ogmc/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <set>

#include "ogmc/morphology.hpp"

namespace ogmc {
namespace {

constexpr double kAreaTie = 1e-9;

Vec3 voxel_mm(const Voxel& v, const Spacing& s) { return {v.x * s.x, v.y * s.y, v.z * s.z}; }

TfdOptions tfd_options(const RepairParams& p, const Spacing& s) {
  TfdOptions o;
  o.resample_step_mm = p.resample_step(s);
  o.frame.kappa_min = p.kappa_min;
  o.frame.window = p.window;
  o.x_min_fraction = p.x_min_fraction;
  o.transport = p.transport;
  return o;
}

// Skeleton, trees and endpoint chains of one mask.
struct Forest {
  TreeSet trees;
  std::map<Voxel, EndpointInfo> ends;
  std::map<int, std::vector<Voxel>> tree_ends;  // subtree id -> endpoints
  std::map<int, Voxel> anchor;                  // subtree id -> one skeleton voxel
};

Forest build_forest(const Mask& mask, int window) {
  const ScalarVolume dt = distance_transform(mask);
  const SkeletonGraph graph = build_graph(skeletonize(mask), dt);
  Forest f{build_trees(graph), {}, {}, {}};
  for (const auto& e : f.trees.main.endpoints()) f.ends.emplace(e, endpoint_curve(f.trees.main, e, window));
  for (const auto& t : f.trees.subtrees) {
    auto& list = f.tree_ends[t.id];
    for (const auto& e : t.endpoints()) {
      f.ends.emplace(e, endpoint_curve(t, e, window));
      list.push_back(e);
    }
    f.anchor[t.id] = t.nodes.front().voxel;
  }
  return f;
}

TreeSummary summarize(const VesselTree& t) { return {t.id, t.total_length_mm, t.endpoints().size()}; }

}  // namespace

void validate(const RepairParams& p) {
  if (!(p.epsilon >= 0.0)) throw InvalidArgument("epsilon must be non-negative");
  if (!(p.d_max_vox > 0.0)) throw InvalidArgument("d_max must be positive");
  if (p.window < 2) throw InvalidArgument("endpoint window must be at least 2");
  if (!(p.kappa_min > 0.0)) throw InvalidArgument("kappa_min must be positive");
  if (p.resample_step_mm && !(*p.resample_step_mm > 0.0)) throw InvalidArgument("resample step must be positive");
  if (p.sigma_mm && !(*p.sigma_mm >= 0.0)) throw InvalidArgument("sigma must be non-negative");
  if (!(p.delta > 0.0 && p.delta < 1.0)) throw InvalidArgument("delta must lie in (0, 1)");
  if (!(p.box_margin > 0.0)) throw InvalidArgument("box margin must be positive");
  if (!(p.geodesic_step > 0.0 && p.geodesic_step <= 1.0)) throw InvalidArgument("geodesic step must lie in (0, 1]");
  if (!(p.radius_floor_vox > 0.0)) throw InvalidArgument("radius floor must be positive");
  if (p.surface.samples < 3) throw InvalidArgument("surface samples must be at least 3");
  if (p.surface.max_iter < 0) throw InvalidArgument("surface max_iter must be non-negative");
  if (!(p.surface.tol >= 0.0)) throw InvalidArgument("surface tol must be non-negative");
}

const char* to_string(PairStatus s) {
  switch (s) {
    case PairStatus::accepted:
      return "accepted";
    case PairStatus::rejected_tfd:
      return "rejected-tfd";
    case PairStatus::rejected_geometry:
      return "rejected-geometry";
    case PairStatus::rejected_distance:
      return "rejected-distance";
    case PairStatus::connected:
      return "connected";
    case PairStatus::failed:
      return "failed";
  }
  return "?";
}

CandidatePair score_pair(const EndpointInfo& main_end, const EndpointInfo& sub_end, const RepairParams& params,
                         const Spacing& spacing) {
  if (main_end.tree_id == sub_end.tree_id) throw InvalidArgument("score_pair: endpoints belong to the same tree");
  CandidatePair c;
  c.p0 = main_end.endpoint;
  c.q0 = sub_end.endpoint;
  c.tree = sub_end.tree_id;
  c.distance_mm = distance(voxel_mm(c.p0, spacing), voxel_mm(c.q0, spacing));
  if (c.distance_mm > params.d_max_vox * spacing.min()) {
    c.status = PairStatus::rejected_distance;
    return c;
  }
  const TfdResult t = tfd(main_end, sub_end, tfd_options(params, spacing));
  c.tfd = t.value;
  c.tfd_status = t.status;
  if (!t.finite()) {
    c.status = PairStatus::rejected_geometry;
    c.reason = to_string(t.status);
    return c;
  }
  if (!(t.value < params.epsilon)) {
    c.status = PairStatus::rejected_tfd;
    return c;
  }
  const int n = params.surface.samples;
  std::vector<Vec3> c1 = t.connector_p->sample(2 * n);
  std::vector<Vec3> c2 = t.connector_q->sample(2 * n);
  std::reverse(c2.begin(), c2.end());
  // Both connectors interpolate p0 and q0; pin the shared ends bit-exactly.
  c2.front() = c1.front();
  c2.back() = c1.back();
  const SurfaceResult surf = min_surface_area(c1, c2, params.surface);
  c.area_mm2 = surf.area;
  c.msmo = msmo(surf.area);
  c.surface_iterations = surf.iterations;
  if (surf.degenerate_warning) c.reason = "surface mostly degenerate";
  c.status = PairStatus::accepted;
  return c;
}

bool better_pair(const CandidatePair& a, const CandidatePair& b) {
  const double aa = a.area_mm2.value_or(std::numeric_limits<double>::infinity());
  const double ab = b.area_mm2.value_or(std::numeric_limits<double>::infinity());
  if (std::abs(aa - ab) > kAreaTie) return aa < ab;
  const double ta = a.tfd.value_or(std::numeric_limits<double>::infinity());
  const double tb = b.tfd.value_or(std::numeric_limits<double>::infinity());
  if (ta != tb) return ta < tb;
  if (a.p0 != b.p0) return a.p0 < b.p0;
  return a.q0 < b.q0;
}

RepairResult repair(const Mask& seg, const RepairParams& params) {
  validate(params);
  const auto t0 = std::chrono::steady_clock::now();
  RepairResult out{seg, {}};
  RepairReport& report = out.report;
  report.params = params;
  const Spacing& sp = seg.spacing();
  report.components_before = label_components(seg, 26).count;
  if (report.components_before == 0) {
    report.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
  }

  Mask& work = out.mask;
  Forest forest = build_forest(work, params.window);
  report.main_tree = summarize(forest.trees.main);
  for (const auto& t : forest.trees.subtrees) report.subtrees.push_back(summarize(t));

  auto main_ends = [&] {
    const std::vector<Voxel> e = forest.trees.main.endpoints();
    return std::set<Voxel>(e.begin(), e.end());
  };
  std::set<Voxel> p_main = main_ends();
  std::set<int> remaining;
  for (const auto& t : forest.trees.subtrees) remaining.insert(t.id);
  std::map<std::pair<Voxel, Voxel>, CandidatePair> cache;

  std::optional<SpeedField> speed;
  const int max_iterations = static_cast<int>(forest.trees.subtrees.size());
  for (int iter = 1; iter <= max_iterations && !remaining.empty(); ++iter) {
    IterationRecord rec;
    rec.iteration = iter;
    std::vector<CandidatePair> j;
    for (const int tree : remaining) {
      for (const Voxel& q : forest.tree_ends.at(tree)) {
        for (const Voxel& p : p_main) {
          ++rec.pairs_considered;
          auto it = cache.find({p, q});
          if (it == cache.end()) {
            it = cache.emplace(std::pair{p, q}, score_pair(forest.ends.at(p), forest.ends.at(q), params, sp)).first;
            ++rec.pairs_scored;
          }
          if (it->second.status == PairStatus::accepted) j.push_back(it->second);
        }
      }
    }
    rec.j_size = j.size();
    if (j.empty()) {
      report.iterations.push_back(std::move(rec));
      break;
    }
    std::sort(j.begin(), j.end(), better_pair);

    bool connected = false;
    for (CandidatePair cand : j) {
      if (!speed) speed = build_speed_field(work, params.sigma(sp), params.delta);
      GeodesicPath path;
      try {
        FastMarchOptions fm;
        fm.box = pair_box(cand.p0, cand.q0, params.box_margin, work.extent());
        fm.target = cand.p0;
        const ScalarVolume times = fast_march(*speed, cand.q0, fm);
        path = backtrack_geodesic(times, cand.p0, cand.q0, {params.geodesic_step});
      } catch (const Error& e) {
        cand.status = PairStatus::failed;
        cand.reason = e.what();
        cache.at({cand.p0, cand.q0}) = cand;
        rec.failed.push_back(cand);
        continue;
      }
      const double radius = std::max(0.5 * (forest.ends.at(cand.p0).radius_mm + forest.ends.at(cand.q0).radius_mm),
                                     params.radius_floor_vox * sp.min());
      work = fill_tube(work, path, radius);
      speed.reset();
      cand.status = PairStatus::connected;
      cand.iteration = iter;
      cand.tube_radius_mm = radius;
      cand.path_length_mm = path.length_mm();
      cand.path_points = path.points_mm.size();
      cache.at({cand.p0, cand.q0}) = cand;
      report.connections.push_back(cand);
      report.absorbed_trees.push_back(cand.tree);
      rec.connected_tree = cand.tree;
      connected = true;

      if (params.rethin) break;
      // Graft: P_main = (P_main + P*) - {p*, q*}.
      remaining.erase(cand.tree);
      for (const Voxel& e : forest.tree_ends.at(cand.tree)) p_main.insert(e);
      p_main.erase(cand.p0);
      p_main.erase(cand.q0);
      // Trees the tube happened to touch are now part of the main component too.
      const Labeling labels = label_components(work, 26);
      const std::int32_t main_label = labels.labels[work.index(cand.p0)];
      for (auto it = remaining.begin(); it != remaining.end();) {
        if (labels.labels[work.index(forest.anchor.at(*it))] == main_label) {
          report.incidentally_absorbed.push_back(*it);
          for (const Voxel& e : forest.tree_ends.at(*it)) p_main.insert(e);
          it = remaining.erase(it);
        } else {
          ++it;
        }
      }
      break;
    }
    report.iterations.push_back(std::move(rec));
    if (!connected) break;

    if (params.rethin) {
      forest = build_forest(work, params.window);
      p_main = main_ends();
      remaining.clear();
      for (const auto& t : forest.trees.subtrees) remaining.insert(t.id);
      cache.clear();
    }
  }

  report.unconnected_trees.assign(remaining.begin(), remaining.end());
  if (params.rethin && !remaining.empty()) {
    report.warnings.push_back("re-thinned mode: unconnected tree ids refer to the last rebuilt forest");
  }
  report.components_after = label_components(work, 26).count;
  report.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

namespace {

nlohmann::json voxel_json(const Voxel& v) { return {v.x, v.y, v.z}; }

nlohmann::json optional_json(const std::optional<double>& v) {
  if (!v || !std::isfinite(*v)) return nullptr;
  return *v;
}

nlohmann::json summary_json(const TreeSummary& t) {
  return {{"id", t.id}, {"length_mm", t.length_mm}, {"endpoints", t.endpoints}};
}

}  // namespace

nlohmann::json to_json(const RepairParams& p) {
  return {{"epsilon", p.epsilon},
          {"d_max_vox", p.d_max_vox},
          {"window", p.window},
          {"kappa_min", p.kappa_min},
          {"resample_step_mm", optional_json(p.resample_step_mm)},
          {"x_min_fraction", p.x_min_fraction},
          {"transport", p.transport == FrameTransport::frenet_field ? "frenet" : "parallel"},
          {"sigma_mm", optional_json(p.sigma_mm)},
          {"delta", p.delta},
          {"box_margin", p.box_margin},
          {"geodesic_step", p.geodesic_step},
          {"radius_floor_vox", p.radius_floor_vox},
          {"surface_samples", p.surface.samples},
          {"surface_rows", p.surface.rows},
          {"surface_tol", p.surface.tol},
          {"surface_max_iter", p.surface.max_iter},
          {"rethin", p.rethin}};
}

nlohmann::json to_json(const CandidatePair& c) {
  nlohmann::json j = {{"p0", voxel_json(c.p0)},
                      {"q0", voxel_json(c.q0)},
                      {"tree", c.tree},
                      {"distance_mm", c.distance_mm},
                      {"tfd", optional_json(c.tfd)},
                      {"tfd_status", to_string(c.tfd_status)},
                      {"area_mm2", optional_json(c.area_mm2)},
                      {"msmo", optional_json(c.area_mm2 ? std::optional<double>(c.msmo) : std::nullopt)},
                      {"surface_iterations", c.surface_iterations},
                      {"status", to_string(c.status)}};
  if (!c.reason.empty()) j["reason"] = c.reason;
  if (c.status == PairStatus::connected) {
    j["iteration"] = c.iteration;
    j["tube_radius_mm"] = c.tube_radius_mm;
    j["path_length_mm"] = c.path_length_mm;
    j["path_points"] = c.path_points;
  }
  return j;
}

nlohmann::json to_json(const RepairReport& r, bool timings) {
  nlohmann::json connections = nlohmann::json::array();
  for (const auto& c : r.connections) connections.push_back(to_json(c));
  nlohmann::json iterations = nlohmann::json::array();
  for (const auto& it : r.iterations) {
    nlohmann::json failed = nlohmann::json::array();
    for (const auto& f : it.failed) failed.push_back(to_json(f));
    iterations.push_back({{"iteration", it.iteration},
                          {"pairs_considered", it.pairs_considered},
                          {"pairs_scored", it.pairs_scored},
                          {"j_size", it.j_size},
                          {"failed", std::move(failed)},
                          {"connected_tree", it.connected_tree ? nlohmann::json(*it.connected_tree) : nullptr}});
  }
  nlohmann::json subtrees = nlohmann::json::array();
  for (const auto& t : r.subtrees) subtrees.push_back(summary_json(t));
  return {{"parameters", to_json(r.params)},
          {"components_before", r.components_before},
          {"components_after", r.components_after},
          {"main_tree", r.main_tree ? summary_json(*r.main_tree) : nlohmann::json(nullptr)},
          {"subtrees", std::move(subtrees)},
          {"iterations", std::move(iterations)},
          {"connections", std::move(connections)},
          {"absorbed_trees", r.absorbed_trees},
          {"incidentally_absorbed_trees", r.incidentally_absorbed},
          {"unconnected_trees", r.unconnected_trees},
          {"warnings", r.warnings},
          {"runtime_s", timings ? r.runtime_s : 0.0}};
}

}  // namespace ogmc
