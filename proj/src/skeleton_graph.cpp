#include "ogmc/skeleton_graph.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <queue>
#include <set>
#include <tuple>

namespace ogmc {
namespace {

const char* kind_name(NodeKind k) {
  switch (k) {
    case NodeKind::endpoint:
      return "endpoint";
    case NodeKind::regular:
      return "regular";
    case NodeKind::bifurcation:
      return "bifurcation";
  }
  return "?";
}

double chain_length(const std::vector<Voxel>& chain, const Spacing& s) {
  double len = 0.0;
  for (std::size_t i = 1; i < chain.size(); ++i) {
    const Voxel d{chain[i].x - chain[i - 1].x, chain[i].y - chain[i - 1].y, chain[i].z - chain[i - 1].z};
    len += step_length(d, s);
  }
  return len;
}

// Arc length after a symmetric moving average of half-width 2; windows
// shrink near the ends so the terminal voxels stay fixed.
double smoothed_length(const std::vector<Voxel>& chain, const Spacing& s) {
  const int n = static_cast<int>(chain.size());
  std::vector<Vec3> pts(n);
  for (int i = 0; i < n; ++i) {
    const int w = std::min({2, i, n - 1 - i});
    Vec3 acc{};
    for (int k = i - w; k <= i + w; ++k) acc += Vec3{chain[k].x * s.x, chain[k].y * s.y, chain[k].z * s.z};
    pts[i] = acc / (2 * w + 1);
  }
  double len = 0.0;
  for (int i = 1; i < n; ++i) len += distance(pts[i], pts[i - 1]);
  return len;
}

// Builds one component from its voxel indices (raster order).
SkeletonComponent trace_component(const Mask& skel, const ScalarVolume& dist, const std::vector<std::size_t>& members,
                                  GraphDiagnostics& diag) {
  std::map<std::size_t, int> local;
  for (std::size_t i = 0; i < members.size(); ++i) local[members[i]] = static_cast<int>(i);
  const int n = static_cast<int>(members.size());

  std::vector<std::vector<int>> adj(n);
  for (int i = 0; i < n; ++i) {
    const Voxel v = skel.voxel(members[i]);
    for (const auto& d : neighbors26()) {
      const Voxel w = v + d;
      if (!skel.contains(w) || !skel(w)) continue;
      adj[i].push_back(local.at(skel.index(w)));
    }
    std::sort(adj[i].begin(), adj[i].end());
  }

  SkeletonComponent comp;
  comp.voxels.resize(n);
  std::vector<char> junction(n, 0);
  for (int i = 0; i < n; ++i) {
    const auto deg = adj[i].size();
    NodeKind kind = deg <= 1 ? NodeKind::endpoint : (deg == 2 ? NodeKind::regular : NodeKind::bifurcation);
    comp.voxels[i] = {skel.voxel(members[i]), kind, static_cast<double>(dist(skel.voxel(members[i])))};
    junction[i] = kind == NodeKind::bifurcation;
  }

  // A regular voxel whose two neighbors are both junction voxels sits inside
  // a thick junction spot; fold it into the cluster.
  for (bool grew = true; grew;) {
    grew = false;
    for (int i = 0; i < n; ++i) {
      if (junction[i] || adj[i].size() != 2) continue;
      if (junction[adj[i][0]] && junction[adj[i][1]]) {
        junction[i] = 1;
        grew = true;
        ++diag.absorbed_voxels;
      }
    }
  }

  // Graph nodes: junction clusters and endpoints.
  std::vector<int> node_of(n, -1);
  for (int i = 0; i < n; ++i) {
    if (node_of[i] >= 0) continue;
    if (junction[i]) {
      GraphNode gn{{}, NodeKind::bifurcation};
      const int id = static_cast<int>(comp.nodes.size());
      std::vector<int> stack{i};
      node_of[i] = id;
      while (!stack.empty()) {
        const int c = stack.back();
        stack.pop_back();
        gn.voxels.push_back(comp.voxels[c].voxel);
        for (int nb : adj[c])
          if (junction[nb] && node_of[nb] < 0) {
            node_of[nb] = id;
            stack.push_back(nb);
          }
      }
      std::sort(gn.voxels.begin(), gn.voxels.end());
      if (gn.voxels.size() > 1) ++diag.multi_voxel_junctions;
      comp.nodes.push_back(std::move(gn));
    } else if (adj[i].size() <= 1) {
      node_of[i] = static_cast<int>(comp.nodes.size());
      comp.nodes.push_back({{comp.voxels[i].voxel}, NodeKind::endpoint});
    }
  }

  // A closed loop without any node: promote its first voxel.
  if (comp.nodes.empty() && n > 0) {
    node_of[0] = 0;
    comp.nodes.push_back({{comp.voxels[0].voxel}, NodeKind::regular});
  }

  const Spacing& sp = skel.spacing();
  std::vector<char> visited(n, 0);
  std::set<std::pair<int, int>> direct;
  for (int s = 0; s < n; ++s) {
    if (node_of[s] < 0) continue;
    for (int first : adj[s]) {
      if (node_of[first] >= 0) {
        if (node_of[first] == node_of[s]) continue;
        const auto key = std::minmax(s, first);
        if (!direct.insert(key).second) continue;
        Branch b;
        b.voxels = {comp.voxels[s].voxel, comp.voxels[first].voxel};
        b.from = node_of[s];
        b.to = node_of[first];
        b.length_mm = smoothed_length(b.voxels, sp);
        b.step_length_mm = chain_length(b.voxels, sp);
        comp.branches.push_back(std::move(b));
        continue;
      }
      if (visited[first]) continue;
      Branch b;
      b.voxels = {comp.voxels[s].voxel};
      int prev = s, cur = first;
      while (true) {
        b.voxels.push_back(comp.voxels[cur].voxel);
        if (node_of[cur] >= 0) break;
        visited[cur] = 1;
        int next = -1;
        for (int nb : adj[cur])
          if (nb != prev) {
            next = nb;
            break;
          }
        if (next < 0 || (node_of[next] < 0 && visited[next])) break;
        prev = cur;
        cur = next;
      }
      b.from = node_of[s];
      b.to = node_of[cur] >= 0 ? node_of[cur] : node_of[s];
      b.length_mm = smoothed_length(b.voxels, sp);
      b.step_length_mm = chain_length(b.voxels, sp);
      comp.branches.push_back(std::move(b));
    }
  }

  comp.length_mm = 0.0;
  for (const auto& b : comp.branches) comp.length_mm += b.length_mm;
  comp.cycle_count = static_cast<int>(comp.branches.size()) - static_cast<int>(comp.nodes.size()) + 1;
  if (comp.nodes.size() == 1 && comp.branches.empty()) comp.cycle_count = 0;
  diag.cycles += comp.cycle_count;
  return comp;
}

std::vector<Voxel> endpoints_of(const std::vector<SkeletonNode>& voxels) {
  std::vector<Voxel> out;
  for (const auto& v : voxels)
    if (v.kind == NodeKind::endpoint) out.push_back(v.voxel);
  return out;
}

VesselTree to_tree(const SkeletonComponent& c, int id, const Spacing& spacing) {
  VesselTree t;
  t.id = id;
  t.spacing = spacing;
  t.nodes = c.voxels;
  t.graph_nodes = c.nodes;
  t.branches = c.branches;
  t.total_length_mm = c.length_mm;
  t.cycle_count = c.cycle_count;
  return t;
}

// Orients branches away from the root graph node along a BFS spanning tree.
void orient(VesselTree& t) {
  if (!t.root) return;
  int root_node = -1;
  for (std::size_t i = 0; i < t.graph_nodes.size(); ++i) {
    const auto& vs = t.graph_nodes[i].voxels;
    if (std::find(vs.begin(), vs.end(), *t.root) != vs.end()) root_node = static_cast<int>(i);
  }
  if (root_node < 0) return;
  std::vector<int> depth(t.graph_nodes.size(), -1);
  depth[root_node] = 0;
  std::queue<int> q;
  q.push(root_node);
  std::vector<char> done(t.branches.size(), 0);
  while (!q.empty()) {
    const int u = q.front();
    q.pop();
    for (std::size_t bi = 0; bi < t.branches.size(); ++bi) {
      auto& b = t.branches[bi];
      if (done[bi] || (b.from != u && b.to != u)) continue;
      if (b.to == u && b.from != u) {
        std::swap(b.from, b.to);
        std::reverse(b.voxels.begin(), b.voxels.end());
      }
      done[bi] = 1;
      if (depth[b.to] < 0) {
        depth[b.to] = depth[u] + 1;
        q.push(b.to);
      }
    }
  }
}

}  // namespace

std::vector<Voxel> SkeletonComponent::endpoints() const { return endpoints_of(voxels); }
std::vector<Voxel> VesselTree::endpoints() const { return endpoints_of(nodes); }

const SkeletonNode* VesselTree::find(const Voxel& v) const {
  auto it = std::lower_bound(nodes.begin(), nodes.end(), v, [](const SkeletonNode& n, const Voxel& x) {
    return std::tie(n.voxel.z, n.voxel.y, n.voxel.x) < std::tie(x.z, x.y, x.x);
  });
  return (it != nodes.end() && it->voxel == v) ? &*it : nullptr;
}

double SkeletonGraph::total_length_mm() const {
  double len = 0.0;
  for (const auto& c : components) len += c.length_mm;
  return len;
}

std::size_t SkeletonGraph::branch_count() const {
  std::size_t n = 0;
  for (const auto& c : components) n += c.branches.size();
  return n;
}

SkeletonGraph build_graph(const Mask& skeleton, const ScalarVolume& distance) {
  require_same_geometry(skeleton, distance, "build_graph");
  SkeletonGraph g;
  g.extent = skeleton.extent();
  g.spacing = skeleton.spacing();
  const Labeling lab = label_components(skeleton, 26);
  std::vector<std::vector<std::size_t>> members(lab.count);
  for (std::size_t i = 0; i < lab.labels.size(); ++i)
    if (lab.labels[i] > 0) members[lab.labels[i] - 1].push_back(i);
  g.components.reserve(members.size());
  for (const auto& m : members) g.components.push_back(trace_component(skeleton, distance, m, g.diagnostics));
  return g;
}

TreeSet build_trees(const SkeletonGraph& graph) {
  if (graph.components.empty()) throw InvalidArgument("build_trees: empty skeleton");
  std::vector<int> order(graph.components.size());
  std::iota(order.begin(), order.end(), 0);
  // Components are in raster order already, so a stable sort breaks ties deterministically.
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return graph.components[a].length_mm > graph.components[b].length_mm;
  });

  TreeSet out;
  out.main = to_tree(graph.components[order[0]], 0, graph.spacing);
  out.main.directed = true;
  const SkeletonNode* best = nullptr;
  for (const auto& n : out.main.nodes) {
    if (n.kind != NodeKind::endpoint) continue;
    if (!best || n.radius_mm > best->radius_mm || (n.radius_mm == best->radius_mm && n.voxel < best->voxel)) {
      best = &n;
    }
  }
  if (!best) {
    best = &*std::min_element(out.main.nodes.begin(), out.main.nodes.end(),
                              [](const auto& a, const auto& b) { return a.voxel < b.voxel; });
  }
  out.main.root = best->voxel;
  orient(out.main);

  for (std::size_t i = 1; i < order.size(); ++i) {
    out.subtrees.push_back(to_tree(graph.components[order[i]], static_cast<int>(i), graph.spacing));
  }
  return out;
}

EndpointInfo endpoint_curve(const VesselTree& tree, const Voxel& endpoint, int window) {
  const Spacing& spacing = tree.spacing;
  const SkeletonNode* node = tree.find(endpoint);
  if (!node || node->kind != NodeKind::endpoint) throw InvalidArgument("endpoint_curve: voxel is not a tree endpoint");
  if (window < 1) throw InvalidArgument("endpoint_curve: window must be positive");
  EndpointInfo info;
  info.tree_id = tree.id;
  info.endpoint = endpoint;
  info.radius_mm = node->radius_mm;

  const Branch* branch = nullptr;
  bool reversed = false;
  for (const auto& b : tree.branches) {
    if (b.voxels.front() == endpoint) {
      branch = &b;
      break;
    }
    if (b.voxels.back() == endpoint) {
      branch = &b;
      reversed = true;
      break;
    }
  }
  if (branch) {
    const int len = static_cast<int>(branch->voxels.size());
    for (int i = 0; i < std::min(window, len); ++i) {
      info.chain.push_back(branch->voxels[reversed ? len - 1 - i : i]);
    }
  } else {
    info.chain = {endpoint};
  }
  for (const auto& v : info.chain) info.chain_mm.push_back({v.x * spacing.x, v.y * spacing.y, v.z * spacing.z});
  info.degenerate = info.chain.size() < 2;
  return info;
}

nlohmann::json to_json(const SkeletonGraph& graph) {
  using nlohmann::json;
  auto vox = [](const Voxel& v) { return json::array({v.x, v.y, v.z}); };
  json comps = json::array();
  for (const auto& c : graph.components) {
    json nodes = json::array();
    for (const auto& n : c.voxels) {
      if (n.kind == NodeKind::regular) continue;
      nodes.push_back({{"voxel", vox(n.voxel)}, {"kind", kind_name(n.kind)}, {"radius_mm", n.radius_mm}});
    }
    json branches = json::array();
    for (const auto& b : c.branches) {
      json poly = json::array();
      for (const auto& v : b.voxels) poly.push_back(vox(v));
      branches.push_back({{"from", b.from}, {"to", b.to}, {"length_mm", b.length_mm}, {"step_length_mm", b.step_length_mm}, {"voxels", poly}});
    }
    comps.push_back({{"voxel_count", c.voxels.size()},
                     {"length_mm", c.length_mm},
                     {"cycles", c.cycle_count},
                     {"nodes", nodes},
                     {"branches", branches}});
  }
  return {{"extent", {graph.extent.nx, graph.extent.ny, graph.extent.nz}},
          {"spacing", {graph.spacing.x, graph.spacing.y, graph.spacing.z}},
          {"total_length_mm", graph.total_length_mm()},
          {"branch_count", graph.branch_count()},
          {"diagnostics",
           {{"multi_voxel_junctions", graph.diagnostics.multi_voxel_junctions},
            {"absorbed_voxels", graph.diagnostics.absorbed_voxels},
            {"cycles", graph.diagnostics.cycles}}},
          {"components", comps}};
}

}  // namespace ogmc
