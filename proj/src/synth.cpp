#include "ogmc/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ogmc/random.hpp"

namespace ogmc {
namespace {

constexpr int kMaxBranchDraws = 200;

Vec3 any_perpendicular(const Vec3& v) {
  const Vec3 a = std::abs(v.x) < 0.9 ? Vec3{1, 0, 0} : Vec3{0, 1, 0};
  return normalized(cross(v, a));
}

// v tilted by `angle` towards azimuth `phi` around it.
Vec3 tilt(const Vec3& v, double angle, double phi) {
  const Vec3 e1 = any_perpendicular(v);
  const Vec3 e2 = cross(v, e1);
  return normalized(std::cos(angle) * v + std::sin(angle) * (std::cos(phi) * e1 + std::sin(phi) * e2));
}

double polyline_length(const std::vector<Vec3>& pts) {
  double len = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i) len += distance(pts[i], pts[i - 1]);
  return len;
}

std::vector<Vec3> bezier(const Vec3& p0, const Vec3& p1, const Vec3& p2, const Vec3& p3, int samples) {
  std::vector<Vec3> out;
  out.reserve(samples + 1);
  for (int i = 0; i <= samples; ++i) {
    const double t = static_cast<double>(i) / samples, u = 1.0 - t;
    out.push_back(u * u * u * p0 + 3 * u * u * t * p1 + 3 * u * t * t * p2 + t * t * t * p3);
  }
  return out;
}

struct Geometry {
  Vec3 hi;  // physical coordinate of the last voxel center
  Spacing sp;

  // Distance from p to the nearest face of the voxel-center box.
  bool inside(const Vec3& p, double r) const {
    const double m = r + sp.min();
    return p.x - m >= 0 && p.y - m >= 0 && p.z - m >= 0 && p.x + m <= hi.x && p.y + m <= hi.y && p.z + m <= hi.z;
  }
};

void stamp_ball(Mask& m, const Vec3& c, double r, std::uint8_t value) {
  const Spacing& sp = m.spacing();
  const auto& e = m.extent();
  const int x0 = std::max(0, static_cast<int>(std::ceil((c.x - r) / sp.x)));
  const int x1 = std::min(e.nx - 1, static_cast<int>(std::floor((c.x + r) / sp.x)));
  const int y0 = std::max(0, static_cast<int>(std::ceil((c.y - r) / sp.y)));
  const int y1 = std::min(e.ny - 1, static_cast<int>(std::floor((c.y + r) / sp.y)));
  const int z0 = std::max(0, static_cast<int>(std::ceil((c.z - r) / sp.z)));
  const int z1 = std::min(e.nz - 1, static_cast<int>(std::floor((c.z + r) / sp.z)));
  const double r2 = r * r;
  for (int z = z0; z <= z1; ++z)
    for (int y = y0; y <= y1; ++y)
      for (int x = x0; x <= x1; ++x) {
        const Vec3 d = Vec3{x * sp.x, y * sp.y, z * sp.z} - c;
        if (dot(d, d) <= r2) m(x, y, z) = value;
      }
}

void validate(const SynthParams& p) {
  auto range_ok = [](const Range& r) { return r.lo > 0.0 && r.lo <= r.hi && std::isfinite(r.hi); };
  if (p.depth < 0) throw InvalidArgument("synth: depth must be non-negative");
  if (!(p.taper > 0.0 && p.taper < 1.0)) throw InvalidArgument("synth: taper must lie in (0, 1)");
  if (!range_ok(p.length_mm)) throw InvalidArgument("synth: segment length range must be positive and nonempty");
  if (!(p.branch_angle_deg.lo >= 0.0 && p.branch_angle_deg.lo <= p.branch_angle_deg.hi && p.branch_angle_deg.hi < 90.0)) {
    throw InvalidArgument("synth: branch angle range must be nonempty within [0, 90)");
  }
  if (!(p.radius_root_mm >= p.spacing.min())) throw InvalidArgument("synth: root radius must be at least one voxel");
  const Extent& e = p.extent;
  const double span = std::min({(e.nx - 1) * p.spacing.x, (e.ny - 1) * p.spacing.y, (e.nz - 1) * p.spacing.z});
  if (span < 2.0 * (p.radius_root_mm + p.spacing.min()) + p.length_mm.lo) {
    throw InvalidArgument("synth: volume too small for one segment");
  }
}

}  // namespace

double GroundTruth::total_length_mm() const {
  double len = 0.0;
  for (const auto& b : branches) len += b.length_mm;
  return len;
}

SynthVolume generate_tree(const SynthParams& params) {
  validate(params);
  Rng rng(params.seed);
  const Spacing& sp = params.spacing;
  const double h = sp.min();
  const Geometry geo{{(params.extent.nx - 1) * sp.x, (params.extent.ny - 1) * sp.y, (params.extent.nz - 1) * sp.z}, sp};
  auto radius_at = [&](int depth) {
    return std::max(params.radius_root_mm * std::pow(params.taper, depth), params.radius_floor_vox * h);
  };
  const double deg = std::numbers::pi / 180.0;

  GroundTruth truth;
  struct Pending {
    int parent;
    int depth;
    Vec3 start;
    Vec3 direction;
  };
  std::vector<Pending> queue;
  const double r0 = radius_at(0);
  {
    const Vec3 start{geo.hi.x * rng.uniform(0.4, 0.6), geo.hi.y * rng.uniform(0.4, 0.6), r0 + 2.0 * h};
    queue.push_back({-1, 0, start, tilt({0, 0, 1}, rng.uniform(0.0, 15.0) * deg, rng.uniform(0.0, 2 * std::numbers::pi))});
  }

  for (std::size_t qi = 0; qi < queue.size(); ++qi) {
    const Pending job = queue[qi];
    const double r = radius_at(job.depth);
    const double r_parent = job.parent >= 0 ? truth.branches[job.parent].radius_mm : 0.0;
    std::vector<Vec3> pts;
    bool fits = false;
    for (int draw = 0; draw < kMaxBranchDraws && !fits; ++draw) {
      const double len = rng.uniform(params.length_mm.lo, params.length_mm.hi);
      const Vec3 d1 = tilt(job.direction, rng.uniform(0.0, 20.0) * deg, rng.uniform(0.0, 2 * std::numbers::pi));
      const Vec3 end = job.start + len * normalized(job.direction + d1);
      const int samples = std::max(16, static_cast<int>(std::ceil(len / (0.25 * h))));
      pts = bezier(job.start, job.start + job.direction * (len / 3), end - d1 * (len / 3), end, samples);
      fits = true;
      const double exempt = r_parent + r + 3.0 * h;
      double arc = 0.0;
      for (std::size_t i = 0; i < pts.size() && fits; ++i) {
        if (i > 0) arc += distance(pts[i], pts[i - 1]);
        if (!geo.inside(pts[i], r)) fits = false;
        if (arc <= exempt) continue;
        for (const auto& other : truth.branches) {
          const double clear = r + other.radius_mm + 2.0 * h;
          for (const auto& q : other.centerline_mm)
            if (distance(pts[i], q) < clear) {
              fits = false;
              break;
            }
          if (!fits) break;
        }
      }
    }
    bool clipped = false;
    if (!fits) {
      std::size_t keep = 0;
      while (keep < pts.size() && geo.inside(pts[keep], r)) ++keep;
      pts.resize(std::max<std::size_t>(keep, 2));
      clipped = true;
      truth.warnings.push_back("branch " + std::to_string(truth.branches.size()) +
                               " did not fit; clipped and its subtree dropped");
    }
    SynthBranch b;
    b.id = static_cast<int>(truth.branches.size());
    b.parent = job.parent;
    b.depth = job.depth;
    b.radius_mm = r;
    b.length_mm = polyline_length(pts);
    b.centerline_mm = std::move(pts);
    truth.branches.push_back(b);

    if (!clipped && job.depth < params.depth) {
      const auto& c = truth.branches.back().centerline_mm;
      const Vec3 tangent = normalized(c.back() - c[c.size() - 2]);
      const double phi = rng.uniform(0.0, 2 * std::numbers::pi);
      const double a1 = rng.uniform(params.branch_angle_deg.lo, params.branch_angle_deg.hi) * deg;
      const double a2 = rng.uniform(params.branch_angle_deg.lo, params.branch_angle_deg.hi) * deg;
      queue.push_back({b.id, job.depth + 1, c.back(), tilt(tangent, a1, phi)});
      queue.push_back({b.id, job.depth + 1, c.back(), tilt(tangent, a2, phi + std::numbers::pi)});
    }
  }

  Mask mask(params.extent, sp);
  for (const auto& b : truth.branches)
    for (const auto& p : b.centerline_mm) stamp_ball(mask, p, b.radius_mm, 1);
  return {std::move(mask), std::move(truth)};
}

FractureResult fracture(const Mask& vol, const GroundTruth& truth, const FractureParams& params) {
  if (params.cuts < 1) throw InvalidArgument("fracture: at least one cut is required");
  if (!(params.radius_vox.lo > 0.0 && params.radius_vox.lo <= params.radius_vox.hi)) {
    throw InvalidArgument("fracture: cut radius range must be positive and nonempty");
  }
  if (truth.branches.empty()) throw InvalidArgument("fracture: ground truth has no branches");
  Rng rng(params.seed);
  const double h = vol.spacing().min();
  FractureResult result{vol, {}, params.cuts, {}};
  int components = label_components(vol, 26).count;

  for (int cut = 0; cut < params.cuts; ++cut) {
    bool placed = false;
    for (int attempt = 1; attempt <= params.max_attempts && !placed; ++attempt) {
      const SynthBranch& b = truth.branches[rng.index(truth.branches.size())];
      const double rb = rng.uniform(params.radius_vox.lo, params.radius_vox.hi) * h;
      // Clearance is measured from the surface of the neighboring tube: the
      // parent at the start, the branch's own cap (or its thinner children)
      // at the end. Both stumps then keep a centerline of their own.
      const double gap = params.junction_clearance_vox * h;
      const double r_start = b.parent >= 0 ? truth.branches[b.parent].radius_mm : b.radius_mm;
      const double margin_start = rb + b.radius_mm + r_start + gap;
      const double margin_end = rb + 2.0 * b.radius_mm + gap;
      const double pos = rng.uniform();
      if (b.length_mm < margin_start + margin_end) continue;
      const double arc_target = margin_start + pos * (b.length_mm - margin_start - margin_end);

      const auto& c = b.centerline_mm;
      Vec3 center = c.front();
      double arc = 0.0;
      for (std::size_t i = 1; i < c.size(); ++i) {
        const double seg = distance(c[i], c[i - 1]);
        if (arc + seg >= arc_target) {
          center = c[i - 1] + (arc_target - arc) / seg * (c[i] - c[i - 1]);
          break;
        }
        arc += seg;
      }

      bool clear = true;
      for (const auto& prev : result.cuts)
        if (distance(prev.center_mm, center) < rb + prev.radius_mm + 4.0 * h) clear = false;
      for (const auto& other : truth.branches) {
        if (other.id == b.id || !clear) continue;
        for (const auto& q : other.centerline_mm)
          if (distance(q, center) < rb + other.radius_mm + h) {
            clear = false;
            break;
          }
      }
      if (!clear) continue;

      Mask trial = result.mask;
      stamp_ball(trial, center, rb, 0);
      const int after = label_components(trial, 26).count;
      if (after != components + 1) continue;

      CutRecord rec;
      rec.branch = b.id;
      rec.center_mm = center;
      rec.radius_mm = rb;
      rec.arc_mm = arc_target;
      for (std::size_t i = 1; i < c.size(); ++i)
        if (distance(0.5 * (c[i] + c[i - 1]), center) <= rb) rec.severed_length_mm += distance(c[i], c[i - 1]);
      for (std::size_t i = 0; i < trial.size(); ++i) rec.removed_voxels += result.mask[i] && !trial[i];
      rec.attempts = attempt;
      result.mask = std::move(trial);
      result.cuts.push_back(rec);
      components = after;
      placed = true;
    }
    if (!placed) {
      result.warnings.push_back("cut " + std::to_string(cut) + " could not be placed after " +
                                std::to_string(params.max_attempts) + " attempts");
    }
  }
  return result;
}

namespace {
nlohmann::json vec_json(const Vec3& v) { return {v.x, v.y, v.z}; }
}  // namespace

nlohmann::json to_json(const GroundTruth& truth) {
  nlohmann::json branches = nlohmann::json::array();
  for (const auto& b : truth.branches) {
    nlohmann::json line = nlohmann::json::array();
    for (const auto& p : b.centerline_mm) line.push_back(vec_json(p));
    branches.push_back({{"id", b.id},
                        {"parent", b.parent},
                        {"depth", b.depth},
                        {"radius_mm", b.radius_mm},
                        {"length_mm", b.length_mm},
                        {"centerline_mm", std::move(line)}});
  }
  return {{"branch_count", truth.branch_count()},
          {"total_length_mm", truth.total_length_mm()},
          {"betti", {1, 0, 0}},
          {"branches", std::move(branches)},
          {"warnings", truth.warnings}};
}

nlohmann::json to_json(const FractureResult& result) {
  nlohmann::json cuts = nlohmann::json::array();
  for (const auto& c : result.cuts) {
    cuts.push_back({{"branch", c.branch},
                    {"center_mm", vec_json(c.center_mm)},
                    {"radius_mm", c.radius_mm},
                    {"arc_mm", c.arc_mm},
                    {"severed_length_mm", c.severed_length_mm},
                    {"removed_voxels", c.removed_voxels},
                    {"attempts", c.attempts}});
  }
  return {{"requested", result.requested}, {"placed", result.cuts.size()}, {"cuts", std::move(cuts)},
          {"warnings", result.warnings}};
}

nlohmann::json to_json(const SynthParams& p) {
  return {{"seed", p.seed},
          {"dims", {p.extent.nx, p.extent.ny, p.extent.nz}},
          {"spacing", {p.spacing.x, p.spacing.y, p.spacing.z}},
          {"depth", p.depth},
          {"radius_root_mm", p.radius_root_mm},
          {"taper", p.taper},
          {"radius_floor_vox", p.radius_floor_vox},
          {"branch_angle_deg", {p.branch_angle_deg.lo, p.branch_angle_deg.hi}},
          {"length_mm", {p.length_mm.lo, p.length_mm.hi}}};
}

}  // namespace ogmc
