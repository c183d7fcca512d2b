#include "ogmc/geodesic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <queue>

#include "ogmc/morphology.hpp"

namespace ogmc {
namespace {

struct HeapEntry {
  double time;
  std::size_t index;
  bool operator>(const HeapEntry& o) const { return time != o.time ? time > o.time : index > o.index; }
};

// Solves sum_a ((u - u_a) / h_a)^2 = 1 / F^2 over the smallest upwind values.
double godunov(std::array<std::pair<double, double>, 3> nb, int count, double f) {
  std::sort(nb.begin(), nb.begin() + count);
  const double rhs = 1.0 / (f * f);
  double u = nb[0].first + nb[0].second / f;
  for (int k = 2; k <= count; ++k) {
    if (u <= nb[k - 1].first) break;
    double a = 0, b = 0, c = -rhs;
    for (int i = 0; i < k; ++i) {
      const double w = 1.0 / (nb[i].second * nb[i].second);
      a += w;
      b -= 2.0 * w * nb[i].first;
      c += w * nb[i].first * nb[i].first;
    }
    const double disc = b * b - 4 * a * c;
    if (disc < 0) break;
    u = (-b + std::sqrt(disc)) / (2 * a);
  }
  return u;
}

// Trilinear interpolation of the central-difference gradient (per index unit).
struct TimeSampler {
  const ScalarVolume& t;

  double at(int x, int y, int z) const {
    const float v = t.value_or(x, y, z, kUnreached);
    return v;
  }
  bool known(int x, int y, int z) const { return t.contains(x, y, z) && t(x, y, z) != kUnreached; }

  Vec3 grad_at(int x, int y, int z) const {
    double g[3];
    const int d[3][3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
    const double c = at(x, y, z);
    for (int a = 0; a < 3; ++a) {
      const bool lo = known(x - d[a][0], y - d[a][1], z - d[a][2]);
      const bool hi = known(x + d[a][0], y + d[a][1], z + d[a][2]);
      const double vl = lo ? at(x - d[a][0], y - d[a][1], z - d[a][2]) : 0.0;
      const double vh = hi ? at(x + d[a][0], y + d[a][1], z + d[a][2]) : 0.0;
      if (lo && hi) {
        g[a] = 0.5 * (vh - vl);
      } else if (hi) {
        g[a] = vh - c;
      } else if (lo) {
        g[a] = c - vl;
      } else {
        g[a] = 0.0;
      }
    }
    return {g[0], g[1], g[2]};
  }

  // Returns false if any corner of the cell is unknown.
  bool gradient(const Vec3& p, Vec3& out, double& value) const {
    const int x0 = static_cast<int>(std::floor(p.x)), y0 = static_cast<int>(std::floor(p.y)),
              z0 = static_cast<int>(std::floor(p.z));
    const double fx = p.x - x0, fy = p.y - y0, fz = p.z - z0;
    Vec3 g{};
    double v = 0.0;
    for (int k = 0; k < 8; ++k) {
      const int dx = k & 1, dy = (k >> 1) & 1, dz = (k >> 2) & 1;
      const double w = (dx ? fx : 1 - fx) * (dy ? fy : 1 - fy) * (dz ? fz : 1 - fz);
      if (w == 0.0) continue;
      if (!known(x0 + dx, y0 + dy, z0 + dz)) return false;
      g += w * grad_at(x0 + dx, y0 + dy, z0 + dz);
      v += w * at(x0 + dx, y0 + dy, z0 + dz);
    }
    out = g;
    value = v;
    return true;
  }
};

Voxel nearest_voxel(const Vec3& p) {
  return {static_cast<int>(std::lround(p.x)), static_cast<int>(std::lround(p.y)), static_cast<int>(std::lround(p.z))};
}

}  // namespace

SpeedField build_speed_field(const Mask& seg, double sigma_mm, double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw InvalidArgument("speed floor delta must lie in (0, 1)");
  ScalarVolume smooth = gaussian_smooth(seg, sigma_mm);
  for (auto& v : smooth.data()) {
    const double f = delta + (1.0 - delta) * static_cast<double>(v);
    v = static_cast<float>(std::clamp(f, delta, 1.0));
  }
  return {std::move(smooth), delta};
}

Box pair_box(const Voxel& a, const Voxel& b, double margin_factor, const Extent& e) {
  const double dx = a.x - b.x, dy = a.y - b.y, dz = a.z - b.z;
  const int m = std::max(1, static_cast<int>(std::ceil(margin_factor * std::sqrt(dx * dx + dy * dy + dz * dz))));
  return {{std::max(0, std::min(a.x, b.x) - m), std::max(0, std::min(a.y, b.y) - m), std::max(0, std::min(a.z, b.z) - m)},
          {std::min(e.nx - 1, std::max(a.x, b.x) + m), std::min(e.ny - 1, std::max(a.y, b.y) + m),
           std::min(e.nz - 1, std::max(a.z, b.z) + m)}};
}

ScalarVolume fast_march(const SpeedField& field, const Voxel& source, const FastMarchOptions& options) {
  const ScalarVolume& F = field.speed;
  if (!F.contains(source)) throw InvalidArgument("fast_march: source outside the grid");
  const Extent& e = F.extent();
  const Box box = options.box.value_or(Box{{0, 0, 0}, {e.nx - 1, e.ny - 1, e.nz - 1}});
  if (!box.contains(source)) throw InvalidArgument("fast_march: source outside the box");

  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(F.size(), inf);
  std::vector<char> frozen(F.size(), 0);
  std::priority_queue<HeapEntry, std::vector<HeapEntry>, std::greater<>> heap;
  const double h[3] = {F.spacing().x, F.spacing().y, F.spacing().z};

  const std::size_t src = F.index(source);
  u[src] = 0.0;
  heap.push({0.0, src});
  double stop = inf;
  const double min_speed = std::max(field.delta, 1e-6);
  const double slack = 4.0 * std::max(h[0], std::max(h[1], h[2])) / min_speed;

  while (!heap.empty()) {
    const HeapEntry top = heap.top();
    heap.pop();
    if (frozen[top.index] || top.time > u[top.index]) continue;
    if (top.time > stop) break;
    frozen[top.index] = 1;
    const Voxel v = F.voxel(top.index);
    if (options.target && v == *options.target) stop = 1.25 * top.time + slack;

    for (const auto& d : neighbors6()) {
      const Voxel n = v + d;
      if (!box.contains(n) || !F.contains(n)) continue;
      const std::size_t ni = F.index(n);
      if (frozen[ni]) continue;
      std::array<std::pair<double, double>, 3> nb{};
      int count = 0;
      for (int a = 0; a < 3; ++a) {
        // Upwind side with the smaller frozen value; second order when the
        // next voxel out is frozen and not larger.
        double best = inf, term = inf, step = h[a];
        for (int sgn : {-1, 1}) {
          Voxel w = n;
          int& wc = a == 0 ? w.x : (a == 1 ? w.y : w.z);
          wc += sgn;
          if (!box.contains(w) || !F.contains(w)) continue;
          const std::size_t wi = F.index(w);
          if (!frozen[wi] || u[wi] >= best) continue;
          best = u[wi];
          term = best;
          step = h[a];
          wc += sgn;
          if (box.contains(w) && F.contains(w)) {
            const std::size_t wi2 = F.index(w);
            if (frozen[wi2] && u[wi2] <= best) {
              term = (4.0 * best - u[wi2]) / 3.0;
              step = 2.0 * h[a] / 3.0;
            }
          }
        }
        if (best < inf) nb[count++] = {term, step};
      }
      const double t = godunov(nb, count, F[ni]);
      if (t < u[ni]) {
        u[ni] = t;
        heap.push({t, ni});
      }
    }
  }

  ScalarVolume out(e, F.spacing(), kUnreached);
  for (std::size_t i = 0; i < u.size(); ++i)
    if (frozen[i]) out[i] = static_cast<float>(u[i]);
  return out;
}

double GeodesicPath::length_mm() const {
  double len = 0.0;
  for (std::size_t i = 1; i < points_mm.size(); ++i) len += distance(points_mm[i], points_mm[i - 1]);
  return len;
}

GeodesicPath backtrack_geodesic(const ScalarVolume& times, const Voxel& start, const Voxel& source,
                                const BacktrackOptions& options) {
  if (!times.contains(start) || times(start) == kUnreached) {
    throw InvalidArgument("backtrack_geodesic: start voxel was not reached by the front");
  }
  const Spacing& sp = times.spacing();
  const double step_mm = options.step * sp.min();
  auto to_mm = [&](const Vec3& p) { return Vec3{p.x * sp.x, p.y * sp.y, p.z * sp.z}; };
  const Vec3 src{static_cast<double>(source.x), static_cast<double>(source.y), static_cast<double>(source.z)};
  auto near_source = [&](const Vec3& p) { return norm(p - src) <= 1.0; };

  TimeSampler sampler{times};
  // Index-space displacement of one descent step at p, or nullopt.
  auto descent = [&](const Vec3& p, double& value) -> std::optional<Vec3> {
    Vec3 g;
    if (!sampler.gradient(p, g, value)) return std::nullopt;
    const Vec3 phys{g.x / sp.x, g.y / sp.y, g.z / sp.z};
    const double n = norm(phys);
    if (n < 1e-12) return std::nullopt;
    const Vec3 d = -1.0 * phys / n * step_mm;
    return Vec3{d.x / sp.x, d.y / sp.y, d.z / sp.z};
  };

  GeodesicPath path;
  Vec3 p{static_cast<double>(start.x), static_cast<double>(start.y), static_cast<double>(start.z)};
  path.points_mm.push_back(to_mm(p));
  double current = times(start);

  for (int step = 0; step < options.max_steps; ++step) {
    if (near_source(p)) {
      if (path.points_mm.back() != to_mm(src)) path.points_mm.push_back(to_mm(src));
      return path;
    }
    bool moved = false;
    double v0 = 0.0, v1 = 0.0, v2 = 0.0;
    if (auto k1 = descent(p, v0)) {
      const Vec3 mid = p + 0.5 * *k1;
      if (auto k2 = descent(mid, v1)) {
        const Vec3 next = p + *k2;
        Vec3 g;
        if (sampler.gradient(next, g, v2) && v2 < current - 1e-9) {
          p = next;
          current = v2;
          moved = true;
        }
      }
    }
    if (!moved) {
      // Discrete steepest descent from the nearest voxel.
      const Voxel c = nearest_voxel(p);
      double best = times.contains(c) ? static_cast<double>(times(c)) : kUnreached;
      std::optional<Voxel> next;
      for (const auto& d : neighbors26()) {
        const Voxel n = c + d;
        if (!times.contains(n) || times(n) == kUnreached) continue;
        if (times(n) < best) {
          best = times(n);
          next = n;
        }
      }
      if (!next || !(best < current)) {
        throw GeodesicStagnation("geodesic backtracking stagnated", path);
      }
      p = Vec3{static_cast<double>(next->x), static_cast<double>(next->y), static_cast<double>(next->z)};
      current = best;
    }
    path.points_mm.push_back(to_mm(p));
  }
  throw GeodesicStagnation("geodesic backtracking exceeded the step limit", path);
}

Mask fill_tube(const Mask& seg, const GeodesicPath& path, double radius_mm) {
  if (path.points_mm.empty()) throw InvalidArgument("fill_tube: empty path");
  if (!(radius_mm > 0.0)) throw InvalidArgument("fill_tube: radius must be positive");
  Mask out = seg;
  const Spacing& sp = seg.spacing();
  const double r2 = radius_mm * radius_mm;
  const auto& pts = path.points_mm;
  auto mark_segment = [&](const Vec3& a, const Vec3& b) {
    const Vec3 lo{std::min(a.x, b.x) - radius_mm, std::min(a.y, b.y) - radius_mm, std::min(a.z, b.z) - radius_mm};
    const Vec3 hi{std::max(a.x, b.x) + radius_mm, std::max(a.y, b.y) + radius_mm, std::max(a.z, b.z) + radius_mm};
    const Vec3 ab = b - a;
    const double len2 = dot(ab, ab);
    const int x0 = std::max(0, static_cast<int>(std::ceil(lo.x / sp.x))), x1 = std::min(seg.extent().nx - 1, static_cast<int>(std::floor(hi.x / sp.x)));
    const int y0 = std::max(0, static_cast<int>(std::ceil(lo.y / sp.y))), y1 = std::min(seg.extent().ny - 1, static_cast<int>(std::floor(hi.y / sp.y)));
    const int z0 = std::max(0, static_cast<int>(std::ceil(lo.z / sp.z))), z1 = std::min(seg.extent().nz - 1, static_cast<int>(std::floor(hi.z / sp.z)));
    for (int z = z0; z <= z1; ++z)
      for (int y = y0; y <= y1; ++y)
        for (int x = x0; x <= x1; ++x) {
          const Vec3 c{x * sp.x, y * sp.y, z * sp.z};
          const double t = len2 > 0 ? std::clamp(dot(c - a, ab) / len2, 0.0, 1.0) : 0.0;
          const Vec3 d = c - (a + t * ab);
          if (dot(d, d) <= r2) out(x, y, z) = 1;
        }
  };
  if (pts.size() == 1) mark_segment(pts[0], pts[0]);
  for (std::size_t i = 1; i < pts.size(); ++i) mark_segment(pts[i - 1], pts[i]);
  for (const auto& p : pts) {
    const Voxel v{static_cast<int>(std::lround(p.x / sp.x)), static_cast<int>(std::lround(p.y / sp.y)),
                  static_cast<int>(std::lround(p.z / sp.z))};
    if (out.contains(v)) out(v) = 1;
  }
  return out;
}

}  // namespace ogmc
