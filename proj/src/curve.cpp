#include "ogmc/curve.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

#include "ogmc/errors.hpp"

namespace ogmc {
namespace {

Vec3 to_world(const FrenetFrame& f, const Vec3& local) { return local.x * f.alpha + local.y * f.beta + local.z * f.gamma; }

Vec3 reference_axis(const Vec3& alpha) {
  const Vec3 axes[3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  int best = 0;
  for (int i = 1; i < 3; ++i)
    if (std::abs(dot(alpha, axes[i])) < std::abs(dot(alpha, axes[best]))) best = i;
  return axes[best];
}

// Component of v orthogonal to the unit vector t, or nullopt if negligible.
std::optional<Vec3> orthogonal_part(const Vec3& v, const Vec3& t, double eps = 1e-9) {
  const Vec3 p = v - dot(v, t) * t;
  const double n = norm(p);
  if (n <= eps * std::max(1.0, norm(v))) return std::nullopt;
  return p / n;
}

void set_normal(FrenetFrame& f, const Vec3& beta) {
  f.beta = beta;
  f.gamma = cross(f.alpha, f.beta);
}

// Cubic (or lower) least-squares fit of r(s); returns derivative evaluator.
struct LocalFit {
  Eigen::Matrix<double, 4, 3> coeff = Eigen::Matrix<double, 4, 3>::Zero();  // in t = s / scale
  double scale = 1.0;

  Vec3 derivative(int order, double s) const {
    const double t = s / scale;
    Eigen::RowVector3d acc = Eigen::RowVector3d::Zero();
    for (int k = order; k < 4; ++k) {
      double c = 1.0;
      for (int j = 0; j < order; ++j) c *= (k - j);
      acc += c * std::pow(t, k - order) * coeff.row(k);
    }
    acc /= std::pow(scale, order);
    return {acc(0), acc(1), acc(2)};
  }
};

LocalFit fit_local(const std::vector<Vec3>& pts, const std::vector<double>& s) {
  const int m = static_cast<int>(pts.size());
  const int degree = std::min(3, m - 1);
  LocalFit fit;
  fit.scale = s.back() > 0 ? s.back() : 1.0;
  Eigen::MatrixXd V(m, degree + 1);
  Eigen::MatrixXd P(m, 3);
  for (int i = 0; i < m; ++i) {
    const double t = s[i] / fit.scale;
    double p = 1.0;
    for (int k = 0; k <= degree; ++k, p *= t) V(i, k) = p;
    P(i, 0) = pts[i].x;
    P(i, 1) = pts[i].y;
    P(i, 2) = pts[i].z;
  }
  const Eigen::MatrixXd c = V.colPivHouseholderQr().solve(P);
  fit.coeff.topRows(degree + 1) = c;
  return fit;
}

double curvature(const Vec3& d1, const Vec3& d2) {
  const double n1 = norm(d1);
  return n1 > 0 ? norm(cross(d1, d2)) / (n1 * n1 * n1) : 0.0;
}

}  // namespace

DiscreteCurve::DiscreteCurve(std::vector<Vec3> points) : points_(std::move(points)) {
  if (points_.empty()) throw GeometryError("curve has no points");
  s_.resize(points_.size());
  s_[0] = 0.0;
  for (std::size_t i = 1; i < points_.size(); ++i) {
    const double d = distance(points_[i], points_[i - 1]);
    if (!(d > 0.0)) throw GeometryError("curve has repeated consecutive points");
    s_[i] = s_[i - 1] + d;
  }
}

DiscreteCurve DiscreteCurve::reversed() const {
  std::vector<Vec3> r(points_.rbegin(), points_.rend());
  return DiscreteCurve(std::move(r));
}

DiscreteCurve resample_arclength(const DiscreteCurve& curve, double h) {
  if (!(h > 0.0)) throw GeometryError("resample step must be positive");
  const double total = curve.length();
  if (total < h) throw GeometryError("curve shorter than resample step");
  const auto& p = curve.points();
  const auto& s = curve.arclength();
  std::vector<Vec3> out;
  std::size_t seg = 0;
  for (int k = 0;; ++k) {
    const double target = k * h;
    if (target >= total - 1e-9 * h) break;
    while (seg + 1 < p.size() && s[seg + 1] < target) ++seg;
    const double t = (target - s[seg]) / (s[seg + 1] - s[seg]);
    out.push_back(p[seg] + t * (p[seg + 1] - p[seg]));
  }
  out.front() = p.front();
  out.push_back(p.back());
  return DiscreteCurve(std::move(out));
}

FrenetFrame FrenetFrame::reversed() const {
  FrenetFrame f = *this;
  f.alpha = -alpha;
  f.gamma = -gamma;
  return f;
}

FrenetFrame frenet_frame(const DiscreteCurve& curve, CurveEnd end, Orientation orientation,
                         const FrameOptions& options) {
  if (curve.size() < 2) throw GeometryError("frenet_frame needs at least two points");
  const DiscreteCurve c = end == CurveEnd::front ? curve : curve.reversed();
  const int m = std::min<int>(std::max(options.window, 2), static_cast<int>(c.size()));
  const std::vector<Vec3> pts(c.points().begin(), c.points().begin() + m);
  const std::vector<double> s(c.arclength().begin(), c.arclength().begin() + m);
  const LocalFit fit = fit_local(pts, s);

  const Vec3 d1 = fit.derivative(1, 0.0);
  const Vec3 d2 = fit.derivative(2, 0.0);
  const Vec3 d3 = fit.derivative(3, 0.0);

  FrenetFrame f;
  f.origin = pts.front();
  f.alpha = norm(d1) > 0 ? normalized(d1) : normalized(pts[1] - pts[0]);
  const Vec3 b = cross(d1, d2);
  const double b2 = dot(b, b);
  f.kappa = curvature(d1, d2);
  f.tau = b2 > 0 ? dot(b, d3) / b2 : 0.0;

  if (f.kappa >= options.kappa_min) {
    set_normal(f, normalized(cross(b, d1)));
    f.normal_source = NormalSource::frenet;
  } else {
    f.degenerate = true;
    std::optional<Vec3> normal;
    for (int k = 1; k < m && !normal; ++k) {
      const Vec3 t1 = fit.derivative(1, s[k]);
      const Vec3 t2 = fit.derivative(2, s[k]);
      if (curvature(t1, t2) < options.kappa_min) continue;
      // Double-reflection rotation-minimizing transport from sample k back to 0.
      Vec3 r = normalized(cross(cross(t1, t2), t1));
      Vec3 t = normalized(t1);
      for (int i = k; i > 0; --i) {
        const Vec3 v1 = pts[i - 1] - pts[i];
        const double c1 = dot(v1, v1);
        const Vec3 rl = r - (2.0 / c1) * dot(v1, r) * v1;
        const Vec3 tl = t - (2.0 / c1) * dot(v1, t) * v1;
        const Vec3 tn = i - 1 == 0 ? f.alpha : normalized(fit.derivative(1, s[i - 1]));
        const Vec3 v2 = tn - tl;
        const double c2 = dot(v2, v2);
        r = c2 > 1e-30 ? rl - (2.0 / c2) * dot(v2, rl) * v2 : rl;
        t = tn;
      }
      normal = orthogonal_part(r, f.alpha);
    }
    if (normal) {
      set_normal(f, *normal);
      f.normal_source = NormalSource::transported;
    } else {
      set_normal(f, *orthogonal_part(reference_axis(f.alpha), f.alpha));
      f.normal_source = NormalSource::reference_axis;
    }
  }
  return orientation == Orientation::inward ? f : f.reversed();
}

Vec3 CanonicalCubic::evaluate(double s) const { return frame.origin + to_world(frame, local(s)); }

std::vector<Vec3> CanonicalCubic::sample(int n) const {
  std::vector<Vec3> out(n);
  for (int i = 0; i < n; ++i) out[i] = evaluate(s_star * i / (n - 1));
  return out;
}

CanonicalCubic fit_canonical_cubic(const FrenetFrame& frame_p0, const Vec3& q0, double x_min_fraction) {
  const Vec3 d = q0 - frame_p0.origin;
  const double dist = norm(d);
  if (!(dist > 0.0)) throw GeometryError("connector target coincides with the frame origin");
  const double x = dot(d, frame_p0.alpha);
  const double y = dot(d, frame_p0.beta);
  const double z = dot(d, frame_p0.gamma);
  if (x <= x_min_fraction * dist) throw GeometryError("connector target lies beside or behind the tangent");
  // With kappa0 = 0 the cubic is the tangent line and cannot leave it.
  if (y == 0.0 && std::abs(z) > 1e-12 * dist) throw GeometryError("connector target off the osculating plane at zero curvature");
  CanonicalCubic c;
  c.frame = frame_p0;
  c.s_star = x;
  c.kappa0 = 2.0 * y / (x * x);
  c.tau0 = c.kappa0 != 0.0 ? 6.0 * z / (c.kappa0 * x * x * x) : 0.0;
  return c;
}

FrenetFrame cubic_frenet_at(const CanonicalCubic& c, double s) {
  const double k = c.kappa0, t = c.tau0;
  const Vec3 d1{1.0, k * s, 0.5 * k * t * s * s};
  // (r' x r'') / kappa0, which keeps its orientation as kappa0 changes sign.
  const Vec3 w{0.5 * k * t * s * s, -t * s, 1.0};
  const Vec3 tangent = normalized(d1);
  const Vec3 binormal = normalized(w);
  const Vec3 normal = cross(binormal, tangent);

  FrenetFrame f;
  f.origin = c.evaluate(s);
  f.alpha = to_world(c.frame, tangent);
  f.beta = to_world(c.frame, normal);
  f.gamma = to_world(c.frame, binormal);
  const double n1 = norm(d1);
  f.kappa = std::abs(k) * norm(w) / (n1 * n1 * n1);
  f.tau = t / dot(w, w);
  f.degenerate = c.frame.degenerate && k == 0.0;
  f.normal_source = c.frame.normal_source;
  return f;
}

double touching_bias(const FrenetFrame& a, const FrenetFrame& b) {
  return (norm(a.alpha - b.alpha) + norm(a.beta - b.beta) + norm(a.gamma - b.gamma)) / 3.0;
}

namespace {

// Bias D of the connector leaving `from` (outward frame) and arriving at
// `to` (inward frame of the other curve). Normals that came from the fixed
// reference axis carry no geometric information; they are replaced by
// directions defined relative to the pair so the result stays rigid-invariant.
double directional_bias(FrenetFrame from, FrenetFrame to, const TfdOptions& opt,
                        std::optional<CanonicalCubic>& connector) {
  if (from.normal_source == NormalSource::reference_axis) {
    auto n = orthogonal_part(to.origin - from.origin, from.alpha);
    if (!n) n = orthogonal_part(to.alpha, from.alpha);
    if (n) set_normal(from, *n);
  }
  const CanonicalCubic cubic = fit_canonical_cubic(from, to.origin, opt.x_min_fraction);
  connector = cubic;
  FrenetFrame arrived;
  if (opt.transport == FrameTransport::frenet_field) {
    arrived = cubic_frenet_at(cubic, cubic.s_star);
  } else {
    arrived = from;
    arrived.origin = to.origin;
  }
  if (to.normal_source == NormalSource::reference_axis) {
    if (auto n = orthogonal_part(arrived.beta, to.alpha)) set_normal(to, *n);
  }
  return touching_bias(arrived, to);
}

DiscreteCurve prepared_curve(const EndpointInfo& e, double h) {
  DiscreteCurve raw(e.chain_mm);
  return raw.length() >= h ? resample_arclength(raw, h) : raw;
}

}  // namespace

TfdResult tfd(const EndpointInfo& p, const EndpointInfo& q, const TfdOptions& options) {
  TfdResult r;
  if (p.degenerate || q.degenerate || p.chain_mm.size() < 2 || q.chain_mm.size() < 2) {
    r.status = TfdResult::Status::degenerate_endpoint;
    return r;
  }
  try {
    const FrenetFrame p_in = frenet_frame(prepared_curve(p, options.resample_step_mm), CurveEnd::front,
                                          Orientation::inward, options.frame);
    const FrenetFrame q_in = frenet_frame(prepared_curve(q, options.resample_step_mm), CurveEnd::front,
                                          Orientation::inward, options.frame);
    r.bias_p = directional_bias(p_in.reversed(), q_in, options, r.connector_p);
    r.bias_q = directional_bias(q_in.reversed(), p_in, options, r.connector_q);
  } catch (const GeometryError&) {
    r.status = TfdResult::Status::implausible_geometry;
    r.value = std::numeric_limits<double>::infinity();
    return r;
  }
  r.value = 0.5 * (r.bias_p + r.bias_q);
  return r;
}

const char* to_string(TfdResult::Status s) {
  switch (s) {
    case TfdResult::Status::ok:
      return "ok";
    case TfdResult::Status::degenerate_endpoint:
      return "degenerate_endpoint";
    case TfdResult::Status::implausible_geometry:
      return "implausible_geometry";
  }
  return "?";
}

}  // namespace ogmc
