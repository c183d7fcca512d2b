#pragma once

#include <limits>
#include <optional>
#include <vector>

#include "ogmc/skeleton_graph.hpp"
#include "ogmc/vec3.hpp"

namespace ogmc {

/// Polyline in mm with cumulative arc length.
class DiscreteCurve {
 public:
  DiscreteCurve() = default;
  /// Throws GeometryError for an empty list or repeated consecutive points.
  explicit DiscreteCurve(std::vector<Vec3> points);

  const std::vector<Vec3>& points() const { return points_; }
  const std::vector<double>& arclength() const { return s_; }
  std::size_t size() const { return points_.size(); }
  double length() const { return s_.empty() ? 0.0 : s_.back(); }
  DiscreteCurve reversed() const;

 private:
  std::vector<Vec3> points_;
  std::vector<double> s_;
};

/// Points at arc length 0, h, 2h, ... plus the original last point.
/// Throws GeometryError if h <= 0 or the curve is shorter than h.
DiscreteCurve resample_arclength(const DiscreteCurve& curve, double h);

enum class CurveEnd { front, back };
/// inward: tangent points from the end into the curve; outward: away from it.
enum class Orientation { inward, outward };
enum class NormalSource { frenet, transported, reference_axis };

/// Moving frame {alpha, beta, gamma} = (tangent, normal, binormal) at `origin`.
struct FrenetFrame {
  Vec3 origin;
  Vec3 alpha{1, 0, 0};
  Vec3 beta{0, 1, 0};
  Vec3 gamma{0, 0, 1};
  double kappa = 0.0;  // 1/mm, >= 0
  double tau = 0.0;    // 1/mm
  bool degenerate = false;
  NormalSource normal_source = NormalSource::frenet;

  /// Same curve traversed the other way: tangent and binormal flip.
  FrenetFrame reversed() const;
};

struct FrameOptions {
  double kappa_min = 1e-3;  // below this the normal is not taken from r''
  int window = 7;           // samples used for the local fit
};

/// Frame at one end of the curve from a least-squares cubic fit of r(s)
/// over the first `window` samples (exact for cubic curves):
/// kappa = |r' x r''| / |r'|^3, tau = det(r', r'', r''') / |r' x r''|^2.
/// When kappa < kappa_min the normal comes from rotation-minimizing
/// transport of the nearest sample with usable curvature, otherwise from the
/// world axis least aligned with the tangent; `degenerate` is set in both
/// cases. Throws GeometryError for fewer than two points.
FrenetFrame frenet_frame(const DiscreteCurve& curve, CurveEnd end, Orientation orientation,
                         const FrameOptions& options = {});

/// Local third-order normal form (s, k0 s^2/2, k0 t0 s^3/6) written in the
/// frame at p0 and passing through q0 at s = s_star.
struct CanonicalCubic {
  FrenetFrame frame;
  double kappa0 = 0.0;
  double tau0 = 0.0;
  double s_star = 0.0;

  Vec3 local(double s) const { return {s, 0.5 * kappa0 * s * s, kappa0 * tau0 * s * s * s / 6.0}; }
  Vec3 evaluate(double s) const;
  /// Samples s = 0 .. s_star at n evenly spaced parameters; the last point is q0 up to rounding.
  std::vector<Vec3> sample(int n) const;
};

/// Fits the canonical cubic from the frame at p0 to q0: with q0 at frame
/// coordinates (x, y, z), s_star = x, kappa0 = 2y/x^2, tau0 = 6z/(kappa0 x^3)
/// (0 when kappa0 = 0). Throws GeometryError when q0 coincides with p0,
/// x <= x_min_fraction * |q0 - p0|, or y = 0 while z != 0 (unreachable).
CanonicalCubic fit_canonical_cubic(const FrenetFrame& frame_p0, const Vec3& q0, double x_min_fraction = 0.25);

/// Analytic Frenet frame of the cubic at parameter s, in world coordinates.
/// Curvature sign is absorbed so the frame at s = 0 is the base frame.
FrenetFrame cubic_frenet_at(const CanonicalCubic& cubic, double s);

/// Mean of the L2 distances between corresponding frame axes; in [0, 2].
double touching_bias(const FrenetFrame& a, const FrenetFrame& b);

/// How the base frame at p0 is carried to q0 before comparison.
enum class FrameTransport {
  frenet_field,  // Frenet frame of the fitted connector at q0
  parallel,      // constant frame (Euclidean parallel transport)
};

struct TfdOptions {
  double resample_step_mm = 1.0;
  FrameOptions frame;
  double x_min_fraction = 0.25;
  FrameTransport transport = FrameTransport::frenet_field;
};

struct TfdResult {
  enum class Status { ok, degenerate_endpoint, implausible_geometry };

  double value = std::numeric_limits<double>::infinity();
  Status status = Status::ok;
  double bias_p = std::numeric_limits<double>::infinity();  // D_p(q0)
  double bias_q = std::numeric_limits<double>::infinity();  // D_q(p0)
  std::optional<CanonicalCubic> connector_p;               // p0 -> q0
  std::optional<CanonicalCubic> connector_q;               // q0 -> p0

  bool finite() const { return status == Status::ok; }
};

/// Touching fit degree (D_p(q0) + D_q(p0)) / 2 of two endpoint chains.
/// Infinite with a non-ok status when either endpoint is degenerate or a
/// connector fit is implausible. Symmetric in its arguments.
TfdResult tfd(const EndpointInfo& p, const EndpointInfo& q, const TfdOptions& options = {});

const char* to_string(TfdResult::Status s);

}  // namespace ogmc
