#pragma once

#include <array>
#include <filesystem>
#include <limits>
#include <vector>

#include "ogmc/vec3.hpp"

namespace ogmc {

struct TriMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> triangles;
  std::vector<char> boundary;  // per vertex; boundary vertices never move

  double area() const;
  int euler_characteristic() const;  // V - E + F
};

struct SurfaceOptions {
  int samples = 32;     // points per boundary curve
  int rows = 0;         // interior rows of the ruled mesh; 0 picks max(2, samples / 4)
  double tol = 1e-6;    // relative area change that ends the relaxation
  int max_iter = 500;
};

/// Joins two curves that share their end points (both running p0 -> q0)
/// with a ruled strip: each curve is resampled to `samples` points, matching
/// points are connected by `rows` segments and every quad is split in two.
/// The end columns collapse to p0 and q0, so the mesh is a disk bounded by
/// exactly the two curves. Throws GeometryError when the ends differ by more
/// than 1e-6 mm or samples < 3.
TriMesh ruled_mesh(const std::vector<Vec3>& c1, const std::vector<Vec3>& c2, int samples, int rows = 0);

struct SurfaceResult {
  double area = 0.0;
  TriMesh mesh;
  int iterations = 0;
  std::vector<double> history;  // area after each accepted step, starting with the ruled mesh
  int degenerate_triangles = 0;
  bool degenerate_warning = false;  // more than half of the triangles are degenerate
};

/// Relaxes the interior of the ruled mesh toward a minimal surface. Each
/// step solves the cotangent Laplace system with the boundary fixed and
/// moves along the resulting direction with step halving until the area
/// does not increase (falling back to a mass-scaled area-gradient step).
/// Stops when the relative area decrease of a step falls below `tol` or
/// after `max_iter` steps.
SurfaceResult min_surface_area(const std::vector<Vec3>& c1, const std::vector<Vec3>& c2,
                               const SurfaceOptions& options = {});

inline constexpr double kMinArea = 1e-6;

/// Matching priority 1 / area; areas below `min_area` map to +infinity.
double msmo(double area, double min_area = kMinArea);

void write_obj(const TriMesh& mesh, const std::filesystem::path& path);

}  // namespace ogmc
