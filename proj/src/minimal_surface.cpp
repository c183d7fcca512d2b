#include "ogmc/minimal_surface.hpp"

#include <Eigen/Sparse>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <utility>

#include "ogmc/errors.hpp"

namespace ogmc {
namespace {

constexpr double kDegenerateArea = 1e-12;

double triangle_area(const Vec3& a, const Vec3& b, const Vec3& c) { return 0.5 * norm(cross(b - a, c - a)); }

double mesh_area(const std::vector<Vec3>& v, const std::vector<std::array<int, 3>>& tris) {
  double a = 0.0;
  for (const auto& t : tris) a += triangle_area(v[t[0]], v[t[1]], v[t[2]]);
  return a;
}

std::vector<Vec3> resample_count(const std::vector<Vec3>& pts, int n) {
  std::vector<double> s(pts.size(), 0.0);
  for (std::size_t i = 1; i < pts.size(); ++i) s[i] = s[i - 1] + distance(pts[i], pts[i - 1]);
  const double total = s.back();
  std::vector<Vec3> out(n);
  std::size_t seg = 0;
  for (int k = 0; k < n; ++k) {
    const double target = total * k / (n - 1);
    while (seg + 2 < pts.size() && s[seg + 1] < target) ++seg;
    const double len = s[seg + 1] - s[seg];
    const double t = len > 0 ? std::clamp((target - s[seg]) / len, 0.0, 1.0) : 0.0;
    out[k] = pts[seg] + t * (pts[seg + 1] - pts[seg]);
  }
  out.front() = pts.front();
  out.back() = pts.back();
  return out;
}

double cot(const Vec3& a, const Vec3& b) {
  const double s = norm(cross(a, b));
  return s > 0 ? dot(a, b) / s : 0.0;
}

std::vector<Vec3> area_gradient(const std::vector<Vec3>& v, const std::vector<std::array<int, 3>>& tris) {
  std::vector<Vec3> g(v.size());
  for (const auto& t : tris) {
    const Vec3 n = cross(v[t[1]] - v[t[0]], v[t[2]] - v[t[0]]);
    const double len = norm(n);
    if (len < 2 * kDegenerateArea) continue;
    const Vec3 u = n / len;
    for (int k = 0; k < 3; ++k) {
      const Vec3& b = v[t[(k + 1) % 3]];
      const Vec3& c = v[t[(k + 2) % 3]];
      g[t[k]] += 0.5 * cross(u, c - b);
    }
  }
  return g;
}

}  // namespace

double TriMesh::area() const { return mesh_area(vertices, triangles); }

int TriMesh::euler_characteristic() const {
  std::set<std::pair<int, int>> edges;
  for (const auto& t : triangles)
    for (int k = 0; k < 3; ++k) edges.insert(std::minmax(t[k], t[(k + 1) % 3]));
  return static_cast<int>(vertices.size()) - static_cast<int>(edges.size()) + static_cast<int>(triangles.size());
}

TriMesh ruled_mesh(const std::vector<Vec3>& c1, const std::vector<Vec3>& c2, int samples, int rows) {
  if (samples < 3) throw GeometryError("ruled_mesh needs at least 3 samples per curve");
  if (c1.size() < 2 || c2.size() < 2) throw GeometryError("ruled_mesh needs curves with at least 2 points");
  if (distance(c1.front(), c2.front()) > 1e-6 || distance(c1.back(), c2.back()) > 1e-6) {
    throw GeometryError("ruled_mesh: curves do not share their end points");
  }
  if (rows <= 0) rows = std::max(2, samples / 4);
  const int n = samples;
  const auto a = resample_count(c1, n);
  auto b = resample_count(c2, n);
  b.front() = a.front();
  b.back() = a.back();

  TriMesh mesh;
  // Column 0 and column n-1 are single vertices; columns 1..n-2 have rows+1 vertices.
  std::vector<std::vector<int>> id(n, std::vector<int>(rows + 1));
  auto add = [&](const Vec3& p, bool fixed) {
    mesh.vertices.push_back(p);
    mesh.boundary.push_back(fixed);
    return static_cast<int>(mesh.vertices.size()) - 1;
  };
  const int first = add(a.front(), true);
  std::fill(id[0].begin(), id[0].end(), first);
  for (int i = 1; i < n - 1; ++i)
    for (int j = 0; j <= rows; ++j) {
      const double t = static_cast<double>(j) / rows;
      id[i][j] = add((1.0 - t) * a[i] + t * b[i], j == 0 || j == rows);
    }
  const int last = add(a.back(), true);
  std::fill(id[n - 1].begin(), id[n - 1].end(), last);

  for (int i = 0; i + 1 < n; ++i)
    for (int j = 0; j < rows; ++j) {
      const int p = id[i][j], q = id[i + 1][j], r = id[i + 1][j + 1], s = id[i][j + 1];
      if (i == 0) {
        mesh.triangles.push_back({p, q, r});
      } else if (i + 1 == n - 1) {
        mesh.triangles.push_back({p, q, s});
      } else {
        mesh.triangles.push_back({p, q, r});
        mesh.triangles.push_back({p, r, s});
      }
    }
  return mesh;
}

SurfaceResult min_surface_area(const std::vector<Vec3>& c1, const std::vector<Vec3>& c2,
                               const SurfaceOptions& options) {
  SurfaceResult out;
  out.mesh = ruled_mesh(c1, c2, options.samples, options.rows);
  auto& v = out.mesh.vertices;
  const auto& tris = out.mesh.triangles;
  double area = mesh_area(v, tris);
  out.history.push_back(area);

  const int nv = static_cast<int>(v.size());
  std::vector<int> unknown(nv, -1);
  int nu = 0;
  for (int i = 0; i < nv; ++i)
    if (!out.mesh.boundary[i]) unknown[i] = nu++;

  auto count_degenerate = [&] {
    int d = 0;
    for (const auto& t : tris)
      if (triangle_area(v[t[0]], v[t[1]], v[t[2]]) < kDegenerateArea) ++d;
    return d;
  };

  if (area >= kDegenerateArea && nu > 0) {
    std::vector<Vec3> trial(nv);
    for (int it = 0; it < options.max_iter; ++it) {
      // Cotangent Laplacian of the current mesh (weights clamped positive so
      // the interior system stays definite); degenerate triangles carry no weight.
      std::vector<Eigen::Triplet<double>> trip;
      Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(nu, 3);
      std::vector<double> diag(nu, 0.0);
      for (const auto& t : tris) {
        if (triangle_area(v[t[0]], v[t[1]], v[t[2]]) < kDegenerateArea) continue;
        for (int k = 0; k < 3; ++k) {
          const int i = t[(k + 1) % 3], j = t[(k + 2) % 3], o = t[k];
          const double w = std::max(0.5 * cot(v[i] - v[o], v[j] - v[o]), 1e-8);
          for (auto [p, q] : {std::pair{i, j}, std::pair{j, i}}) {
            if (unknown[p] < 0) continue;
            diag[unknown[p]] += w;
            if (unknown[q] >= 0) {
              trip.emplace_back(unknown[p], unknown[q], -w);
            } else {
              rhs(unknown[p], 0) += w * v[q].x;
              rhs(unknown[p], 1) += w * v[q].y;
              rhs(unknown[p], 2) += w * v[q].z;
            }
          }
        }
      }
      for (int i = 0; i < nu; ++i) trip.emplace_back(i, i, diag[i] + 1e-12);
      Eigen::SparseMatrix<double> L(nu, nu);
      L.setFromTriplets(trip.begin(), trip.end());
      Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(L);

      std::vector<Vec3> dir(nv);
      if (solver.info() == Eigen::Success) {
        const Eigen::MatrixXd x = solver.solve(rhs);
        for (int i = 0; i < nv; ++i)
          if (unknown[i] >= 0) dir[i] = Vec3{x(unknown[i], 0), x(unknown[i], 1), x(unknown[i], 2)} - v[i];
      }

      auto line_search = [&](const std::vector<Vec3>& d, double step) -> double {
        for (int h = 0; h < 40; ++h, step *= 0.5) {
          for (int i = 0; i < nv; ++i) trial[i] = v[i] + step * d[i];
          const double a = mesh_area(trial, tris);
          if (a < area) return a;
        }
        return -1.0;
      };

      double next = line_search(dir, 1.0);
      if (next < 0) {
        // Gradient fallback, scaled by one third of the incident area per vertex.
        const auto g = area_gradient(v, tris);
        std::vector<double> mass(nv, 0.0);
        double edge2 = 0.0;
        for (const auto& t : tris) {
          const double a = triangle_area(v[t[0]], v[t[1]], v[t[2]]) / 3.0;
          for (int k = 0; k < 3; ++k) mass[t[k]] += a;
          edge2 += dot(v[t[1]] - v[t[0]], v[t[1]] - v[t[0]]);
        }
        edge2 /= static_cast<double>(tris.size());
        std::vector<Vec3> d(nv);
        for (int i = 0; i < nv; ++i)
          if (unknown[i] >= 0 && mass[i] > 0) d[i] = -1.0 * g[i] / mass[i];
        next = line_search(d, edge2);
      }
      if (next < 0) break;
      v.swap(trial);
      const double rel = (area - next) / area;
      area = next;
      out.history.push_back(area);
      out.iterations = it + 1;
      if (rel < options.tol || area < kDegenerateArea) break;
    }
  }

  out.area = area;
  out.degenerate_triangles = count_degenerate();
  out.degenerate_warning = out.degenerate_triangles * 2 > static_cast<int>(tris.size());
  return out;
}

double msmo(double area, double min_area) {
  if (area < 0.0) throw InvalidArgument("msmo: negative area");
  if (area < min_area) return std::numeric_limits<double>::infinity();
  return 1.0 / area;
}

void write_obj(const TriMesh& mesh, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.precision(17);
  for (const auto& p : mesh.vertices) out << "v " << p.x << ' ' << p.y << ' ' << p.z << '\n';
  for (const auto& t : mesh.triangles) out << "f " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
}

}  // namespace ogmc
