#include "ogmc/morphology.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace ogmc {
namespace {

// One cross6 radius-1 step. `dilation` selects max vs min.
Mask cross_step(const Mask& in, bool dilation) {
  Mask out(in.extent(), in.spacing());
  const auto& e = in.extent();
  for (int z = 0; z < e.nz; ++z)
    for (int y = 0; y < e.ny; ++y)
      for (int x = 0; x < e.nx; ++x) {
        std::uint8_t v = in(x, y, z);
        for (const auto& d : neighbors6()) {
          const std::uint8_t n = in.value_or(x + d.x, y + d.y, z + d.z, 0);
          v = dilation ? std::max(v, n) : std::min(v, n);
        }
        out(x, y, z) = v;
      }
  return out;
}

// Running min/max of radius r along one axis; outside counts as 0.
Mask box_axis(const Mask& in, int axis, int r, bool dilation) {
  Mask out(in.extent(), in.spacing());
  const auto& e = in.extent();
  const int n = axis == 0 ? e.nx : (axis == 1 ? e.ny : e.nz);
  for (int z = 0; z < e.nz; ++z)
    for (int y = 0; y < e.ny; ++y)
      for (int x = 0; x < e.nx; ++x) {
        const int c = axis == 0 ? x : (axis == 1 ? y : z);
        std::uint8_t v = dilation ? 0 : 1;
        for (int k = c - r; k <= c + r; ++k) {
          std::uint8_t s = 0;
          if (k >= 0 && k < n) s = axis == 0 ? in(k, y, z) : (axis == 1 ? in(x, k, z) : in(x, y, k));
          v = dilation ? std::max(v, s) : std::min(v, s);
        }
        out(x, y, z) = v;
      }
  return out;
}

std::vector<double> gaussian_kernel(double sigma_vox) {
  const int r = static_cast<int>(std::ceil(3.0 * sigma_vox));
  std::vector<double> k(2 * r + 1);
  for (int i = -r; i <= r; ++i) k[i + r] = std::exp(-0.5 * (i * i) / (sigma_vox * sigma_vox));
  return k;
}

ScalarVolume smooth_impl(std::vector<double> data, Extent e, Spacing s, double sigma_mm) {
  if (!(sigma_mm >= 0.0)) throw InvalidArgument("gaussian sigma must be >= 0");
  if (sigma_mm > 0.0) {
    std::vector<double> tmp(data.size());
    const int dims[3] = {e.nx, e.ny, e.nz};
    const std::size_t strides[3] = {1, static_cast<std::size_t>(e.nx),
                                    static_cast<std::size_t>(e.nx) * static_cast<std::size_t>(e.ny)};
    for (int axis = 0; axis < 3; ++axis) {
      const auto kernel = gaussian_kernel(sigma_mm / s[axis]);
      const int r = static_cast<int>(kernel.size() / 2);
      const int n = dims[axis];
      const std::size_t stride = strides[axis];
      for (std::size_t i = 0; i < data.size(); ++i) {
        const int c = static_cast<int>((i / stride) % static_cast<std::size_t>(n));
        double acc = 0.0, wsum = 0.0;
        const int lo = std::max(-r, -c), hi = std::min(r, n - 1 - c);
        for (int k = lo; k <= hi; ++k) {
          const double w = kernel[k + r];
          acc += w * data[static_cast<std::size_t>(static_cast<long long>(i) + k * static_cast<long long>(stride))];
          wsum += w;
        }
        tmp[i] = acc / wsum;
      }
      data.swap(tmp);
    }
  }
  std::vector<float> out(data.begin(), data.end());
  return ScalarVolume(e, s, std::move(out));
}

// 1D squared distance transform (Felzenszwalb & Huttenlocher) with sample
// spacing `h`; f holds squared distances (inf for "no site").
void edt_1d(const double* f, double* d, int n, double h, std::vector<int>& v, std::vector<double>& zb) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  const double h2 = h * h;
  int k = 0;
  int first = -1;
  for (int q = 0; q < n; ++q)
    if (f[q] < inf) {
      first = q;
      break;
    }
  if (first < 0) {
    std::fill(d, d + n, inf);
    return;
  }
  v[0] = first;
  zb[0] = -inf;
  zb[1] = inf;
  auto intersect = [&](int q, int p) {
    return ((f[q] + h2 * q * q) - (f[p] + h2 * p * p)) / (2.0 * h2 * (q - p));
  };
  for (int q = first + 1; q < n; ++q) {
    if (!(f[q] < inf)) continue;
    double sp = intersect(q, v[k]);
    while (sp <= zb[k]) {
      --k;
      sp = intersect(q, v[k]);
    }
    ++k;
    v[k] = q;
    zb[k] = sp;
    zb[k + 1] = inf;
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (zb[k + 1] < q) ++k;
    const double dq = h * (q - v[k]);
    d[q] = dq * dq + f[v[k]];
  }
}

}  // namespace

Mask morph(const Mask& vol, MorphOp op, const StructuringElement& se) {
  if (se.radius < 1) throw InvalidArgument("structuring element radius must be positive");
  const bool dilation = op == MorphOp::dilate;
  Mask out = vol;
  if (se.shape == StructuringElement::Shape::cross6) {
    // The L1 ball of radius r is the r-fold Minkowski sum of the unit cross.
    for (int i = 0; i < se.radius; ++i) out = cross_step(out, dilation);
  } else {
    for (int axis = 0; axis < 3; ++axis) out = box_axis(out, axis, se.radius, dilation);
  }
  return out;
}

Mask erode(const Mask& vol, const StructuringElement& se) { return morph(vol, MorphOp::erode, se); }
Mask dilate(const Mask& vol, const StructuringElement& se) { return morph(vol, MorphOp::dilate, se); }

Mask edge_map(const Mask& vol, const StructuringElement& se) {
  const Mask d = dilate(vol, se);
  const Mask e = erode(vol, se);
  Mask out(vol.extent(), vol.spacing());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<std::uint8_t>(d[i] != e[i]);
  return out;
}

ScalarVolume gaussian_smooth(const Mask& vol, double sigma_mm) {
  return smooth_impl(std::vector<double>(vol.values().begin(), vol.values().end()), vol.extent(), vol.spacing(),
                     sigma_mm);
}

ScalarVolume gaussian_smooth(const ScalarVolume& vol, double sigma_mm) {
  return smooth_impl(std::vector<double>(vol.values().begin(), vol.values().end()), vol.extent(), vol.spacing(),
                     sigma_mm);
}

namespace {

// In-place squared EDT of a dense px*py*pz grid holding 0 (sites) or inf.
void squared_edt(std::vector<double>& g, const int dims[3], const Spacing& spacing) {
  const std::size_t strides[3] = {1, static_cast<std::size_t>(dims[0]),
                                  static_cast<std::size_t>(dims[0]) * dims[1]};
  const int maxn = std::max(dims[0], std::max(dims[1], dims[2]));
  std::vector<double> f(maxn), d(maxn), zb(maxn + 1);
  std::vector<int> v(maxn);
  for (int axis = 0; axis < 3; ++axis) {
    const int n = dims[axis];
    const std::size_t stride = strides[axis];
    const double h = spacing[axis];
    const int a1 = (axis + 1) % 3, a2 = (axis + 2) % 3;
    for (int j = 0; j < dims[a2]; ++j)
      for (int i = 0; i < dims[a1]; ++i) {
        const std::size_t base = i * strides[a1] + j * strides[a2];
        for (int q = 0; q < n; ++q) f[q] = g[base + q * stride];
        edt_1d(f.data(), d.data(), n, h, v, zb);
        for (int q = 0; q < n; ++q) g[base + q * stride] = d[q];
      }
  }
}

}  // namespace

ScalarVolume distance_transform(const Mask& vol) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  const auto& e = vol.extent();
  // Pad by one background voxel on every side so the grid border acts as background.
  const int dims[3] = {e.nx + 2, e.ny + 2, e.nz + 2};
  const std::size_t sy = static_cast<std::size_t>(dims[0]), sz = sy * dims[1];
  std::vector<double> g(sz * dims[2], 0.0);
  for (int z = 0; z < e.nz; ++z)
    for (int y = 0; y < e.ny; ++y)
      for (int x = 0; x < e.nx; ++x)
        if (vol(x, y, z)) g[(x + 1) + (y + 1) * sy + (z + 1) * sz] = inf;
  squared_edt(g, dims, vol.spacing());

  ScalarVolume out(e, vol.spacing());
  for (int z = 0; z < e.nz; ++z)
    for (int y = 0; y < e.ny; ++y)
      for (int x = 0; x < e.nx; ++x)
        if (vol(x, y, z)) out(x, y, z) = static_cast<float>(std::sqrt(g[(x + 1) + (y + 1) * sy + (z + 1) * sz]));
  return out;
}

std::vector<double> distance_to_set(const Mask& target) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  const auto& e = target.extent();
  const int dims[3] = {e.nx, e.ny, e.nz};
  std::vector<double> g(target.size());
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = target[i] ? 0.0 : inf;
  squared_edt(g, dims, target.spacing());
  for (auto& v : g) v = std::sqrt(v);
  return g;
}

}  // namespace ogmc
