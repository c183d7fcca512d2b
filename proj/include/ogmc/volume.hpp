#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ogmc/errors.hpp"
#include "ogmc/vec3.hpp"

namespace ogmc {

struct Extent {
  int nx = 0;
  int ny = 0;
  int nz = 0;

  std::size_t count() const {
    return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny) * static_cast<std::size_t>(nz);
  }
  bool operator==(const Extent&) const = default;
};

/// Physical voxel size in mm along each axis.
struct Spacing {
  double x = 1.0;
  double y = 1.0;
  double z = 1.0;

  double min() const { return std::min(x, std::min(y, z)); }
  double operator[](int axis) const { return axis == 0 ? x : (axis == 1 ? y : z); }
  bool operator==(const Spacing&) const = default;
};

/// Dense axis-aligned 3D grid, x fastest: idx = x + nx * (y + ny * z).
/// Physical coordinates of voxel centers are (x * sx, y * sy, z * sz).
template <typename T>
class Grid {
 public:
  using value_type = T;

  Grid() = default;

  Grid(Extent extent, Spacing spacing, T fill = T{})
      : extent_(check_extent(extent)), spacing_(check_spacing(spacing)), data_(extent.count(), fill) {}

  Grid(Extent extent, Spacing spacing, std::vector<T> data)
      : extent_(check_extent(extent)), spacing_(check_spacing(spacing)), data_(std::move(data)) {
    if (data_.size() != extent_.count()) {
      throw InvalidArgument("grid data length does not match extent");
    }
  }

  const Extent& extent() const { return extent_; }
  const Spacing& spacing() const { return spacing_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  std::size_t index(int x, int y, int z) const {
    return static_cast<std::size_t>(x) +
           static_cast<std::size_t>(extent_.nx) *
               (static_cast<std::size_t>(y) + static_cast<std::size_t>(extent_.ny) * static_cast<std::size_t>(z));
  }
  std::size_t index(const Voxel& v) const { return index(v.x, v.y, v.z); }

  Voxel voxel(std::size_t idx) const {
    const auto nx = static_cast<std::size_t>(extent_.nx);
    const auto ny = static_cast<std::size_t>(extent_.ny);
    return {static_cast<int>(idx % nx), static_cast<int>((idx / nx) % ny), static_cast<int>(idx / (nx * ny))};
  }

  bool contains(int x, int y, int z) const {
    return x >= 0 && y >= 0 && z >= 0 && x < extent_.nx && y < extent_.ny && z < extent_.nz;
  }
  bool contains(const Voxel& v) const { return contains(v.x, v.y, v.z); }

  T& operator()(int x, int y, int z) { return data_[index(x, y, z)]; }
  const T& operator()(int x, int y, int z) const { return data_[index(x, y, z)]; }
  T& operator()(const Voxel& v) { return data_[index(v)]; }
  const T& operator()(const Voxel& v) const { return data_[index(v)]; }
  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  /// Value at (x,y,z), or `outside` when out of bounds.
  T value_or(int x, int y, int z, T outside) const { return contains(x, y, z) ? (*this)(x, y, z) : outside; }

  std::span<T> data() { return data_; }
  std::span<const T> data() const { return data_; }
  const std::vector<T>& values() const { return data_; }

  Vec3 to_mm(const Voxel& v) const { return {v.x * spacing_.x, v.y * spacing_.y, v.z * spacing_.z}; }

  template <typename U>
  bool same_geometry(const Grid<U>& o) const {
    return extent_ == o.extent() && spacing_ == o.spacing();
  }

  bool operator==(const Grid&) const = default;

 private:
  static Extent check_extent(Extent e) {
    if (e.nx <= 0 || e.ny <= 0 || e.nz <= 0) throw InvalidArgument("grid extent must be positive");
    return e;
  }
  static Spacing check_spacing(Spacing s) {
    if (!(s.x > 0.0 && s.y > 0.0 && s.z > 0.0) || !std::isfinite(s.x) || !std::isfinite(s.y) ||
        !std::isfinite(s.z)) {
      throw InvalidArgument("grid spacing must be positive and finite");
    }
    return s;
  }

  Extent extent_{};
  Spacing spacing_{};
  std::vector<T> data_;
};

/// Binary segmentation; voxel values are 0 or 1.
using Mask = Grid<std::uint8_t>;
/// Real-valued field (speeds, arrival times, distances).
using ScalarVolume = Grid<float>;

std::size_t count_foreground(const Mask& m);

/// Throws InvalidArgument unless both volumes share extent and spacing.
template <typename A, typename B>
void require_same_geometry(const Grid<A>& a, const Grid<B>& b, const char* what) {
  if (!a.same_geometry(b)) throw InvalidArgument(std::string(what) + ": volumes differ in extent or spacing");
}

/// The 26 neighbor offsets, ordered by z, then y, then x.
const std::vector<Voxel>& neighbors26();
/// The 6 face-neighbor offsets: -x, +x, -y, +y, -z, +z.
const std::vector<Voxel>& neighbors6();

/// Physical length of one step between 26-adjacent voxels.
double step_length(const Voxel& delta, const Spacing& spacing);

/// Connected-component labels (1-based, 0 = background) in first-voxel
/// raster order. `connectivity` is 6 or 26.
struct Labeling {
  std::vector<std::int32_t> labels;
  int count = 0;
};
Labeling label_components(const Mask& m, int connectivity = 26);

}  // namespace ogmc
