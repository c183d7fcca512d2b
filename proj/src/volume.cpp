#include "ogmc/volume.hpp"

#include <algorithm>
#include <vector>

namespace ogmc {

std::size_t count_foreground(const Mask& m) {
  return static_cast<std::size_t>(std::count_if(m.values().begin(), m.values().end(), [](auto v) { return v != 0; }));
}

const std::vector<Voxel>& neighbors26() {
  static const std::vector<Voxel> offsets = [] {
    std::vector<Voxel> out;
    for (int dz = -1; dz <= 1; ++dz)
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx)
          if (dx != 0 || dy != 0 || dz != 0) out.push_back({dx, dy, dz});
    return out;
  }();
  return offsets;
}

const std::vector<Voxel>& neighbors6() {
  static const std::vector<Voxel> offsets = {{-1, 0, 0}, {1, 0, 0}, {0, -1, 0}, {0, 1, 0}, {0, 0, -1}, {0, 0, 1}};
  return offsets;
}

double step_length(const Voxel& d, const Spacing& s) {
  const double x = d.x * s.x, y = d.y * s.y, z = d.z * s.z;
  return std::sqrt(x * x + y * y + z * z);
}

Labeling label_components(const Mask& m, int connectivity) {
  if (connectivity != 6 && connectivity != 26) throw InvalidArgument("connectivity must be 6 or 26");
  const auto& offsets = connectivity == 6 ? neighbors6() : neighbors26();
  Labeling out;
  out.labels.assign(m.size(), 0);
  std::vector<std::size_t> stack;
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (m[i] == 0 || out.labels[i] != 0) continue;
    const int label = ++out.count;
    out.labels[i] = label;
    stack.push_back(i);
    while (!stack.empty()) {
      const Voxel v = m.voxel(stack.back());
      stack.pop_back();
      for (const auto& d : offsets) {
        const Voxel n = v + d;
        if (!m.contains(n)) continue;
        const std::size_t j = m.index(n);
        if (m[j] != 0 && out.labels[j] == 0) {
          out.labels[j] = label;
          stack.push_back(j);
        }
      }
    }
  }
  return out;
}

}  // namespace ogmc
