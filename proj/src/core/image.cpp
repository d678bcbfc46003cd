#include "sdigs/core/types.hpp"

#include <cmath>

namespace sdigs {

double CameraPose::rotation_defect() const {
  Mat3 gram = rotation.transpose() * rotation;
  double defect = std::abs(rotation.determinant() - 1.0);
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      double target = (r == c) ? 1.0 : 0.0;
      defect = std::max(defect, std::abs(gram(r, c) - target));
    }
  }
  return defect;
}

void PointCloud::append(const DensePointSet& dp) {
  positions.insert(positions.end(), dp.positions.begin(), dp.positions.end());
  colors.insert(colors.end(), dp.colors.begin(), dp.colors.end());
  source_pixels.insert(source_pixels.end(), dp.source_pixels.begin(),
                       dp.source_pixels.end());
  source_views.insert(source_views.end(), dp.positions.size(),
                      static_cast<int32_t>(dp.view_index));
}

PointCloud PointCloud::concatenate(const std::vector<DensePointSet>& sets) {
  PointCloud cloud;
  size_t total = 0;
  for (const auto& s : sets) total += s.size();
  cloud.positions.reserve(total);
  cloud.colors.reserve(total);
  cloud.source_views.reserve(total);
  cloud.source_pixels.reserve(total);
  for (const auto& s : sets) cloud.append(s);
  return cloud;
}

}  // namespace sdigs
