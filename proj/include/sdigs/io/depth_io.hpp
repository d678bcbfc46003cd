#pragma once

#include <string>
#include <vector>

namespace sdigs {

struct DepthRaster {
  int width = 0, height = 0;
  std::vector<double> values;  // row-major H*W, widened from the f32 payload
};

// Depth rasters are a one-line text header followed by a row-major
// little-endian float32 payload:
//   sdigs-depth 1 width <W> height <H> format f32le\n
void write_depth_raster(const std::string& path,
                        const std::vector<double>& depth, int width,
                        int height);
DepthRaster read_depth_raster(const std::string& path);

}  // namespace sdigs
