#include "sdigs/io/depth_io.hpp"

#include "sdigs/core/error.hpp"
#include "../io/wire.hpp"

#include <cstdio>
#include <fstream>
#include <string>

namespace sdigs {

void write_depth_raster(const std::string& path,
                        const std::vector<double>& depth, int width,
                        int height) {
  if (width <= 0 || height <= 0 ||
      depth.size() != static_cast<size_t>(width) * height)
    throw UsageError("write_depth_raster: dims do not match the payload");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("write_depth_raster: cannot open " + path);

  char header[96];
  std::snprintf(header, sizeof(header),
                "sdigs-depth 1 width %d height %d format f32le\n", width,
                height);
  out << header;
  for (double v : depth) wire::put_f32le(out, static_cast<float>(v));
  if (!out.flush()) throw DataError("write_depth_raster: write failed " + path);
}

DepthRaster read_depth_raster(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("read_depth_raster: cannot open " + path);
  std::string header;
  std::getline(in, header);
  DepthRaster raster;
  if (std::sscanf(header.c_str(), "sdigs-depth 1 width %d height %d format f32le",
                  &raster.width, &raster.height) != 2 ||
      raster.width <= 0 || raster.height <= 0)
    throw DataError("read_depth_raster: bad header in " + path);

  const size_t count = static_cast<size_t>(raster.width) * raster.height;
  raster.values.resize(count);
  for (size_t i = 0; i < count; ++i)
    raster.values[i] = static_cast<double>(wire::get_f32le(in));
  if (!in) throw DataError("read_depth_raster: truncated payload in " + path);
  return raster;
}

}  // namespace sdigs
