#pragma once

#include "sdigs/core/types.hpp"
#include "sdigs/splat/gaussians.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace sdigs {

// Filtered point clouds travel as binary little-endian PLY with double
// coordinates (bit-exact round trip) and 8-bit colors:
//   property double x, y, z; property uchar red, green, blue.
void write_filtered_ply(const std::string& path, const PointCloud& cloud);
PointCloud read_filtered_ply(const std::string& path);

// Sidecar of retained-per-cluster counts: one line `num_clusters=<K>`, then
// one count per line in cluster order.
void write_cluster_counts(const std::string& path,
                          const std::vector<int64_t>& counts);
std::vector<int64_t> read_cluster_counts(const std::string& path);

// Gaussian models use the de-facto splat-viewer PLY layout, float32 fields
// x,y,z, nx,ny,nz (zero), f_dc_0..2 (degree-0 SH), opacity (logit),
// scale_0..2 (logs), rot_0..3 (w,x,y,z). Colors map through
// f_dc = (c - 0.5) / SH_C0. The float quantization makes
// write -> read -> write byte-stable after the first write.
inline constexpr double kShC0 = 0.28209479177387814;

void write_gaussian_ply(const std::string& path, const GaussianSet& gaussians);
GaussianSet read_gaussian_ply(const std::string& path);

}  // namespace sdigs
