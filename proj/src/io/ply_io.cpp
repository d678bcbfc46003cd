#include "sdigs/io/ply_io.hpp"

#include "sdigs/core/error.hpp"
#include "../io/wire.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace sdigs {
namespace {

constexpr const char* kCloudProperties[] = {
    "double x",   "double y",    "double z",
    "uchar red",  "uchar green", "uchar blue",
};

constexpr const char* kGaussianProperties[] = {
    "float x",       "float y",       "float z",       "float nx",
    "float ny",      "float nz",      "float f_dc_0",  "float f_dc_1",
    "float f_dc_2",  "float opacity", "float scale_0", "float scale_1",
    "float scale_2", "float rot_0",   "float rot_1",   "float rot_2",
    "float rot_3",
};

void write_ply_header(std::ostream& out, int64_t count, const char* comment,
                      const char* const* properties, size_t n_properties) {
  out << "ply\nformat binary_little_endian 1.0\ncomment " << comment
      << "\nelement vertex " << count << "\n";
  for (size_t i = 0; i < n_properties; ++i)
    out << "property " << properties[i] << "\n";
  out << "end_header\n";
}

// Strict header reader: requires the exact property sequence this writer
// emits (comments are skipped). Returns the vertex count.
int64_t read_ply_header(std::istream& in, const std::string& path,
                        const char* const* properties, size_t n_properties) {
  auto fail = [&](const std::string& why) -> int64_t {
    throw DataError("read ply: " + why + " in " + path);
  };
  std::string line;
  if (!std::getline(in, line) || line != "ply") fail("missing magic");
  if (!std::getline(in, line) || line != "format binary_little_endian 1.0")
    fail("unsupported format");

  int64_t count = -1;
  size_t next_property = 0;
  while (std::getline(in, line)) {
    if (line.rfind("comment", 0) == 0) continue;
    if (line == "end_header") break;
    std::istringstream tokens(line);
    std::string keyword;
    tokens >> keyword;
    if (keyword == "element") {
      std::string name;
      tokens >> name >> count;
      if (name != "vertex" || count < 0 || tokens.fail())
        fail("bad element line: " + line);
    } else if (keyword == "property") {
      std::string rest;
      std::getline(tokens, rest);
      if (!rest.empty() && rest.front() == ' ') rest.erase(0, 1);
      if (next_property >= n_properties || rest != properties[next_property])
        fail("unexpected property: " + line);
      ++next_property;
    } else {
      fail("unexpected header line: " + line);
    }
  }
  if (line != "end_header") fail("missing end_header");
  if (count < 0) fail("missing vertex element");
  if (next_property != n_properties) fail("missing properties");
  return count;
}

uint8_t to_byte(double v) {
  return static_cast<uint8_t>(std::llround(std::clamp(v, 0.0, 1.0) * 255.0));
}

}  // namespace

void write_filtered_ply(const std::string& path, const PointCloud& cloud) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("write_filtered_ply: cannot open " + path);
  write_ply_header(out, static_cast<int64_t>(cloud.size()),
                   "sdigs filtered point cloud", kCloudProperties,
                   std::size(kCloudProperties));
  for (size_t i = 0; i < cloud.size(); ++i) {
    for (int c = 0; c < 3; ++c) wire::put_f64le(out, cloud.positions[i][c]);
    for (int c = 0; c < 3; ++c) wire::put_u8(out, to_byte(cloud.colors[i][c]));
  }
  if (!out.flush()) throw DataError("write_filtered_ply: write failed " + path);
}

PointCloud read_filtered_ply(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("read_filtered_ply: cannot open " + path);
  const int64_t count = read_ply_header(in, path, kCloudProperties,
                                        std::size(kCloudProperties));
  PointCloud cloud;
  cloud.positions.resize(count);
  cloud.colors.resize(count);
  // Provenance does not travel through the PLY; mark it unknown.
  cloud.source_views.assign(count, 0);
  cloud.source_pixels.assign(count, Pixel(-1, -1));
  for (int64_t i = 0; i < count; ++i) {
    for (int c = 0; c < 3; ++c) cloud.positions[i][c] = wire::get_f64le(in);
    for (int c = 0; c < 3; ++c)
      cloud.colors[i][c] = static_cast<double>(wire::get_u8(in)) / 255.0;
  }
  if (!in) throw DataError("read_filtered_ply: truncated payload in " + path);
  return cloud;
}

void write_cluster_counts(const std::string& path,
                          const std::vector<int64_t>& counts) {
  std::ofstream out(path);
  if (!out) throw DataError("write_cluster_counts: cannot open " + path);
  out << "num_clusters=" << counts.size() << "\n";
  for (int64_t c : counts) out << c << "\n";
  if (!out.flush()) throw DataError("write_cluster_counts: write failed");
}

std::vector<int64_t> read_cluster_counts(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("read_cluster_counts: cannot open " + path);
  std::string line;
  std::getline(in, line);
  long long clusters = -1;
  if (std::sscanf(line.c_str(), "num_clusters=%lld", &clusters) != 1 ||
      clusters < 0)
    throw DataError("read_cluster_counts: bad header line: " + line);
  std::vector<int64_t> counts(clusters);
  for (long long i = 0; i < clusters; ++i) {
    if (!(in >> counts[i]))
      throw DataError("read_cluster_counts: truncated counts in " + path);
  }
  return counts;
}

void write_gaussian_ply(const std::string& path, const GaussianSet& gaussians) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("write_gaussian_ply: cannot open " + path);
  write_ply_header(out, gaussians.count, "sdigs gaussian splat model",
                   kGaussianProperties, std::size(kGaussianProperties));
  auto put = [&](double v) { wire::put_f32le(out, static_cast<float>(v)); };
  for (int64_t i = 0; i < gaussians.count; ++i) {
    for (int c = 0; c < 3; ++c) put(gaussians.positions[3 * i + c]);
    for (int c = 0; c < 3; ++c) put(0.0);  // normals, unused
    for (int c = 0; c < 3; ++c) put((gaussians.colors[3 * i + c] - 0.5) / kShC0);
    put(gaussians.opacity_logits[i]);
    for (int c = 0; c < 3; ++c) put(gaussians.log_scales[3 * i + c]);
    for (int c = 0; c < 4; ++c) put(gaussians.rotations[4 * i + c]);
  }
  if (!out.flush()) throw DataError("write_gaussian_ply: write failed " + path);
}

GaussianSet read_gaussian_ply(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("read_gaussian_ply: cannot open " + path);
  const int64_t count = read_ply_header(in, path, kGaussianProperties,
                                        std::size(kGaussianProperties));
  GaussianSet gaussians;
  gaussians.resize(count);
  auto get = [&]() { return static_cast<double>(wire::get_f32le(in)); };
  for (int64_t i = 0; i < count; ++i) {
    for (int c = 0; c < 3; ++c) gaussians.positions[3 * i + c] = get();
    for (int c = 0; c < 3; ++c) get();  // normals, unused
    // Invert the SH mapping without clamping so a rewrite is byte-identical.
    for (int c = 0; c < 3; ++c) gaussians.colors[3 * i + c] = get() * kShC0 + 0.5;
    gaussians.opacity_logits[i] = get();
    for (int c = 0; c < 3; ++c) gaussians.log_scales[3 * i + c] = get();
    for (int c = 0; c < 4; ++c) gaussians.rotations[4 * i + c] = get();
  }
  if (!in) throw DataError("read_gaussian_ply: truncated payload in " + path);
  return gaussians;
}

}  // namespace sdigs
