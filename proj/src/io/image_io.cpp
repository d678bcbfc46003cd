#include "sdigs/io/image_io.hpp"

#include "sdigs/core/error.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

namespace sdigs {
namespace {

// RAII around FILE* so the libpng setjmp exits below never leak the handle.
struct FileHandle {
  FILE* f = nullptr;
  explicit FileHandle(const std::string& path, const char* mode)
      : f(std::fopen(path.c_str(), mode)) {}
  ~FileHandle() {
    if (f) std::fclose(f);
  }
  FileHandle(const FileHandle&) = delete;
  FileHandle& operator=(const FileHandle&) = delete;
};

uint8_t to_byte(double v) {
  const double c = std::clamp(v, 0.0, 1.0);
  return static_cast<uint8_t>(std::llround(c * 255.0));
}

// Quiet handlers: errors unwind through setjmp and surface as DataError;
// libpng's default handler would chatter on stderr first.
void quiet_error(png_structp png, png_const_charp) { png_longjmp(png, 1); }
void quiet_warning(png_structp, png_const_charp) {}

png_structp create_read_struct() {
  return png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, quiet_error,
                                quiet_warning);
}

png_structp create_write_struct() {
  return png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, quiet_error,
                                 quiet_warning);
}

}  // namespace

void write_png(const std::string& path, const Image& image) {
  if (image.width <= 0 || image.height <= 0)
    throw UsageError("write_png: empty image");
  FileHandle file(path, "wb");
  if (!file.f) throw DataError("write_png: cannot open " + path);

  png_structp png =
      create_write_struct();
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw DataError("write_png: libpng initialization failed");
  }

  // Rows are prepared before the setjmp frame; the longjmp path only cleans
  // up libpng state and throws, normal unwinding handles the vectors.
  std::vector<uint8_t> bytes(static_cast<size_t>(image.width) * image.height * 3);
  for (size_t i = 0; i < bytes.size(); ++i) bytes[i] = to_byte(image.data[i]);
  std::vector<png_bytep> rows(image.height);
  for (int y = 0; y < image.height; ++y)
    rows[y] = bytes.data() + static_cast<size_t>(y) * image.width * 3;

  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw DataError("write_png: libpng error writing " + path);
  }
  png_init_io(png, file.f);
  png_set_IHDR(png, info, image.width, image.height, 8, PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

Image read_png(const std::string& path) {
  FileHandle file(path, "rb");
  if (!file.f) throw DataError("read_png: cannot open " + path);

  png_structp png =
      create_read_struct();
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw DataError("read_png: libpng initialization failed");
  }

  std::vector<uint8_t> bytes;
  std::vector<png_bytep> rows;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw DataError("read_png: malformed PNG " + path);
  }
  png_init_io(png, file.f);
  png_read_info(png, info);

  // Normalize every layout to tightly packed 8-bit RGB.
  png_set_palette_to_rgb(png);
  png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  png_set_strip_16(png);
  png_set_strip_alpha(png);
  png_set_gray_to_rgb(png);
  png_read_update_info(png, info);

  const int width = static_cast<int>(png_get_image_width(png, info));
  const int height = static_cast<int>(png_get_image_height(png, info));
  if (png_get_rowbytes(png, info) != static_cast<size_t>(width) * 3) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw DataError("read_png: unexpected row layout in " + path);
  }
  bytes.resize(static_cast<size_t>(width) * height * 3);
  rows.resize(height);
  for (int y = 0; y < height; ++y)
    rows[y] = bytes.data() + static_cast<size_t>(y) * width * 3;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  Image image(width, height);
  for (size_t i = 0; i < bytes.size(); ++i)
    image.data[i] = static_cast<double>(bytes[i]) / 255.0;
  return image;
}

void write_segmentation_png(const std::string& path,
                            const SegmentationMap& map) {
  if (map.width <= 0 || map.height <= 0 ||
      map.labels.size() != static_cast<size_t>(map.width) * map.height)
    throw UsageError("write_segmentation_png: inconsistent map");
  if (map.num_segments > 65535)
    throw DataError("write_segmentation_png: more than 65535 segments");
  for (int32_t label : map.labels)
    if (label < 0 || label >= map.num_segments)
      throw DataError("write_segmentation_png: label outside [0, segments)");

  FileHandle file(path, "wb");
  if (!file.f) throw DataError("write_segmentation_png: cannot open " + path);
  png_structp png =
      create_write_struct();
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw DataError("write_segmentation_png: libpng initialization failed");
  }

  // PNG 16-bit samples are big-endian on the wire.
  std::vector<uint8_t> bytes(static_cast<size_t>(map.width) * map.height * 2);
  for (size_t i = 0; i < map.labels.size(); ++i) {
    const uint16_t v = static_cast<uint16_t>(map.labels[i]);
    bytes[2 * i] = static_cast<uint8_t>(v >> 8);
    bytes[2 * i + 1] = static_cast<uint8_t>(v & 0xFF);
  }
  std::vector<png_bytep> rows(map.height);
  for (int y = 0; y < map.height; ++y)
    rows[y] = bytes.data() + static_cast<size_t>(y) * map.width * 2;

  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw DataError("write_segmentation_png: libpng error writing " + path);
  }
  png_init_io(png, file.f);
  png_set_IHDR(png, info, map.width, map.height, 16, PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);

  std::ofstream meta(path + ".meta");
  if (!meta) throw DataError("write_segmentation_png: cannot open sidecar");
  meta << "num_segments=" << map.num_segments << "\n";
  if (!meta.flush())
    throw DataError("write_segmentation_png: sidecar write failed");
}

SegmentationMap read_segmentation_png(const std::string& path) {
  FileHandle file(path, "rb");
  if (!file.f) throw DataError("read_segmentation_png: cannot open " + path);
  png_structp png =
      create_read_struct();
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw DataError("read_segmentation_png: libpng initialization failed");
  }

  std::vector<uint8_t> bytes;
  std::vector<png_bytep> rows;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw DataError("read_segmentation_png: malformed PNG " + path);
  }
  png_init_io(png, file.f);
  png_read_info(png, info);
  if (png_get_color_type(png, info) != PNG_COLOR_TYPE_GRAY ||
      png_get_bit_depth(png, info) != 16) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw DataError("read_segmentation_png: expected 16-bit grayscale " + path);
  }
  const int width = static_cast<int>(png_get_image_width(png, info));
  const int height = static_cast<int>(png_get_image_height(png, info));
  bytes.resize(static_cast<size_t>(width) * height * 2);
  rows.resize(height);
  for (int y = 0; y < height; ++y)
    rows[y] = bytes.data() + static_cast<size_t>(y) * width * 2;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  SegmentationMap map;
  map.width = width;
  map.height = height;
  map.labels.resize(static_cast<size_t>(width) * height);
  for (size_t i = 0; i < map.labels.size(); ++i)
    map.labels[i] =
        static_cast<int32_t>((bytes[2 * i] << 8) | bytes[2 * i + 1]);

  std::ifstream meta(path + ".meta");
  if (!meta)
    throw DataError("read_segmentation_png: missing sidecar " + path + ".meta");
  std::string line;
  std::getline(meta, line);
  long long segments = -1;
  if (std::sscanf(line.c_str(), "num_segments=%lld", &segments) != 1 ||
      segments < 0 || segments > 65535)
    throw DataError("read_segmentation_png: bad sidecar line: " + line);
  map.num_segments = static_cast<int32_t>(segments);
  for (int32_t label : map.labels)
    if (label >= map.num_segments)
      throw DataError("read_segmentation_png: label exceeds num_segments");
  return map;
}

}  // namespace sdigs
