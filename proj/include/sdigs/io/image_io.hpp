#pragma once

#include "sdigs/core/types.hpp"
#include "sdigs/mdbscan/segment.hpp"

#include <string>

namespace sdigs {

// 8-bit RGB PNG. Values are clamped to [0, 1] and quantized with round half
// away from zero, so images already on the 1/255 grid round-trip losslessly.
void write_png(const std::string& path, const Image& image);

// Reads any libpng-supported color layout and normalizes it to 8-bit RGB.
// Throws DataError for unreadable or malformed files.
Image read_png(const std::string& path);

// Segmentation maps travel as 16-bit grayscale PNG (pixel value = label)
// plus a sidecar text file `<path>.meta` holding `num_segments=<n>`.
// Throws DataError when the map holds more than 65535 segments.
void write_segmentation_png(const std::string& path,
                            const SegmentationMap& map);
SegmentationMap read_segmentation_png(const std::string& path);

}  // namespace sdigs
