#pragma once

// Little-endian scalar serialization shared by the binary file writers.
// Explicit byte assembly keeps the formats stable across host endianness.

#include <bit>
#include <cstdint>
#include <istream>
#include <ostream>

namespace sdigs {
namespace wire {

inline void put_u8(std::ostream& out, uint8_t v) {
  out.put(static_cast<char>(v));
}

inline void put_u32le(std::ostream& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) put_u8(out, static_cast<uint8_t>(v >> (8 * i)));
}

inline void put_u64le(std::ostream& out, uint64_t v) {
  for (int i = 0; i < 8; ++i) put_u8(out, static_cast<uint8_t>(v >> (8 * i)));
}

inline void put_f32le(std::ostream& out, float v) {
  put_u32le(out, std::bit_cast<uint32_t>(v));
}

inline void put_f64le(std::ostream& out, double v) {
  put_u64le(out, std::bit_cast<uint64_t>(v));
}

inline uint8_t get_u8(std::istream& in) {
  return static_cast<uint8_t>(in.get());
}

inline uint32_t get_u32le(std::istream& in) {
  uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(get_u8(in)) << (8 * i);
  return v;
}

inline uint64_t get_u64le(std::istream& in) {
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(get_u8(in)) << (8 * i);
  return v;
}

inline float get_f32le(std::istream& in) {
  return std::bit_cast<float>(get_u32le(in));
}

inline double get_f64le(std::istream& in) {
  return std::bit_cast<double>(get_u64le(in));
}

}  // namespace wire
}  // namespace sdigs
