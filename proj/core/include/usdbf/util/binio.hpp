#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <vector>

#include "usdbf/errors.hpp"

// Little-endian scalar I/O, independent of host byte order.

namespace usdbf::binio {

inline void put_bytes(std::ostream& os, const void* p, std::size_t n) {
  os.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
}

inline void get_bytes(std::istream& is, void* p, std::size_t n) {
  is.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(is.gcount()) != n)
    throw TruncatedError("unexpected end of file");
}

inline void put_u16le(std::ostream& os, std::uint16_t v) {
  unsigned char b[2] = {static_cast<unsigned char>(v & 0xff),
                        static_cast<unsigned char>(v >> 8)};
  put_bytes(os, b, 2);
}

inline void put_u32le(std::ostream& os, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  put_bytes(os, b, 4);
}

inline void put_u64le(std::ostream& os, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  put_bytes(os, b, 8);
}

inline void put_f32le(std::ostream& os, float v) {
  put_u32le(os, std::bit_cast<std::uint32_t>(v));
}

inline void put_f64le(std::ostream& os, double v) {
  put_u64le(os, std::bit_cast<std::uint64_t>(v));
}

inline std::uint16_t get_u16le(std::istream& is) {
  unsigned char b[2];
  get_bytes(is, b, 2);
  return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
}

inline std::uint32_t get_u32le(std::istream& is) {
  unsigned char b[4];
  get_bytes(is, b, 4);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}

inline std::uint64_t get_u64le(std::istream& is) {
  unsigned char b[8];
  get_bytes(is, b, 8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

inline float get_f32le(std::istream& is) {
  return std::bit_cast<float>(get_u32le(is));
}

inline double get_f64le(std::istream& is) {
  return std::bit_cast<double>(get_u64le(is));
}

inline void put_f32le_array(std::ostream& os, const std::vector<float>& v) {
  if constexpr (std::endian::native == std::endian::little) {
    put_bytes(os, v.data(), v.size() * sizeof(float));
  } else {
    for (float x : v) put_f32le(os, x);
  }
}

inline void get_f32le_array(std::istream& is, std::vector<float>& v) {
  if constexpr (std::endian::native == std::endian::little) {
    get_bytes(is, v.data(), v.size() * sizeof(float));
  } else {
    for (float& x : v) x = get_f32le(is);
  }
}

}  // namespace usdbf::binio
