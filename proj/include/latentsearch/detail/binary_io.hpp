// Copyright 2026-present the latentsearch project
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Little-endian primitive encoding shared by the EMB1, AEM1 and HNW1 formats.

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <type_traits>

#include "latentsearch/error.hpp"

namespace latentsearch::detail {

template <typename T>
  requires std::is_unsigned_v<T>
void put_le(std::ostream& out, T value) {
  std::array<char, sizeof(T)> bytes{};
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    bytes[i] = static_cast<char>((value >> (8 * i)) & 0xFFu);
  }
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

inline void put_f32(std::ostream& out, float v) {
  put_le(out, std::bit_cast<std::uint32_t>(v));
}
inline void put_f64(std::ostream& out, double v) {
  put_le(out, std::bit_cast<std::uint64_t>(v));
}
inline void put_i32(std::ostream& out, std::int32_t v) {
  put_le(out, static_cast<std::uint32_t>(v));
}

/// Reads exactly sizeof(T) bytes or throws FormatError naming `what`.
template <typename T>
  requires std::is_unsigned_v<T>
T get_le(std::istream& in, std::string_view what) {
  std::array<unsigned char, sizeof(T)> bytes{};
  in.read(reinterpret_cast<char*>(bytes.data()),
          static_cast<std::streamsize>(bytes.size()));
  if (in.gcount() != static_cast<std::streamsize>(bytes.size())) {
    throw FormatError("truncated input while reading " + std::string(what));
  }
  T value = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    value |= static_cast<T>(static_cast<T>(bytes[i]) << (8 * i));
  }
  return value;
}

inline float get_f32(std::istream& in, std::string_view what) {
  return std::bit_cast<float>(get_le<std::uint32_t>(in, what));
}
inline double get_f64(std::istream& in, std::string_view what) {
  return std::bit_cast<double>(get_le<std::uint64_t>(in, what));
}
inline std::int32_t get_i32(std::istream& in, std::string_view what) {
  return static_cast<std::int32_t>(get_le<std::uint32_t>(in, what));
}

inline void put_magic(std::ostream& out, std::string_view magic) {
  out.write(magic.data(), static_cast<std::streamsize>(magic.size()));
}

/// Throws FormatError("not <magic>") when the next four bytes differ.
inline void expect_magic(std::istream& in, std::string_view magic) {
  std::array<char, 4> bytes{};
  in.read(bytes.data(), 4);
  if (in.gcount() != 4 || std::string_view(bytes.data(), 4) != magic) {
    throw FormatError("not " + std::string(magic));
  }
}

}  // namespace latentsearch::detail
