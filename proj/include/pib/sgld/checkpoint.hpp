// Copyright 2026 The pibnet Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "pib/core/errors.hpp"
#include "pib/core/types.hpp"

namespace pib {

// Flat little-endian file: u64 D, D f64 values, u64 iteration.
struct Checkpoint {
  ParamVector params;
  std::uint64_t iteration = 0;
};

namespace detail {

inline void put_le64(std::vector<unsigned char>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<unsigned char>(v >> (8 * i)));
}

inline std::uint64_t get_le64(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}

}  // namespace detail

inline void write_checkpoint(const std::string& path, const Checkpoint& c) {
  std::vector<unsigned char> bytes;
  bytes.reserve(static_cast<std::size_t>(16 + 8 * c.params.size()));
  detail::put_le64(bytes, static_cast<std::uint64_t>(c.params.size()));
  for (Index i = 0; i < c.params.size(); ++i)
    detail::put_le64(bytes, std::bit_cast<std::uint64_t>(c.params[i]));
  detail::put_le64(bytes, c.iteration);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open checkpoint '" + path + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("failed writing checkpoint '" + path + "'");
}

inline Checkpoint read_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open checkpoint '" + path + "'");
  const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                         std::istreambuf_iterator<char>());
  if (bytes.size() < 16) throw ParseError("checkpoint '" + path + "' is truncated");
  const std::uint64_t d = detail::get_le64(bytes.data());
  if (d > (bytes.size() - 16) / 8 || bytes.size() != 16 + 8 * d)
    throw ParseError("checkpoint '" + path + "' has inconsistent length");
  Checkpoint c;
  c.params.resize(static_cast<Index>(d));
  for (std::uint64_t i = 0; i < d; ++i)
    c.params[static_cast<Index>(i)] =
        std::bit_cast<double>(detail::get_le64(bytes.data() + 8 + 8 * i));
  c.iteration = detail::get_le64(bytes.data() + 8 + 8 * d);
  return c;
}

}  // namespace pib
