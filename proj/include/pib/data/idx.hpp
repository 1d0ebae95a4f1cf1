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

#include <zlib.h>

#include <cstdint>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include "pib/core/errors.hpp"
#include "pib/data/dataset.hpp"

namespace pib {

inline constexpr std::uint32_t kIdxLabelsMagic = 0x00000801;
inline constexpr std::uint32_t kIdxImagesMagic = 0x00000803;

// Unsigned-byte IDX tensor: big-endian magic (0x0000 08 <ndim>), ndim
// big-endian uint32 dimensions, then the row-major payload.
struct IdxArray {
  std::uint32_t magic = 0;
  std::vector<std::uint32_t> dims;
  std::vector<std::uint8_t> payload;

  std::size_t element_count() const {
    std::size_t n = 1;
    for (auto d : dims) n *= d;
    return n;
  }
};

namespace detail {

struct GzCloser {
  void operator()(gzFile f) const { gzclose(f); }
};

inline std::uint32_t read_be32(gzFile f, const std::string& path,
                               const std::string& field) {
  unsigned char b[4];
  if (gzread(f, b, 4) != 4)
    throw ParseError(path + ": truncated while reading " + field);
  return (std::uint32_t{b[0]} << 24) | (std::uint32_t{b[1]} << 16) |
         (std::uint32_t{b[2]} << 8) | std::uint32_t{b[3]};
}

inline void put_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

inline bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() &&
         s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace detail

// Reads an IDX file; gzip-compressed files are decompressed transparently.
inline IdxArray read_idx(const std::string& path) {
  std::unique_ptr<gzFile_s, detail::GzCloser> f(gzopen(path.c_str(), "rb"));
  if (!f) throw ParseError(path + ": cannot open");
  IdxArray a;
  a.magic = detail::read_be32(f.get(), path, "magic");
  if ((a.magic >> 8) != 0x08)
    throw ParseError(path + ": magic " + std::to_string(a.magic) +
                     " is not an unsigned-byte IDX header");
  const std::uint32_t ndim = a.magic & 0xffu;
  if (ndim == 0) throw ParseError(path + ": magic declares zero dimensions");
  for (std::uint32_t d = 0; d < ndim; ++d)
    a.dims.push_back(
        detail::read_be32(f.get(), path, "dimension " + std::to_string(d)));
  a.payload.resize(a.element_count());
  std::size_t got = 0;
  while (got < a.payload.size()) {
    const auto chunk = static_cast<unsigned>(
        std::min<std::size_t>(a.payload.size() - got, 1u << 30));
    const int r = gzread(f.get(), a.payload.data() + got, chunk);
    if (r <= 0) break;
    got += static_cast<std::size_t>(r);
  }
  if (got != a.payload.size())
    throw ParseError(path + ": payload truncated (" + std::to_string(got) +
                     " of " + std::to_string(a.payload.size()) + " bytes)");
  return a;
}

// Writes an IDX file, gzip-compressed when the path ends in ".gz".
inline void write_idx(const std::string& path, const IdxArray& a) {
  if (a.payload.size() != a.element_count())
    throw ShapeError("idx payload size does not match its dimensions");
  std::vector<std::uint8_t> bytes;
  bytes.reserve(4 + 4 * a.dims.size() + a.payload.size());
  detail::put_be32(bytes, a.magic);
  for (auto d : a.dims) detail::put_be32(bytes, d);
  bytes.insert(bytes.end(), a.payload.begin(), a.payload.end());
  if (detail::ends_with(path, ".gz")) {
    std::unique_ptr<gzFile_s, detail::GzCloser> f(gzopen(path.c_str(), "wb"));
    if (!f || gzwrite(f.get(), bytes.data(), static_cast<unsigned>(bytes.size())) !=
                  static_cast<int>(bytes.size()))
      throw ParseError(path + ": write failed");
    return;
  }
  std::ofstream out(path, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw ParseError(path + ": write failed");
}

// MNIST-style image/label pair. Pixels are scaled to [0, 1] by 1/255.
inline Dataset load_idx(const std::string& images_path,
                        const std::string& labels_path, int num_classes = 10) {
  const IdxArray img = read_idx(images_path);
  const IdxArray lab = read_idx(labels_path);
  if (img.magic != kIdxImagesMagic)
    throw ParseError(images_path + ": images magic must be 0x00000803");
  if (lab.magic != kIdxLabelsMagic)
    throw ParseError(labels_path + ": labels magic must be 0x00000801");
  if (img.dims[0] != lab.dims[0])
    throw ParseError("count mismatch: " + std::to_string(img.dims[0]) +
                     " images vs " + std::to_string(lab.dims[0]) + " labels");
  const auto n = static_cast<Index>(img.dims[0]);
  if (n == 0) throw ParseError(images_path + ": zero images");
  const auto d = static_cast<Index>(img.element_count() / img.dims[0]);

  RowMatrix x(n, d);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < d; ++j)
      x(i, j) = img.payload[static_cast<std::size_t>(i * d + j)] / 255.0;
  std::vector<int> y(static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < y.size(); ++i) {
    y[i] = lab.payload[i];
    if (y[i] >= num_classes)
      throw ParseError(labels_path + ": label byte " + std::to_string(y[i]) +
                       " at index " + std::to_string(i) + " exceeds " +
                       std::to_string(num_classes - 1));
  }
  return Dataset(std::move(x), std::move(y), num_classes);
}

}  // namespace pib
