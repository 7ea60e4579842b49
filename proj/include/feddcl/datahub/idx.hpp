/*
 * Copyright 2026 The FedDCL Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <array>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "feddcl/datahub/table.hpp"

namespace feddcl::datahub {

inline constexpr std::uint32_t kIdxImageMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelMagic = 0x00000801;

namespace detail {

inline std::uint32_t read_be32(std::istream& in, const std::string& path) {
  std::array<unsigned char, 4> b{};
  if (!in.read(reinterpret_cast<char*>(b.data()), 4))
    throw FormatError("IDX: truncated header in '" + path + "'");
  return (std::uint32_t{b[0]} << 24) | (std::uint32_t{b[1]} << 16) |
         (std::uint32_t{b[2]} << 8) | std::uint32_t{b[3]};
}

inline void write_be32(std::ostream& out, std::uint32_t v) {
  const char b[4] = {static_cast<char>(v >> 24), static_cast<char>(v >> 16),
                     static_cast<char>(v >> 8), static_cast<char>(v)};
  out.write(b, 4);
}

}  // namespace detail

/// Loads an IDX image/label pair (MNIST layout). Pixels are scaled to
/// [0, 1] by 1/255 and each image becomes one row of rows*cols features.
/// Labels become one-hot over 10 classes.
inline LabeledTable load_idx_images(const std::string& images_path, const std::string& labels_path,
                                    bool flatten = true) {
  if (!flatten) throw ParameterError("load_idx_images: only flattened images are supported");
  std::ifstream img(images_path, std::ios::binary);
  if (!img) throw IoError("load_idx_images: cannot open '" + images_path + "'");
  std::ifstream lab(labels_path, std::ios::binary);
  if (!lab) throw IoError("load_idx_images: cannot open '" + labels_path + "'");

  if (detail::read_be32(img, images_path) != kIdxImageMagic)
    throw FormatError("IDX: bad image magic in '" + images_path + "'");
  if (detail::read_be32(lab, labels_path) != kIdxLabelMagic)
    throw FormatError("IDX: bad label magic in '" + labels_path + "'");
  const std::uint32_t n = detail::read_be32(img, images_path);
  const std::uint32_t h = detail::read_be32(img, images_path);
  const std::uint32_t w = detail::read_be32(img, images_path);
  const std::uint32_t nl = detail::read_be32(lab, labels_path);
  if (n != nl)
    throw FormatError("IDX: " + std::to_string(n) + " images but " + std::to_string(nl) + " labels");
  if (n == 0 || h == 0 || w == 0) throw FormatError("IDX: empty image set");

  const std::size_t m = std::size_t{h} * w;
  std::vector<unsigned char> pixels(std::size_t{n} * m);
  if (!img.read(reinterpret_cast<char*>(pixels.data()), static_cast<std::streamsize>(pixels.size())))
    throw FormatError("IDX: image payload shorter than header count");
  std::vector<unsigned char> raw_labels(n);
  if (!lab.read(reinterpret_cast<char*>(raw_labels.data()), n))
    throw FormatError("IDX: label payload shorter than header count");

  constexpr std::size_t kClasses = 10;
  LabeledTable t;
  t.x = Mat(n, m);
  for (std::size_t i = 0; i < pixels.size(); ++i) t.x.data()[i] = pixels[i] / 255.0;
  std::vector<std::size_t> ids(raw_labels.begin(), raw_labels.end());
  for (std::size_t id : ids)
    if (id >= kClasses) throw FormatError("IDX: label " + std::to_string(id) + " outside 0..9");
  t.y = one_hot(ids, kClasses);
  t.task = Task::classification(kClasses);
  for (std::size_t k = 0; k < kClasses; ++k) t.class_labels.push_back(std::to_string(k));
  return t;
}

/// Writes an IDX pair; pixels are given as bytes, row-major per image.
inline void save_idx_images(const std::string& images_path, const std::string& labels_path,
                            std::span<const unsigned char> pixels, std::span<const unsigned char> labels,
                            std::uint32_t height, std::uint32_t width) {
  if (pixels.size() != labels.size() * height * width)
    throw ParameterError("save_idx_images: pixel count does not match labels x image size");
  std::ofstream img(images_path, std::ios::binary);
  std::ofstream lab(labels_path, std::ios::binary);
  if (!img || !lab) throw IoError("save_idx_images: cannot write output files");
  detail::write_be32(img, kIdxImageMagic);
  detail::write_be32(img, static_cast<std::uint32_t>(labels.size()));
  detail::write_be32(img, height);
  detail::write_be32(img, width);
  img.write(reinterpret_cast<const char*>(pixels.data()), static_cast<std::streamsize>(pixels.size()));
  detail::write_be32(lab, kIdxLabelMagic);
  detail::write_be32(lab, static_cast<std::uint32_t>(labels.size()));
  lab.write(reinterpret_cast<const char*>(labels.data()), static_cast<std::streamsize>(labels.size()));
}

}  // namespace feddcl::datahub
