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
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>

#include "feddcl/nnet/model.hpp"

namespace feddcl::nnet {

// Layout, all integers little-endian:
//   8 bytes magic "FDCLMLP\0", u32 version, u8 head, u64 init_seed,
//   u64 layer count L, L x u64 sizes, then per layer the weights (row-major)
//   and biases as IEEE-754 bit patterns.
inline constexpr std::array<char, 8> kCheckpointMagic{'F', 'D', 'C', 'L', 'M', 'L', 'P', '\0'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

namespace detail {

inline void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

struct Reader {
  const std::string& buf;
  std::size_t pos = 0;

  std::uint64_t u(int bytes) {
    if (pos + static_cast<std::size_t>(bytes) > buf.size()) throw FormatError("checkpoint: truncated");
    std::uint64_t v = 0;
    for (int i = 0; i < bytes; ++i)
      v |= std::uint64_t{static_cast<unsigned char>(buf[pos + static_cast<std::size_t>(i)])} << (8 * i);
    pos += static_cast<std::size_t>(bytes);
    return v;
  }
  double f() { return std::bit_cast<double>(u(8)); }
};

}  // namespace detail

inline std::string serialize_model(const MlpModel& m) {
  m.validate();
  std::string out(kCheckpointMagic.begin(), kCheckpointMagic.end());
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((kCheckpointVersion >> (8 * i)) & 0xff));
  out.push_back(static_cast<char>(m.head));
  detail::put_u64(out, m.init_seed);
  detail::put_u64(out, m.layer_sizes.size());
  for (std::size_t s : m.layer_sizes) detail::put_u64(out, s);
  for (std::size_t l = 0; l < m.num_layers(); ++l) {
    for (double v : m.weights[l].data()) detail::put_u64(out, std::bit_cast<std::uint64_t>(v));
    for (double v : m.biases[l]) detail::put_u64(out, std::bit_cast<std::uint64_t>(v));
  }
  return out;
}

inline MlpModel deserialize_model(const std::string& buf) {
  if (buf.size() < 8 || std::memcmp(buf.data(), kCheckpointMagic.data(), 8) != 0)
    throw FormatError("checkpoint: bad magic");
  detail::Reader r{buf, 8};
  const auto version = r.u(4);
  if (version != kCheckpointVersion)
    throw FormatError("checkpoint: unsupported version " + std::to_string(version));
  const auto head = r.u(1);
  if (head > 1) throw FormatError("checkpoint: unknown head " + std::to_string(head));
  MlpModel m;
  m.head = static_cast<Head>(head);
  m.init_seed = r.u(8);
  const auto count = r.u(8);
  if (count < 2 || count > 1024) throw FormatError("checkpoint: implausible layer count");
  for (std::uint64_t i = 0; i < count; ++i) m.layer_sizes.push_back(static_cast<std::size_t>(r.u(8)));
  for (std::size_t l = 0; l + 1 < m.layer_sizes.size(); ++l) {
    const std::size_t fi = m.layer_sizes[l], fo = m.layer_sizes[l + 1];
    if (fi == 0 || fo == 0 || (buf.size() - r.pos) / 8 < fi * fo + fo)
      throw FormatError("checkpoint: truncated");
    Mat w(fi, fo);
    for (double& v : w.data()) v = r.f();
    std::vector<double> b(fo);
    for (double& v : b) v = r.f();
    m.weights.push_back(std::move(w));
    m.biases.push_back(std::move(b));
  }
  if (r.pos != buf.size()) throw FormatError("checkpoint: trailing bytes");
  try {
    m.validate();
  } catch (const Error& e) {
    throw FormatError(std::string("checkpoint: ") + e.what());
  }
  return m;
}

inline void save_checkpoint(const MlpModel& m, const std::string& path) {
  const std::string bytes = serialize_model(m);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("save_checkpoint: cannot write '" + path + "'");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("save_checkpoint: write failed for '" + path + "'");
}

inline MlpModel load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("load_checkpoint: cannot open '" + path + "'");
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize_model(bytes);
}

}  // namespace feddcl::nnet
