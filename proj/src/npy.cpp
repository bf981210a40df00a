/*
 * Copyright 2026 The msfi-eval Authors.
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

#include "msfi/npy.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

namespace msfi {

static_assert(std::endian::native == std::endian::little,
              "NPY payloads are read and written as little-endian");

std::string shape_to_string(const Shape& shape) {
  std::string out = "(";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out += ", ";
    out += std::to_string(shape[i]);
  }
  return out + ")";
}

namespace {

constexpr char kMagic[] = "\x93NUMPY";
constexpr std::size_t kMagicLen = 6;
constexpr std::size_t kPreludeLen = 10;  // magic + version + header length

const char* descr_of(NpyDtype dtype) {
  switch (dtype) {
    case NpyDtype::kFloat32: return "<f4";
    case NpyDtype::kFloat64: return "<f8";
    case NpyDtype::kUint8: return "|u1";
    case NpyDtype::kBool: return "|b1";
  }
  return "";
}

std::size_t itemsize(NpyDtype dtype) {
  switch (dtype) {
    case NpyDtype::kFloat32: return 4;
    case NpyDtype::kFloat64: return 8;
    default: return 1;
  }
}

std::string shape_tuple(const Shape& shape) {
  std::string out = "(";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    out += std::to_string(shape[i]);
    out += (shape.size() == 1 || i + 1 < shape.size()) ? "," : "";
    if (i + 1 < shape.size()) out += " ";
  }
  return out + ")";
}

void write_raw(const std::filesystem::path& path, NpyDtype dtype, const Shape& shape,
               const void* payload, std::size_t payload_bytes) {
  std::string dict = "{'descr': '" + std::string(descr_of(dtype)) +
                     "', 'fortran_order': False, 'shape': " + shape_tuple(shape) + ", }";
  // Pad with spaces so the payload starts on a 64-byte boundary; the header
  // always ends with a newline.
  std::size_t total = kPreludeLen + dict.size() + 1;
  dict.append((64 - total % 64) % 64, ' ');
  dict.push_back('\n');
  if (dict.size() > 0xFFFF) throw DataError("NPY header too long for v1.0: " + path.string());

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open for writing: " + path.string());
  const auto header_len = static_cast<std::uint16_t>(dict.size());
  out.write(kMagic, kMagicLen);
  out.put(1);
  out.put(0);
  out.put(static_cast<char>(header_len & 0xFF));
  out.put(static_cast<char>(header_len >> 8));
  out.write(dict.data(), static_cast<std::streamsize>(dict.size()));
  out.write(static_cast<const char*>(payload), static_cast<std::streamsize>(payload_bytes));
  if (!out) throw DataError("write failed: " + path.string());
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("missing file: " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Pulls the value following `'key':` out of the header dict text.
std::string dict_value(const std::string& dict, const std::string& key) {
  const std::string needle = "'" + key + "'";
  auto pos = dict.find(needle);
  if (pos == std::string::npos) throw DataError("NPY header lacks '" + key + "'");
  pos = dict.find(':', pos + needle.size());
  if (pos == std::string::npos) throw DataError("NPY header malformed near '" + key + "'");
  ++pos;
  while (pos < dict.size() && dict[pos] == ' ') ++pos;
  if (pos >= dict.size()) throw DataError("NPY header malformed near '" + key + "'");
  std::size_t end;
  if (dict[pos] == '\'') {
    end = dict.find('\'', pos + 1);
    if (end == std::string::npos) throw DataError("NPY header malformed");
    return dict.substr(pos + 1, end - pos - 1);
  }
  if (dict[pos] == '(') {
    end = dict.find(')', pos);
    if (end == std::string::npos) throw DataError("NPY header malformed");
    return dict.substr(pos, end - pos + 1);
  }
  end = dict.find_first_of(",}", pos);
  return dict.substr(pos, end - pos);
}

Shape parse_shape(const std::string& tuple) {
  Shape shape;
  std::string inner = tuple.substr(1, tuple.size() - 2);
  std::stringstream ss(inner);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto first = item.find_first_not_of(' ');
    if (first == std::string::npos) continue;
    std::size_t pos = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(item.substr(first), &pos);
    } catch (const std::exception&) {
      throw DataError("NPY shape malformed: " + tuple);
    }
    shape.push_back(static_cast<std::size_t>(v));
  }
  return shape;
}

template <typename Out>
Tensor<Out> decode(const std::string& bytes, const std::filesystem::path& path) {
  NpyHeader h;
  try {
    h = parse_npy_header(bytes);
  } catch (const DataError& e) {
    throw DataError(std::string(e.what()) + " (" + path.string() + ")");
  }
  const std::size_t n = shape_size(h.shape);
  const std::size_t need = n * itemsize(h.dtype);
  if (bytes.size() - h.payload_offset != need) {
    throw DataError("corrupt NPY file (payload " +
                    std::to_string(bytes.size() - h.payload_offset) + " bytes, expected " +
                    std::to_string(need) + "): " + path.string());
  }
  const char* p = bytes.data() + h.payload_offset;
  std::vector<Out> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    switch (h.dtype) {
      case NpyDtype::kFloat32: {
        float v;
        std::memcpy(&v, p + 4 * i, 4);
        out[i] = static_cast<Out>(v);
        break;
      }
      case NpyDtype::kFloat64: {
        double v;
        std::memcpy(&v, p + 8 * i, 8);
        out[i] = static_cast<Out>(v);
        break;
      }
      default:
        out[i] = static_cast<Out>(static_cast<unsigned char>(p[i]));
    }
  }
  return Tensor<Out>(h.shape, std::move(out));
}

}  // namespace

NpyHeader parse_npy_header(const std::string& bytes) {
  if (bytes.size() < kPreludeLen || bytes.compare(0, kMagicLen, kMagic, kMagicLen) != 0) {
    throw DataError("not an NPY file (bad magic)");
  }
  if (bytes[6] != 1) throw DataError("unsupported NPY version " + std::to_string(bytes[6]));
  const std::size_t header_len = static_cast<unsigned char>(bytes[8]) |
                                 (static_cast<std::size_t>(static_cast<unsigned char>(bytes[9])) << 8);
  if (bytes.size() < kPreludeLen + header_len) throw DataError("corrupt NPY file (truncated header)");
  const std::string dict = bytes.substr(kPreludeLen, header_len);

  NpyHeader h;
  const std::string descr = dict_value(dict, "descr");
  if (descr == "<f4") h.dtype = NpyDtype::kFloat32;
  else if (descr == "<f8") h.dtype = NpyDtype::kFloat64;
  else if (descr == "|u1" || descr == "<u1") h.dtype = NpyDtype::kUint8;
  else if (descr == "|b1") h.dtype = NpyDtype::kBool;
  else throw DataError("unsupported NPY dtype '" + descr + "'");
  if (dict_value(dict, "fortran_order") != "False") {
    throw DataError("Fortran-ordered NPY arrays are not supported");
  }
  h.shape = parse_shape(dict_value(dict, "shape"));
  h.payload_offset = kPreludeLen + header_len;
  return h;
}

void write_npy(const std::filesystem::path& path, const Tensor<float>& array) {
  write_raw(path, NpyDtype::kFloat32, array.shape(), array.values().data(), array.size() * 4);
}

void write_npy(const std::filesystem::path& path, const Tensor<double>& array) {
  write_raw(path, NpyDtype::kFloat64, array.shape(), array.values().data(), array.size() * 8);
}

void write_npy(const std::filesystem::path& path, const Tensor<std::uint8_t>& array) {
  write_raw(path, NpyDtype::kUint8, array.shape(), array.values().data(), array.size());
}

Tensor<float> read_npy_f32(const std::filesystem::path& path) {
  auto t = decode<float>(slurp(path), path);
  for (float v : t.values()) {
    if (!std::isfinite(v)) throw DataError("non-finite value in " + path.string());
  }
  return t;
}

Tensor<double> read_npy_f64(const std::filesystem::path& path) {
  auto t = decode<double>(slurp(path), path);
  for (double v : t.values()) {
    if (!std::isfinite(v)) throw DataError("non-finite value in " + path.string());
  }
  return t;
}

Tensor<std::uint8_t> read_npy_mask(const std::filesystem::path& path) {
  const std::string bytes = slurp(path);
  const auto h = parse_npy_header(bytes);
  if (h.dtype != NpyDtype::kUint8 && h.dtype != NpyDtype::kBool) {
    throw DataError("mask file must be uint8 or bool: " + path.string());
  }
  auto t = decode<std::uint8_t>(bytes, path);
  for (auto v : t.values()) {
    if (v > 1) throw DataError("mask values must be 0 or 1: " + path.string());
  }
  return t;
}

void write_heatmap(const std::filesystem::path& path, const Heatmap& heatmap) {
  write_npy(path, tensor_cast<float>(heatmap.values));
}

Heatmap read_heatmap(const std::filesystem::path& path) {
  return Heatmap{read_npy_f64(path), false};
}

}  // namespace msfi
