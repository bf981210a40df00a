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

#include "msfi/protocol.hpp"

#include <cmath>
#include <cstring>

namespace msfi::protocol {

using nlohmann::json;

namespace {
constexpr char kAlphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

int decode_char(char c) {
  if (c >= 'A' && c <= 'Z') return c - 'A';
  if (c >= 'a' && c <= 'z') return c - 'a' + 26;
  if (c >= '0' && c <= '9') return c - '0' + 52;
  if (c == '+') return 62;
  if (c == '/') return 63;
  return -1;
}
}  // namespace

std::string base64_encode(std::span<const std::uint8_t> bytes) {
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 2 < bytes.size(); i += 3) {
    const std::uint32_t v = (bytes[i] << 16) | (bytes[i + 1] << 8) | bytes[i + 2];
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += kAlphabet[(v >> 6) & 63];
    out += kAlphabet[v & 63];
  }
  if (i < bytes.size()) {
    std::uint32_t v = bytes[i] << 16;
    if (i + 1 < bytes.size()) v |= bytes[i + 1] << 8;
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += i + 1 < bytes.size() ? kAlphabet[(v >> 6) & 63] : '=';
    out += '=';
  }
  return out;
}

std::vector<std::uint8_t> base64_decode(std::string_view text) {
  if (text.size() % 4 != 0) throw ProtocolError("base64 length is not a multiple of 4");
  std::vector<std::uint8_t> out;
  out.reserve(text.size() / 4 * 3);
  for (std::size_t i = 0; i < text.size(); i += 4) {
    int v[4];
    int pad = 0;
    for (int k = 0; k < 4; ++k) {
      const char c = text[i + k];
      if (c == '=' && i + 4 == text.size() && k >= 2) {
        v[k] = 0;
        ++pad;
        continue;
      }
      if (pad) throw ProtocolError("invalid base64 padding");
      v[k] = decode_char(c);
      if (v[k] < 0) throw ProtocolError("invalid base64 character");
    }
    const std::uint32_t word = (v[0] << 18) | (v[1] << 12) | (v[2] << 6) | v[3];
    out.push_back(static_cast<std::uint8_t>(word >> 16));
    if (pad < 2) out.push_back(static_cast<std::uint8_t>((word >> 8) & 0xFF));
    if (pad < 1) out.push_back(static_cast<std::uint8_t>(word & 0xFF));
  }
  return out;
}

std::string encode_hello(int version) {
  return json{{"type", "hello"}, {"version", version}}.dump();
}

std::string encode_meta(const OracleMeta& meta, int version) {
  return json{{"type", "meta"},
              {"version", version},
              {"num_classes", meta.num_classes},
              {"input_shape", meta.input_shape},
              {"name", meta.name}}
      .dump();
}

std::string encode_predict(std::uint64_t id, std::span<const Image> inputs) {
  json msg{{"type", "predict"}, {"id", id}, {"inputs", json::array()}};
  for (const auto& img : inputs) {
    const auto* bytes = reinterpret_cast<const std::uint8_t*>(img.values().data());
    msg["inputs"].push_back(
        {{"shape", img.shape()}, {"data_b64", base64_encode({bytes, img.size() * sizeof(float)})}});
  }
  return msg.dump();
}

std::string encode_result(std::uint64_t id, const std::vector<Probabilities>& probs) {
  return json{{"type", "result"}, {"id", id}, {"probs", probs}}.dump();
}

std::string encode_error(const std::string& message, const std::uint64_t* id) {
  json msg{{"type", "error"}, {"message", message}};
  if (id) msg["id"] = *id;
  return msg.dump();
}

json parse_message(std::string_view line) {
  json msg;
  try {
    msg = json::parse(line);
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("malformed message: ") + e.what());
  }
  if (!msg.is_object() || !msg.contains("type") || !msg["type"].is_string()) {
    throw ProtocolError("message lacks a string 'type' field");
  }
  return msg;
}

OracleMeta decode_meta(const json& message) {
  if (message.at("type") != "meta") {
    throw ProtocolError("expected a meta reply, got '" + message["type"].get<std::string>() + "'");
  }
  if (message.contains("version") && message["version"] != kVersion) {
    throw ProtocolError("protocol version mismatch: server speaks " + message["version"].dump() +
                        ", client speaks " + std::to_string(kVersion));
  }
  try {
    OracleMeta meta;
    meta.num_classes = message.at("num_classes").get<int>();
    meta.input_shape = message.at("input_shape").get<Shape>();
    meta.name = message.value("name", std::string("remote"));
    if (meta.num_classes < 1) throw ProtocolError("meta reply has num_classes < 1");
    return meta;
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("malformed meta reply: ") + e.what());
  }
}

std::vector<Image> decode_inputs(const json& message) {
  std::vector<Image> out;
  try {
    for (const auto& in : message.at("inputs")) {
      Shape shape = in.at("shape").get<Shape>();
      const auto bytes = base64_decode(in.at("data_b64").get<std::string>());
      const std::size_t n = shape_size(shape);
      if (bytes.size() != n * sizeof(float)) {
        throw ProtocolError("input payload does not match its shape");
      }
      std::vector<float> data(n);
      std::memcpy(data.data(), bytes.data(), bytes.size());
      out.emplace_back(std::move(shape), std::move(data));
    }
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("malformed predict request: ") + e.what());
  }
  return out;
}

std::vector<Probabilities> decode_probs(const json& message) {
  try {
    std::vector<Probabilities> probs;
    for (const auto& row : message.at("probs")) {
      Probabilities p;
      for (const auto& v : row) {
        // JSON has no NaN; servers that emit null or strings are rejected here.
        if (!v.is_number()) throw ProtocolError("non-numeric probability in reply");
        p.push_back(v.get<double>());
      }
      probs.push_back(std::move(p));
    }
    return probs;
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("malformed result reply: ") + e.what());
  }
}

void check_probabilities(const std::vector<Probabilities>& probs, std::size_t expected_count,
                         int num_classes) {
  if (probs.size() != expected_count) {
    throw ProtocolError("reply carries " + std::to_string(probs.size()) + " results for " +
                        std::to_string(expected_count) + " inputs");
  }
  for (const auto& p : probs) {
    if (static_cast<int>(p.size()) != num_classes) {
      throw ProtocolError("probability vector has " + std::to_string(p.size()) + " entries, expected " +
                          std::to_string(num_classes));
    }
    double sum = 0.0;
    for (double v : p) {
      if (!std::isfinite(v)) throw ProtocolError("non-finite probability in reply");
      if (v < -kProbabilitySumTolerance) throw ProtocolError("negative probability in reply");
      sum += v;
    }
    if (std::fabs(sum - 1.0) > kProbabilitySumTolerance) {
      throw ProtocolError("probabilities sum to " + std::to_string(sum) + ", not 1");
    }
  }
}

}  // namespace msfi::protocol
