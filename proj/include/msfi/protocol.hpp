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

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "msfi/oracle.hpp"

namespace msfi::protocol {

// Newline-delimited JSON, version 1.
//   client: {"type":"hello","version":1}
//   server: {"type":"meta","version":1,"num_classes":C,"input_shape":[...],"name":"..."}
//   client: {"type":"predict","id":N,"inputs":[{"shape":[...],"data_b64":"..."}]}
//   server: {"type":"result","id":N,"probs":[[...],...]}
//   server: {"type":"error","id":N,"message":"..."}   (id optional)
// data_b64 carries the little-endian float32 payload in C order.

inline constexpr int kVersion = 1;

std::string base64_encode(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> base64_decode(std::string_view text);

std::string encode_hello(int version = kVersion);
std::string encode_meta(const OracleMeta& meta, int version = kVersion);
std::string encode_predict(std::uint64_t id, std::span<const Image> inputs);
std::string encode_result(std::uint64_t id, const std::vector<Probabilities>& probs);
std::string encode_error(const std::string& message, const std::uint64_t* id = nullptr);

/// Parses one line; throws ProtocolError for anything that is not a JSON
/// object with a string "type".
nlohmann::json parse_message(std::string_view line);

OracleMeta decode_meta(const nlohmann::json& message);
std::vector<Image> decode_inputs(const nlohmann::json& message);
std::vector<Probabilities> decode_probs(const nlohmann::json& message);

/// Checks a probability reply against the contract (count, width, finite,
/// sum to 1 within tolerance).
void check_probabilities(const std::vector<Probabilities>& probs, std::size_t expected_count,
                         int num_classes);

}  // namespace msfi::protocol
