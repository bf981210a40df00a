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

#include "msfi/oracle.hpp"

#include <cmath>
#include <cstdlib>
#include <numbers>

#include "msfi/parallel.hpp"
#include "msfi/protocol.hpp"
#include "msfi/shape.hpp"

namespace msfi {

const OracleMeta& Oracle::handshake() {
  if (!ready_) {
    meta_ = do_handshake();
    ready_ = true;
  }
  return meta_;
}

const OracleMeta& Oracle::meta() const {
  if (!ready_) throw OracleError("oracle used before handshake");
  return meta_;
}

std::vector<Probabilities> Oracle::predict_batch(std::span<const Image> inputs) {
  const OracleMeta& m = meta();
  if (inputs.empty()) return {};
  for (const auto& img : inputs) {
    if (!m.input_shape.empty() && img.shape() != m.input_shape) {
      throw DataError("input shape " + shape_to_string(img.shape()) + " does not match oracle shape " +
                      shape_to_string(m.input_shape));
    }
  }
  calls_ += inputs.size();
  auto probs = do_predict(inputs);
  protocol::check_probabilities(probs, inputs.size(), m.num_classes);
  return probs;
}

int argmax(const Probabilities& probs) {
  int best = 0;
  for (std::size_t i = 1; i < probs.size(); ++i) {
    if (probs[i] > probs[static_cast<std::size_t>(best)]) best = static_cast<int>(i);
  }
  return best;
}

std::vector<Probabilities> BuiltinOracle::do_predict(std::span<const Image> inputs) {
  std::vector<Probabilities> out(inputs.size());
  parallel_for(inputs.size(), [&](std::size_t i) { out[i] = predict_one(inputs[i]); });
  return out;
}

// ---------------------------------------------------------------------------

namespace {

constexpr std::size_t kT1c = 1;
constexpr std::size_t kFlair = 3;

struct Plane {
  std::size_t rows, cols;
};

Plane require_2d(const Image& input, std::size_t channel) {
  const Shape& s = input.shape();
  if (s.size() != 3) throw DataError("shape oracles need M x H x W inputs, got " + shape_to_string(s));
  if (s[0] <= channel) throw DataError("input lacks channel " + std::to_string(channel));
  return {s[1], s[2]};
}

Probabilities hard_default(int default_class) {
  Probabilities p(2, 0.01);
  p[static_cast<std::size_t>(default_class)] = 0.99;
  return p;
}

void check_shape_meta(const Shape& shape, std::size_t needed_channels) {
  if (shape.empty()) return;
  if (shape.size() != 3 || shape[0] <= needed_channels) {
    throw DataError("shape oracles need M x H x W inputs with at least " +
                    std::to_string(needed_channels + 1) + " channels, got " + shape_to_string(shape));
  }
}

}  // namespace

std::size_t auto_smoothing(std::size_t rows, std::size_t cols) {
  return 2 * (std::min(rows, cols) / 48) + 1;
}

Probabilities shape_rule(std::span<const float> channel, std::size_t rows, std::size_t cols,
                         const ShapeRuleParams& params) {
  const std::size_t width = params.smoothing ? params.smoothing : auto_smoothing(rows, cols);
  const auto smooth = shape::box_blur(channel, rows, cols, width);
  double peak = 0.0;
  for (double v : smooth) peak = std::max(peak, v);
  if (!(peak > 0.0)) return hard_default(params.default_class);

  std::vector<std::uint8_t> blob(smooth.size());
  const double cut = 0.5 * peak;
  for (std::size_t i = 0; i < smooth.size(); ++i) blob[i] = smooth[i] > cut ? 1 : 0;
  const double c = shape::compactness(blob, rows, cols);
  if (!(c > 0.0)) return hard_default(params.default_class);

  const double z = std::log(c / params.theta) / params.temperature;
  const double p1 = 0.01 + 0.98 / (1.0 + std::exp(-z));
  return {1.0 - p1, p1};
}

T1cShapeOracle::T1cShapeOracle(Shape input_shape, ShapeRuleParams params)
    : input_shape_(std::move(input_shape)), params_(params) {
  check_shape_meta(input_shape_, kT1c);
}

Probabilities T1cShapeOracle::predict_one(const Image& input) const {
  const Plane p = require_2d(input, kT1c);
  return shape_rule(input.modality(kT1c), p.rows, p.cols, params_);
}

OracleMeta T1cShapeOracle::do_handshake() { return {2, input_shape_, "t1c-shape"}; }

DualModalityOracle::DualModalityOracle(double w_t1c, double w_flair, Shape input_shape,
                                       ShapeRuleParams params)
    : w_t1c_(w_t1c), w_flair_(w_flair), input_shape_(std::move(input_shape)), params_(params) {
  if (w_t1c < 0.0 || w_flair < 0.0 || !(w_t1c + w_flair > 0.0)) {
    throw UsageError("dual-modality weights must be non-negative with a positive sum");
  }
  check_shape_meta(input_shape_, kFlair);
}

Probabilities DualModalityOracle::predict_one(const Image& input) const {
  const Plane p = require_2d(input, kFlair);
  const auto t1c = shape_rule(input.modality(kT1c), p.rows, p.cols, params_);
  const auto flair = shape_rule(input.modality(kFlair), p.rows, p.cols, params_);
  const double total = w_t1c_ + w_flair_;
  Probabilities out(2);
  for (std::size_t k = 0; k < 2; ++k) out[k] = (w_t1c_ * t1c[k] + w_flair_ * flair[k]) / total;
  return out;
}

OracleMeta DualModalityOracle::do_handshake() { return {2, input_shape_, "dual-modality"}; }

LinearOracle::LinearOracle(Tensor<double> weights, double bias, LinkFunction link)
    : weights_(std::move(weights)), bias_(bias), link_(link) {}

double LinearOracle::score(const Image& input) const {
  if (input.shape() != weights_.shape()) throw DataError("linear oracle: input shape mismatch");
  double s = bias_;
  for (std::size_t i = 0; i < input.size(); ++i) s += weights_[i] * static_cast<double>(input[i]);
  return s;
}

Probabilities LinearOracle::predict_one(const Image& input) const {
  const double s = score(input);
  double p1;
  if (link_ == LinkFunction::kLogistic) {
    p1 = 1.0 / (1.0 + std::exp(-s));
  } else {
    if (s < 0.0 || s > 1.0) throw OracleError("identity-link linear oracle left [0, 1]");
    p1 = s;
  }
  return {1.0 - p1, p1};
}

OracleMeta LinearOracle::do_handshake() { return {2, weights_.shape(), "linear"}; }

ConstantOracle::ConstantOracle(Probabilities probs, Shape input_shape)
    : probs_(std::move(probs)), input_shape_(std::move(input_shape)) {}

Probabilities ConstantOracle::predict_one(const Image&) const { return probs_; }

OracleMeta ConstantOracle::do_handshake() {
  return {static_cast<int>(probs_.size()), input_shape_, "constant"};
}

double oracle_timeout_seconds() {
  if (const char* env = std::getenv("MSFI_ORACLE_TIMEOUT")) {
    char* end = nullptr;
    const double v = std::strtod(env, &end);
    if (end != env && v > 0.0) return v;
  }
  return 60.0;
}

}  // namespace msfi
