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

#include <atomic>
#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "msfi/tensor.hpp"

namespace msfi {

using Probabilities = std::vector<double>;

struct OracleMeta {
  int num_classes = 0;
  Shape input_shape;  // M x spatial; empty means "any shape" (builtins only)
  std::string name;
};

/// Largest number of inputs carried by one predict message.
inline constexpr std::size_t kMaxBatch = 64;
inline constexpr double kProbabilitySumTolerance = 1e-5;

/*
 * Black-box model interface.
 *
 * predict_batch validates inputs against the handshake metadata, forwards
 * them to the implementation and checks every reply: one probability vector
 * per input, num_classes entries, finite, summing to 1 within 1e-5.
 * Builtins are pure and safe to call from many threads; remote clients
 * serialize calls internally.
 */
class Oracle {
 public:
  virtual ~Oracle() = default;

  /// Exchanges metadata (a no-op for builtins). Must precede predict_batch.
  const OracleMeta& handshake();
  const OracleMeta& meta() const;
  bool ready() const { return ready_; }

  std::vector<Probabilities> predict_batch(std::span<const Image> inputs);

  /// Number of inputs sent to the model so far.
  std::size_t calls() const { return calls_.load(); }

 protected:
  virtual OracleMeta do_handshake() = 0;
  virtual std::vector<Probabilities> do_predict(std::span<const Image> inputs) = 0;

 private:
  OracleMeta meta_;
  bool ready_ = false;
  std::atomic<std::size_t> calls_{0};
};

/// Index of the largest probability (lowest index wins ties).
int argmax(const Probabilities& probs);

// ---------------------------------------------------------------------------
// Builtin analytic oracles

/// Builtins evaluate one input at a time; predict_batch fans out over the
/// batch in parallel. predict_one is the serial reference.
class BuiltinOracle : public Oracle {
 public:
  virtual Probabilities predict_one(const Image& input) const = 0;

 protected:
  std::vector<Probabilities> do_predict(std::span<const Image> inputs) override;
};

struct ShapeRuleParams {
  double theta = 1.6;          // compactness threshold
  int default_class = 0;       // prediction for an empty channel
  std::size_t smoothing = 0;   // box width before thresholding; 0 = auto
  double temperature = 0.1;    // softness in log-compactness units
};

/// Smoothing width used when ShapeRuleParams::smoothing is 0.
std::size_t auto_smoothing(std::size_t rows, std::size_t cols);

/// Class probabilities from the shape of one 2D channel: blur, threshold at
/// half the maximum, measure compactness. Irregular (compactness > theta)
/// favours class 1. p1 = 0.01 + 0.98 * sigmoid(ln(c / theta) / temperature).
Probabilities shape_rule(std::span<const float> channel, std::size_t rows, std::size_t cols,
                         const ShapeRuleParams& params);

/// Reads only the T1C channel (index 1) of a 2D M x H x W image.
class T1cShapeOracle : public BuiltinOracle {
 public:
  explicit T1cShapeOracle(Shape input_shape = {}, ShapeRuleParams params = {});
  Probabilities predict_one(const Image& input) const override;

 protected:
  OracleMeta do_handshake() override;

 private:
  Shape input_shape_;
  ShapeRuleParams params_;
};

/// Applies the shape rule to T1C and FLAIR independently and mixes the two
/// probability vectors: (w_t1c p_t1c + w_flair p_flair) / (w_t1c + w_flair).
class DualModalityOracle : public BuiltinOracle {
 public:
  DualModalityOracle(double w_t1c, double w_flair, Shape input_shape = {},
                     ShapeRuleParams params = {});
  Probabilities predict_one(const Image& input) const override;

 protected:
  OracleMeta do_handshake() override;

 private:
  double w_t1c_, w_flair_;
  Shape input_shape_;
  ShapeRuleParams params_;
};

enum class LinkFunction { kLogistic, kIdentity };

/// Two-class linear model with s = w . x + bias.
/// Logistic link: p1 = 1 / (1 + exp(-s)). Identity link: p1 = s, which must
/// stay inside [0, 1] (OracleError otherwise).
class LinearOracle : public BuiltinOracle {
 public:
  LinearOracle(Tensor<double> weights, double bias, LinkFunction link);
  Probabilities predict_one(const Image& input) const override;
  double score(const Image& input) const;

 protected:
  OracleMeta do_handshake() override;

 private:
  Tensor<double> weights_;
  double bias_;
  LinkFunction link_;
};

/// Ignores its input entirely.
class ConstantOracle : public BuiltinOracle {
 public:
  explicit ConstantOracle(Probabilities probs, Shape input_shape = {});
  Probabilities predict_one(const Image& input) const override;

 protected:
  OracleMeta do_handshake() override;

 private:
  Probabilities probs_;
  Shape input_shape_;
};

/*
 * Builds an oracle from a transport spec and performs the handshake:
 *   builtin:t1c-shape | builtin:flair-shape | builtin:dual-modality:<wT1C>,<wFLAIR>
 *   builtin:constant
 *   exec:<shell command>        (protocol over the child's stdin/stdout)
 *   tcp:<host>:<port>
 * When expected_shape is non-empty the handshake shape must match it.
 */
std::unique_ptr<Oracle> make_oracle(const std::string& spec, const Shape& expected_shape = {});

/// Timeout for remote requests: MSFI_ORACLE_TIMEOUT (seconds) or 60.
double oracle_timeout_seconds();

/// Predicted classes for n inputs produced on demand by make_input(i). Inputs
/// are materialized and dispatched in chunks so memory stays bounded.
template <typename MakeInput>
std::vector<int> predict_classes(Oracle& oracle, std::size_t n, MakeInput&& make_input,
                                 std::size_t chunk = 4 * kMaxBatch);

}  // namespace msfi

#include "msfi/oracle_inl.hpp"
