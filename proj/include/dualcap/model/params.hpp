#pragma once

#include <random>
#include <string>
#include <utility>
#include <vector>

#include "dualcap/model/config.hpp"
#include "dualcap/tensor/tensor.hpp"

namespace dualcap {

// All learnable tensors. Both LSTMs use the standard 4-gate cell acting on
// the concatenation of their input with the previous hidden state; gates are
// stacked [input, forget, cell, output] along the last dimension.
//
// Shorthand below: V vocab, E embed, H hidden, A attention hidden,
// F feature, O output hidden.
struct ModelParams {
  Tensor embed_w;      // [V, E]
  Tensor lang_lstm_w;  // [E+H, 4H]   input: previous word embedding
  Tensor lang_lstm_b;  // [4H]
  Tensor att_lstm_w;   // [F+2H, 4H]  input: concat(attention vector, h1)
  Tensor att_lstm_b;   // [4H]
  Tensor att_w1;       // [2F+2H, A]  row blocks: region | mean | h1 | h2
  Tensor att_b1;       // [A]
  Tensor att_w2;       // [A]         scorer output layer (width 1)
  Tensor att_b2;       // [1]
  Tensor out_w1;       // [F+2H, O]   input: concat(mean, h1, h2)
  Tensor out_b1;       // [O]
  Tensor out_w2;       // [O, V]
  Tensor out_b2;       // [V]

  // Weights uniform in [-0.08, 0.08]; biases zero except LSTM forget gates,
  // which start at 1.0.
  static ModelParams init(const ModelConfig& cfg, std::mt19937_64& rng);

  // Stable name -> tensor table in a fixed order; checkpoints and the
  // gradient suite both key off it.
  std::vector<std::pair<std::string, Tensor>> named() const;

  long long total_scalar_count() const;
  void zero_grad() const;

  // Deep copy with fresh storage (values preserved, gradients reset).
  ModelParams clone() const;

  // Overwrites every tensor's values with those of `other` (shapes must
  // match); the receiving tensors keep their identity and gradient slots.
  void assign_values(const ModelParams& other) const;
};

}  // namespace dualcap
