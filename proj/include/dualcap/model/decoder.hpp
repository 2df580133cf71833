#pragma once

#include <utility>
#include <vector>

#include "dualcap/model/config.hpp"
#include "dualcap/model/features.hpp"
#include "dualcap/model/params.hpp"
#include "dualcap/tensor/ops.hpp"

namespace dualcap {

// Recurrent state of both LSTMs plus the dual step indices: word_index (i)
// counts emitted words, attention_index (j) counts attention iterations.
// After t words decoded with n attention iterations each, i = t and j = n*t.
// Copies share tensor storage; every step produces fresh tensors, so a copied
// state is a valid immutable snapshot (beam search relies on this).
struct DecoderState {
  Tensor h1, c1;  // language LSTM
  Tensor h2, c2;  // attention LSTM
  int word_index = 0;
  int attention_index = 0;
};

// Attention weight vectors in execution order, one [n_regions] vector per
// attention iteration.
struct AttentionTrace {
  std::vector<Tensor> weights;
};

struct StepResult {
  Tensor probs;  // [vocab_size], sums to 1
  DecoderState state;
};

// One decode step runs: one language-LSTM update on the previous word's
// embedding, then n_attention rounds of {score regions -> normalize ->
// weighted-average -> attention-LSTM update} (each round reads the updated
// h2 of the previous round and the same h1), then the output network over
// (mean feature, h1, h2). The image never enters the language LSTM.
class Decoder {
 public:
  Decoder(ModelConfig cfg, ModelParams params);

  const ModelConfig& config() const { return cfg_; }
  const ModelParams& params() const { return params_; }

  DecoderState initial_state() const;

  Tensor embed_word(int token_id) const;
  std::pair<Tensor, Tensor> language_lstm_step(const Tensor& embedding, const Tensor& h1,
                                               const Tensor& c1) const;
  Tensor attention_scores(const ImageFeatures& features, const Tensor& h1,
                          const Tensor& h2_prev) const;
  Tensor attention_weights(const Tensor& scores) const;
  Tensor attention_vector(const Tensor& alpha, const ImageFeatures& features) const;
  std::pair<Tensor, Tensor> attention_lstm_step(const Tensor& attention_vec, const Tensor& h1,
                                                const Tensor& h2, const Tensor& c2) const;
  Tensor output_distribution(const ImageFeatures& features, const Tensor& h1,
                             const Tensor& h2) const;

  StepResult decode_step(int prev_token, const ImageFeatures& features,
                         const DecoderState& state, int n_attention,
                         AttentionTrace* trace = nullptr) const;

 private:
  std::pair<Tensor, Tensor> lstm_cell(const Tensor& x, const Tensor& h_prev,
                                      const Tensor& c_prev, const Tensor& w,
                                      const Tensor& b) const;

  ModelConfig cfg_;
  ModelParams params_;
};

}  // namespace dualcap
