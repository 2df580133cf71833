#include "dualcap/model/decoder.hpp"

#include <string>

namespace dualcap {

Decoder::Decoder(ModelConfig cfg, ModelParams params)
    : cfg_(cfg), params_(std::move(params)) {
  cfg_.validate();
}

DecoderState Decoder::initial_state() const {
  const int H = cfg_.hidden_dim;
  return DecoderState{Tensor::zeros({H}), Tensor::zeros({H}), Tensor::zeros({H}),
                      Tensor::zeros({H}), 0, 0};
}

Tensor Decoder::embed_word(int token_id) const {
  if (token_id < 0 || token_id >= cfg_.vocab_size) {
    throw Error("embed_word: token id " + std::to_string(token_id) +
                " outside [0, " + std::to_string(cfg_.vocab_size) + ")");
  }
  return matmul(Tensor::one_hot(cfg_.vocab_size, token_id), params_.embed_w);
}

std::pair<Tensor, Tensor> Decoder::lstm_cell(const Tensor& x, const Tensor& h_prev,
                                             const Tensor& c_prev, const Tensor& w,
                                             const Tensor& b) const {
  const int H = cfg_.hidden_dim;
  const Tensor z = add(matmul(concat({x, h_prev}), w), b);
  const Tensor gi = sigmoid(slice(z, 0, H));
  const Tensor gf = sigmoid(slice(z, H, H));
  const Tensor gc = tanh(slice(z, 2 * H, H));
  const Tensor go = sigmoid(slice(z, 3 * H, H));
  const Tensor c = add(mul(gf, c_prev), mul(gi, gc));
  const Tensor h = mul(go, tanh(c));
  return {h, c};
}

std::pair<Tensor, Tensor> Decoder::language_lstm_step(const Tensor& embedding,
                                                      const Tensor& h1,
                                                      const Tensor& c1) const {
  if (embedding.rank() != 1 || embedding.extent(0) != cfg_.embed_dim) {
    throw ShapeError("language_lstm_step: embedding " + shape_str(embedding.shape()) +
                     " does not match embed_dim " + std::to_string(cfg_.embed_dim));
  }
  return lstm_cell(embedding, h1, c1, params_.lang_lstm_w, params_.lang_lstm_b);
}

Tensor Decoder::attention_scores(const ImageFeatures& features, const Tensor& h1,
                                 const Tensor& h2_prev) const {
  const int F = cfg_.feat_dim, H = cfg_.hidden_dim;
  if (features.regions.rank() != 2 || features.regions.extent(0) < 1) {
    throw ShapeError("attention_scores: need a nonempty region matrix, got " +
                     shape_str(features.regions.shape()));
  }
  if (features.feat_dim() != F) {
    throw ShapeError("attention_scores: regions " + shape_str(features.regions.shape()) +
                     " do not match feat_dim " + std::to_string(F));
  }
  // The scorer's first layer acts on concat(v_k, mean, h1, h2). Splitting its
  // weight matrix into the matching row blocks lets the per-region part run
  // as one matrix product while the region-independent part is shared.
  const Tensor w_region = slice(params_.att_w1, 0, F);
  const Tensor w_mean = slice(params_.att_w1, F, F);
  const Tensor w_h1 = slice(params_.att_w1, 2 * F, H);
  const Tensor w_h2 = slice(params_.att_w1, 2 * F + H, H);
  const Tensor shared = add(
      add(add(matmul(features.mean, w_mean), matmul(h1, w_h1)), matmul(h2_prev, w_h2)),
      params_.att_b1);
  const Tensor hidden = tanh(add(matmul(features.regions, w_region), shared));
  return add(matmul(hidden, params_.att_w2), params_.att_b2);
}

Tensor Decoder::attention_weights(const Tensor& scores) const {
  return softmax_lastdim(scores);
}

Tensor Decoder::attention_vector(const Tensor& alpha, const ImageFeatures& features) const {
  if (alpha.rank() != 1 || alpha.extent(0) != features.n_regions()) {
    throw ShapeError("attention_vector: weights " + shape_str(alpha.shape()) +
                     " do not match regions " + shape_str(features.regions.shape()));
  }
  return matmul(alpha, features.regions);
}

std::pair<Tensor, Tensor> Decoder::attention_lstm_step(const Tensor& attention_vec,
                                                       const Tensor& h1, const Tensor& h2,
                                                       const Tensor& c2) const {
  if (attention_vec.rank() != 1 || attention_vec.extent(0) != cfg_.feat_dim) {
    throw ShapeError("attention_lstm_step: input " + shape_str(attention_vec.shape()) +
                     " does not match feat_dim " + std::to_string(cfg_.feat_dim));
  }
  return lstm_cell(concat({attention_vec, h1}), h2, c2, params_.att_lstm_w,
                   params_.att_lstm_b);
}

Tensor Decoder::output_distribution(const ImageFeatures& features, const Tensor& h1,
                                    const Tensor& h2) const {
  const Tensor x = concat({features.mean, h1, h2});
  const Tensor hidden = relu(add(matmul(x, params_.out_w1), params_.out_b1));
  const Tensor logits = add(matmul(hidden, params_.out_w2), params_.out_b2);
  return softmax_lastdim(logits);
}

StepResult Decoder::decode_step(int prev_token, const ImageFeatures& features,
                                const DecoderState& state, int n_attention,
                                AttentionTrace* trace) const {
  if (n_attention < 1) {
    throw Error("decode_step: n_attention must be >= 1, got " +
                std::to_string(n_attention));
  }
  DecoderState next = state;
  const Tensor emb = embed_word(prev_token);
  std::tie(next.h1, next.c1) = language_lstm_step(emb, state.h1, state.c1);
  for (int iter = 0; iter < n_attention; ++iter) {
    const Tensor alpha = attention_weights(attention_scores(features, next.h1, next.h2));
    if (trace != nullptr) trace->weights.push_back(alpha);
    const Tensor a = attention_vector(alpha, features);
    std::tie(next.h2, next.c2) = attention_lstm_step(a, next.h1, next.h2, next.c2);
  }
  next.word_index = state.word_index + 1;
  next.attention_index = state.attention_index + n_attention;
  return StepResult{output_distribution(features, next.h1, next.h2), next};
}

}  // namespace dualcap
