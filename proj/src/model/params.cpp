#include "dualcap/model/params.hpp"

namespace dualcap {

void ModelConfig::validate() const {
  const auto positive = [](const char* name, int v) {
    if (v < 1) throw Error(std::string("config: ") + name + " must be >= 1");
  };
  positive("embed_dim", embed_dim);
  positive("hidden_dim", hidden_dim);
  positive("att_hidden_dim", att_hidden_dim);
  positive("feat_dim", feat_dim);
  positive("out_hidden_dim", out_hidden_dim);
  positive("max_caption_len", max_caption_len);
  if (vocab_size < 4) {
    throw Error("config: vocab_size must be >= 4 to hold the reserved tokens");
  }
}

long long param_count(const ModelConfig& cfg) {
  cfg.validate();
  const long long V = cfg.vocab_size, E = cfg.embed_dim, H = cfg.hidden_dim;
  const long long A = cfg.att_hidden_dim, F = cfg.feat_dim, O = cfg.out_hidden_dim;
  long long total = 0;
  total += V * E;                        // embedding
  total += (E + H) * 4 * H + 4 * H;      // language LSTM
  total += (F + 2 * H) * 4 * H + 4 * H;  // attention LSTM
  total += (2 * F + 2 * H) * A + A;      // attention scorer, layer 1
  total += A + 1;                        // attention scorer, layer 2
  total += (F + 2 * H) * O + O;          // output network, layer 1
  total += O * V + V;                    // output network, layer 2
  return total;
}

ModelParams ModelParams::init(const ModelConfig& cfg, std::mt19937_64& rng) {
  cfg.validate();
  const int V = cfg.vocab_size, E = cfg.embed_dim, H = cfg.hidden_dim;
  const int A = cfg.att_hidden_dim, F = cfg.feat_dim, O = cfg.out_hidden_dim;

  const auto weight = [&rng](Shape shape) {
    return Tensor::uniform(std::move(shape), -0.08, 0.08, rng, true);
  };
  const auto lstm_bias = [H] {
    Tensor b = Tensor::zeros({4 * H}, true);
    for (int k = H; k < 2 * H; ++k) b.values()[k] = 1.0;
    return b;
  };

  ModelParams p;
  p.embed_w = weight({V, E});
  p.lang_lstm_w = weight({E + H, 4 * H});
  p.lang_lstm_b = lstm_bias();
  p.att_lstm_w = weight({F + 2 * H, 4 * H});
  p.att_lstm_b = lstm_bias();
  p.att_w1 = weight({2 * F + 2 * H, A});
  p.att_b1 = Tensor::zeros({A}, true);
  p.att_w2 = weight({A});
  p.att_b2 = Tensor::zeros({1}, true);
  p.out_w1 = weight({F + 2 * H, O});
  p.out_b1 = Tensor::zeros({O}, true);
  p.out_w2 = weight({O, V});
  p.out_b2 = Tensor::zeros({V}, true);
  return p;
}

std::vector<std::pair<std::string, Tensor>> ModelParams::named() const {
  return {
      {"embed_w", embed_w},
      {"lang_lstm_w", lang_lstm_w},
      {"lang_lstm_b", lang_lstm_b},
      {"att_lstm_w", att_lstm_w},
      {"att_lstm_b", att_lstm_b},
      {"att_w1", att_w1},
      {"att_b1", att_b1},
      {"att_w2", att_w2},
      {"att_b2", att_b2},
      {"out_w1", out_w1},
      {"out_b1", out_b1},
      {"out_w2", out_w2},
      {"out_b2", out_b2},
  };
}

long long ModelParams::total_scalar_count() const {
  long long total = 0;
  for (const auto& [name, t] : named()) total += static_cast<long long>(t.numel());
  return total;
}

void ModelParams::zero_grad() const {
  for (auto& [name, t] : named()) t.zero_grad();
}

ModelParams ModelParams::clone() const {
  ModelParams out;
  out.embed_w = embed_w.clone(true);
  out.lang_lstm_w = lang_lstm_w.clone(true);
  out.lang_lstm_b = lang_lstm_b.clone(true);
  out.att_lstm_w = att_lstm_w.clone(true);
  out.att_lstm_b = att_lstm_b.clone(true);
  out.att_w1 = att_w1.clone(true);
  out.att_b1 = att_b1.clone(true);
  out.att_w2 = att_w2.clone(true);
  out.att_b2 = att_b2.clone(true);
  out.out_w1 = out_w1.clone(true);
  out.out_b1 = out_b1.clone(true);
  out.out_w2 = out_w2.clone(true);
  out.out_b2 = out_b2.clone(true);
  return out;
}

void ModelParams::assign_values(const ModelParams& other) const {
  const auto mine = named();
  const auto theirs = other.named();
  for (std::size_t k = 0; k < mine.size(); ++k) {
    Tensor dst = mine[k].second;
    const Tensor& src = theirs[k].second;
    if (dst.shape() != src.shape()) {
      throw ShapeError("params: shape mismatch for " + mine[k].first + ": " +
                       shape_str(dst.shape()) + " vs " + shape_str(src.shape()));
    }
    dst.values() = src.values();
  }
}

}  // namespace dualcap
