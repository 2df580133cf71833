#include "dualcap/train/loss.hpp"

#include <cmath>

#include "dualcap/common/rand.hpp"
#include "dualcap/common/tokens.hpp"
#include "dualcap/infer/decode.hpp"

namespace dualcap {

namespace {

// Draws an id from the emittable range [eos, vocab) of a probability vector,
// renormalized over that range, by inverse CDF.
int sample_emittable(const Tensor& probs, std::mt19937_64& rng) {
  const int vocab = probs.extent(0);
  double mass = 0.0;
  for (int id = kEosId; id < vocab; ++id) mass += probs(id);
  double r = draw_unit(rng) * mass;
  for (int id = kEosId; id < vocab; ++id) {
    r -= probs(id);
    if (r < 0.0) return id;
  }
  return vocab - 1;
}

double emittable_mass(const Tensor& probs) {
  double mass = 0.0;
  for (int id = kEosId; id < probs.extent(0); ++id) mass += probs(id);
  return mass;
}

}  // namespace

Tensor cross_entropy_loss(const Decoder& decoder, const ImageFeatures& features,
                          const std::vector<int>& target_ids, int n_attention,
                          double ss_prob, std::mt19937_64& rng) {
  if (target_ids.empty()) throw DataError("cross_entropy_loss: empty target");
  if (target_ids.back() != kEosId) {
    throw DataError("cross_entropy_loss: target must be terminated by eos");
  }
  const int max_steps = decoder.config().max_caption_len + 1;
  if (static_cast<int>(target_ids.size()) > max_steps) {
    throw DataError("cross_entropy_loss: target of length " +
                    std::to_string(target_ids.size()) + " exceeds " +
                    std::to_string(max_steps));
  }

  Tensor loss = Tensor::zeros({1});
  DecoderState state = decoder.initial_state();
  int prev = kBosId;
  for (std::size_t t = 0; t < target_ids.size(); ++t) {
    const int target = target_ids[t];
    const StepResult r = decoder.decode_step(prev, features, state, n_attention);
    loss = add(loss, scalar_mul(log(slice(r.probs, target, 1)), -1.0));
    state = r.state;
    if (t + 1 < target_ids.size()) {
      prev = target;
      if (ss_prob > 0.0 && draw_unit(rng) < ss_prob) {
        prev = sample_emittable(r.probs, rng);
      }
    }
  }
  return loss;
}

SampledCaption sample_caption(const Decoder& decoder, const ImageFeatures& features,
                              int n_attention, int max_len, std::mt19937_64& rng) {
  if (max_len < 1) throw Error("sample_caption: max_len must be >= 1");
  TapeSuspend suspend;
  SampledCaption out;
  DecoderState state = decoder.initial_state();
  int prev = kBosId;
  for (int step = 0; step < max_len; ++step) {
    const StepResult r = decoder.decode_step(prev, features, state, n_attention);
    const int id = sample_emittable(r.probs, rng);
    out.sum_log_prob += std::log(r.probs(id)) - std::log(emittable_mass(r.probs));
    if (id == kEosId) break;
    out.tokens.push_back(id);
    state = r.state;
    prev = id;
  }
  return out;
}

SelfCriticalLoss self_critical_loss(const Decoder& decoder, const ImageFeatures& features,
                                    const ReferenceSet& references, int n_attention,
                                    int max_len, const IdfTable& idf,
                                    const Vocabulary& vocab, std::mt19937_64& rng) {
  if (references.empty()) throw DataError("self_critical_loss: empty reference set");

  SelfCriticalLoss result;
  result.greedy = greedy_decode(decoder, features, n_attention, max_len);
  TokenizedCaption greedy_words;
  for (const int id : result.greedy) greedy_words.push_back(vocab.lookup(id));
  result.baseline = cider_d_single(greedy_words, references, idf);

  // Sampled pass, built on the active tape: the summed log-probability of the
  // sampled path under the masked, renormalized per-step distribution.
  Tensor sum_log_prob = Tensor::zeros({1});
  DecoderState state = decoder.initial_state();
  int prev = kBosId;
  const int vocab_size = decoder.config().vocab_size;
  for (int step = 0; step < max_len; ++step) {
    const StepResult r = decoder.decode_step(prev, features, state, n_attention);
    const int id = sample_emittable(r.probs, rng);
    const Tensor mass = sum(slice(r.probs, kEosId, vocab_size - kEosId));
    const Tensor step_lp =
        add(log(slice(r.probs, id, 1)), scalar_mul(log(mass), -1.0));
    sum_log_prob = add(sum_log_prob, step_lp);
    if (id == kEosId) break;
    result.sampled.push_back(id);
    state = r.state;
    prev = id;
  }

  TokenizedCaption sampled_words;
  for (const int id : result.sampled) sampled_words.push_back(vocab.lookup(id));
  result.reward = cider_d_single(sampled_words, references, idf);

  result.loss = scalar_mul(sum_log_prob, -(result.reward - result.baseline));
  return result;
}

}  // namespace dualcap
