#pragma once

#include <random>
#include <vector>

#include "dualcap/data/vocab.hpp"
#include "dualcap/metrics/metrics.hpp"
#include "dualcap/model/decoder.hpp"

namespace dualcap {

// Teacher-forced negative log-likelihood of an eos-terminated target
// sequence. With probability ss_prob, independently per step, the next input
// word is drawn from the model's own (pad/bos-masked, renormalized) output
// distribution instead of the ground truth; targets are unaffected.
Tensor cross_entropy_loss(const Decoder& decoder, const ImageFeatures& features,
                          const std::vector<int>& target_ids, int n_attention,
                          double ss_prob, std::mt19937_64& rng);

struct SampledCaption {
  std::vector<int> tokens;  // eos excluded
  double sum_log_prob = 0.0;
};

// Ancestral sampling from the per-step output distributions (masked to the
// emittable ids and renormalized) until eos or max_len. sum_log_prob is the
// log-probability of the whole sampled path under that masked distribution,
// the eos draw included.
SampledCaption sample_caption(const Decoder& decoder, const ImageFeatures& features,
                              int n_attention, int max_len, std::mt19937_64& rng);

struct SelfCriticalLoss {
  Tensor loss;               // -(reward - baseline) * sum log p(sampled path)
  double reward = 0.0;       // score of the sampled caption
  double baseline = 0.0;     // score of the greedy caption
  std::vector<int> sampled;  // eos excluded
  std::vector<int> greedy;
};

// Policy-gradient surrogate with the greedy decode as baseline. The reward
// is the consensus score of the sampled caption against the references; both
// scores are constants in the graph, so the gradient is the advantage times
// the gradient of the sampled path's log-probability. A zero advantage gives
// an exactly-zero gradient.
SelfCriticalLoss self_critical_loss(const Decoder& decoder, const ImageFeatures& features,
                                    const ReferenceSet& references, int n_attention,
                                    int max_len, const IdfTable& idf,
                                    const Vocabulary& vocab, std::mt19937_64& rng);

}  // namespace dualcap
