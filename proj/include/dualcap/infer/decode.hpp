#pragma once

#include <vector>

#include "dualcap/common/tokens.hpp"
#include "dualcap/model/decoder.hpp"

namespace dualcap {

// Decoding emits ids from [eos, vocab_size) only: pad and bos are never
// produced. Returned token sequences exclude the terminating eos; reaching
// max_len without eos just ends the caption.
struct BeamHypothesis {
  std::vector<int> tokens;  // content tokens, eos excluded
  double log_prob = 0.0;
  DecoderState state;
  bool finished = false;
};

struct DecodeResult {
  std::vector<int> tokens;
  double log_prob = 0.0;
};

// Argmax decoding (lowest id wins exact ties). The optional trace collects
// every attention-weight vector, including those of the step that emits eos.
std::vector<int> greedy_decode(const Decoder& decoder, const ImageFeatures& features,
                               int m_attention, int max_len,
                               AttentionTrace* trace = nullptr);

// Breadth-limited search maximizing cumulative log-probability; no length
// normalization. Hypotheses finished early compete with max-length ones at
// the end. Ties are broken toward the lexicographically smaller token
// sequence (finished hypotheses order before their extensions because eos
// has the smallest emittable id).
DecodeResult beam_search(const Decoder& decoder, const ImageFeatures& features,
                         int m_attention, int beam_size, int max_len);

}  // namespace dualcap
