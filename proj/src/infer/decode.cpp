#include "dualcap/infer/decode.hpp"

#include <algorithm>
#include <cmath>

#include "dualcap/common/tokens.hpp"

namespace dualcap {

namespace {

void check_args(const char* who, int m_attention, int max_len) {
  if (m_attention < 1) {
    throw Error(std::string(who) + ": attention iterations must be >= 1");
  }
  if (max_len < 1) throw Error(std::string(who) + ": max_len must be >= 1");
}

// Effective sequence for tie-breaking: a finished hypothesis counts its eos,
// which sorts before every content token.
std::vector<int> effective_tokens(const BeamHypothesis& hyp) {
  std::vector<int> t = hyp.tokens;
  if (hyp.finished) t.push_back(kEosId);
  return t;
}

bool better(const BeamHypothesis& a, const BeamHypothesis& b) {
  if (a.log_prob != b.log_prob) return a.log_prob > b.log_prob;
  return effective_tokens(a) < effective_tokens(b);
}

}  // namespace

std::vector<int> greedy_decode(const Decoder& decoder, const ImageFeatures& features,
                               int m_attention, int max_len, AttentionTrace* trace) {
  check_args("greedy_decode", m_attention, max_len);
  TapeSuspend suspend;
  std::vector<int> tokens;
  DecoderState state = decoder.initial_state();
  int prev = kBosId;
  for (int step = 0; step < max_len; ++step) {
    const StepResult r = decoder.decode_step(prev, features, state, m_attention, trace);
    int best = kEosId;
    for (int id = kEosId + 1; id < decoder.config().vocab_size; ++id) {
      if (r.probs(id) > r.probs(best)) best = id;
    }
    if (best == kEosId) break;
    tokens.push_back(best);
    state = r.state;
    prev = best;
  }
  return tokens;
}

DecodeResult beam_search(const Decoder& decoder, const ImageFeatures& features,
                         int m_attention, int beam_size, int max_len) {
  check_args("beam_search", m_attention, max_len);
  if (beam_size < 1) throw Error("beam_search: beam size must be >= 1");
  TapeSuspend suspend;
  const int vocab = decoder.config().vocab_size;

  std::vector<BeamHypothesis> active = {
      BeamHypothesis{{}, 0.0, decoder.initial_state(), false}};
  std::vector<BeamHypothesis> finished;

  for (int step = 0; step < max_len && !active.empty(); ++step) {
    std::vector<BeamHypothesis> candidates;
    candidates.reserve(active.size() * (vocab - kEosId));
    for (const BeamHypothesis& hyp : active) {
      const int prev = hyp.tokens.empty() ? kBosId : hyp.tokens.back();
      const StepResult r = decoder.decode_step(prev, features, hyp.state, m_attention);
      for (int id = kEosId; id < vocab; ++id) {
        BeamHypothesis next;
        next.log_prob = hyp.log_prob + std::log(r.probs(id));
        next.state = r.state;
        if (id == kEosId) {
          next.tokens = hyp.tokens;
          next.finished = true;
        } else {
          next.tokens = hyp.tokens;
          next.tokens.push_back(id);
        }
        candidates.push_back(std::move(next));
      }
    }
    std::sort(candidates.begin(), candidates.end(), better);
    if (candidates.size() > static_cast<std::size_t>(beam_size)) {
      candidates.resize(beam_size);
    }
    active.clear();
    for (BeamHypothesis& hyp : candidates) {
      if (hyp.finished) {
        finished.push_back(std::move(hyp));
      } else {
        active.push_back(std::move(hyp));
      }
    }
  }
  // Hypotheses still alive at max_len compete as they stand.
  for (BeamHypothesis& hyp : active) finished.push_back(std::move(hyp));

  const BeamHypothesis& best =
      *std::min_element(finished.begin(), finished.end(),
                        [](const BeamHypothesis& a, const BeamHypothesis& b) {
                          return better(a, b);
                        });
  return DecodeResult{best.tokens, best.log_prob};
}

}  // namespace dualcap
