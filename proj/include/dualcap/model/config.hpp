#pragma once

#include "dualcap/common/error.hpp"

namespace dualcap {

// Architecture extents. Defaults are the desk-scale values used by the CLI;
// the full-scale counterparts would be embed 512, hidden 1024, attention
// hidden 512, feature 2048.
struct ModelConfig {
  int vocab_size = 32;
  int embed_dim = 24;
  int hidden_dim = 48;      // shared by both LSTMs
  int att_hidden_dim = 24;  // hidden width of the two-layer attention scorer
  int feat_dim = 32;        // per-region image feature width
  int out_hidden_dim = 48;  // hidden width of the two-layer output network
  int max_caption_len = 16;

  void validate() const;
};

// Exact number of learnable scalars for a config. A pure function of the
// extents above; how many attention iterations run per word has no effect.
long long param_count(const ModelConfig& cfg);

}  // namespace dualcap
