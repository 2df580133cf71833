#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "dualcap/common/error.hpp"
#include "dualcap/metrics/tokenize.hpp"

namespace dualcap {

// One candidate caption per image; one or more references per image, aligned
// by index. All scorers are pure functions over these.
using ReferenceSet = std::vector<TokenizedCaption>;

// n-grams are keyed by their tokens joined with an unlikely separator byte.
std::string ngram_key(const TokenizedCaption& tokens, std::size_t start, int n);

// Per-n document frequencies over a reference corpus. "Document" means
// image: an n-gram counts once per image no matter how many of that image's
// references contain it.
struct IdfTable {
  static constexpr int kMaxN = 4;

  std::array<std::map<std::string, long long>, kMaxN> document_frequency;
  long long n_images = 0;

  static IdfTable build(const std::vector<ReferenceSet>& references_per_image);

  // ln(n_images / max(1, df)); 0 for unseen n-grams in a 1-image corpus.
  double idf(const std::string& key, int n) const;
};

// Corpus-level BLEU-4: geometric mean of clipped modified 1..4-gram
// precisions with uniform weights, times the brevity penalty computed from
// closest reference lengths (ties resolved toward the shorter reference).
// Any empty precision bucket makes the score 0 (no smoothing).
double bleu4(const std::vector<TokenizedCaption>& candidates,
             const std::vector<ReferenceSet>& references_per_image);

// Mean over images of the max-over-references LCS F-measure with beta = 1.2.
double rouge_l(const std::vector<TokenizedCaption>& candidates,
               const std::vector<ReferenceSet>& references_per_image);

// CIDEr-D: per n in 1..4, clipped TF-IDF cosine between candidate and
// reference, damped by a Gaussian penalty on the length difference
// (sigma = 6); averaged over references and over n, scaled by 10.
double cider_d(const std::vector<TokenizedCaption>& candidates,
               const std::vector<ReferenceSet>& references_per_image,
               const IdfTable& idf);

// Scores a single candidate against one image's references (the training
// reward path); equals cider_d on a 1-image corpus with the given table.
double cider_d_single(const TokenizedCaption& candidate, const ReferenceSet& references,
                      const IdfTable& idf);

}  // namespace dualcap
