#include <algorithm>
#include <vector>

#include "dualcap/metrics/metrics.hpp"
#include "corpus_check.hpp"

namespace dualcap {

namespace {

std::size_t lcs_length(const TokenizedCaption& a, const TokenizedCaption& b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), curr(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      curr[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], curr[j - 1]);
    }
    std::swap(prev, curr);
  }
  return prev[b.size()];
}

}  // namespace

double rouge_l(const std::vector<TokenizedCaption>& candidates,
               const std::vector<ReferenceSet>& references_per_image) {
  detail::check_corpus("rouge_l", candidates, references_per_image);
  constexpr double kBeta = 1.2;

  double score_sum = 0.0;
  for (std::size_t img = 0; img < candidates.size(); ++img) {
    const TokenizedCaption& cand = candidates[img];
    double best = 0.0;
    for (const TokenizedCaption& ref : references_per_image[img]) {
      if (cand.empty() || ref.empty()) continue;
      const double lcs = static_cast<double>(lcs_length(cand, ref));
      const double precision = lcs / static_cast<double>(cand.size());
      const double recall = lcs / static_cast<double>(ref.size());
      if (precision <= 0.0 || recall <= 0.0) continue;
      const double f = (1.0 + kBeta * kBeta) * precision * recall /
                       (recall + kBeta * kBeta * precision);
      best = std::max(best, f);
    }
    score_sum += best;
  }
  return score_sum / static_cast<double>(candidates.size());
}

}  // namespace dualcap
