#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "dualcap/metrics/metrics.hpp"
#include "corpus_check.hpp"

namespace dualcap {

namespace {

std::map<std::string, long long> ngram_counts(const TokenizedCaption& tokens, int n) {
  std::map<std::string, long long> counts;
  if (tokens.size() < static_cast<std::size_t>(n)) return counts;
  for (std::size_t s = 0; s + n <= tokens.size(); ++s) counts[ngram_key(tokens, s, n)] += 1;
  return counts;
}

}  // namespace

double bleu4(const std::vector<TokenizedCaption>& candidates,
             const std::vector<ReferenceSet>& references_per_image) {
  detail::check_corpus("bleu4", candidates, references_per_image);
  constexpr int kMaxN = 4;

  long long candidate_length = 0;
  long long effective_ref_length = 0;
  std::array<long long, kMaxN> clipped{};
  std::array<long long, kMaxN> total{};

  for (std::size_t img = 0; img < candidates.size(); ++img) {
    const TokenizedCaption& cand = candidates[img];
    const ReferenceSet& refs = references_per_image[img];

    candidate_length += static_cast<long long>(cand.size());
    long long closest = static_cast<long long>(refs[0].size());
    for (const TokenizedCaption& ref : refs) {
      const auto len = static_cast<long long>(ref.size());
      const long long d_new = std::llabs(len - static_cast<long long>(cand.size()));
      const long long d_old = std::llabs(closest - static_cast<long long>(cand.size()));
      if (d_new < d_old || (d_new == d_old && len < closest)) closest = len;
    }
    effective_ref_length += closest;

    for (int n = 1; n <= kMaxN; ++n) {
      const auto cand_counts = ngram_counts(cand, n);
      std::map<std::string, long long> max_ref;
      for (const TokenizedCaption& ref : refs) {
        for (const auto& [key, count] : ngram_counts(ref, n)) {
          max_ref[key] = std::max(max_ref[key], count);
        }
      }
      for (const auto& [key, count] : cand_counts) {
        total[n - 1] += count;
        const auto it = max_ref.find(key);
        if (it != max_ref.end()) clipped[n - 1] += std::min(count, it->second);
      }
    }
  }

  double log_precision_sum = 0.0;
  for (int n = 1; n <= kMaxN; ++n) {
    if (clipped[n - 1] == 0 || total[n - 1] == 0) return 0.0;
    log_precision_sum +=
        0.25 * std::log(static_cast<double>(clipped[n - 1]) / total[n - 1]);
  }
  if (candidate_length == 0) return 0.0;
  const double bp =
      candidate_length > effective_ref_length
          ? 1.0
          : std::exp(1.0 - static_cast<double>(effective_ref_length) / candidate_length);
  return bp * std::exp(log_precision_sum);
}

}  // namespace dualcap
