#include <algorithm>
#include <cmath>

#include "dualcap/metrics/metrics.hpp"
#include "corpus_check.hpp"

namespace dualcap {

std::string ngram_key(const TokenizedCaption& tokens, std::size_t start, int n) {
  std::string key;
  for (int k = 0; k < n; ++k) {
    if (k > 0) key.push_back('\x1f');
    key += tokens[start + k];
  }
  return key;
}

namespace detail {

void check_corpus(const char* metric, const std::vector<TokenizedCaption>& candidates,
                  const std::vector<ReferenceSet>& references_per_image) {
  if (candidates.empty()) {
    throw DataError(std::string(metric) + ": empty candidate set");
  }
  if (candidates.size() != references_per_image.size()) {
    throw DataError(std::string(metric) + ": " + std::to_string(candidates.size()) +
                    " candidates vs " + std::to_string(references_per_image.size()) +
                    " reference sets");
  }
  for (const ReferenceSet& refs : references_per_image) {
    if (refs.empty()) {
      throw DataError(std::string(metric) + ": an image has no references");
    }
  }
}

}  // namespace detail

IdfTable IdfTable::build(const std::vector<ReferenceSet>& references_per_image) {
  IdfTable table;
  table.n_images = static_cast<long long>(references_per_image.size());
  for (const ReferenceSet& refs : references_per_image) {
    for (int n = 1; n <= kMaxN; ++n) {
      std::map<std::string, bool> seen;
      for (const TokenizedCaption& ref : refs) {
        if (ref.size() < static_cast<std::size_t>(n)) continue;
        for (std::size_t s = 0; s + n <= ref.size(); ++s) {
          seen[ngram_key(ref, s, n)] = true;
        }
      }
      for (const auto& [key, present] : seen) {
        table.document_frequency[n - 1][key] += 1;
      }
    }
  }
  return table;
}

double IdfTable::idf(const std::string& key, int n) const {
  const auto& freq = document_frequency[n - 1];
  const auto it = freq.find(key);
  const long long df = it == freq.end() ? 0 : it->second;
  return std::log(static_cast<double>(n_images)) -
         std::log(static_cast<double>(std::max<long long>(1, df)));
}

}  // namespace dualcap
