#include <algorithm>
#include <cmath>

#include "dualcap/metrics/metrics.hpp"
#include "corpus_check.hpp"

namespace dualcap {

namespace {

constexpr double kSigma = 6.0;

struct TfIdfVector {
  std::map<std::string, double> weights;
  double norm = 0.0;
};

TfIdfVector tfidf_vector(const TokenizedCaption& tokens, int n, const IdfTable& idf) {
  TfIdfVector vec;
  if (tokens.size() >= static_cast<std::size_t>(n)) {
    for (std::size_t s = 0; s + n <= tokens.size(); ++s) {
      vec.weights[ngram_key(tokens, s, n)] += 1.0;
    }
  }
  double sq = 0.0;
  for (auto& [key, w] : vec.weights) {
    w *= idf.idf(key, n);
    sq += w * w;
  }
  vec.norm = std::sqrt(sq);
  return vec;
}

// Clipped cosine: candidate weights are clipped to the reference's before the
// dot product, which stops a candidate from scoring by repeating an n-gram.
double clipped_similarity(const TfIdfVector& cand, const TfIdfVector& ref) {
  if (cand.norm == 0.0 || ref.norm == 0.0) return 0.0;
  double dot = 0.0;
  for (const auto& [key, w] : cand.weights) {
    const auto it = ref.weights.find(key);
    if (it != ref.weights.end()) dot += std::min(w, it->second) * it->second;
  }
  return dot / (cand.norm * ref.norm);
}

}  // namespace

double cider_d_single(const TokenizedCaption& candidate, const ReferenceSet& references,
                      const IdfTable& idf) {
  if (idf.n_images <= 0) throw DataError("cider_d: idf table has an empty corpus");
  if (references.empty()) throw DataError("cider_d: image has no references");

  double total_over_n = 0.0;
  for (int n = 1; n <= IdfTable::kMaxN; ++n) {
    const TfIdfVector cand_vec = tfidf_vector(candidate, n, idf);
    double total = 0.0;
    for (const TokenizedCaption& ref : references) {
      const double delta =
          static_cast<double>(candidate.size()) - static_cast<double>(ref.size());
      const double penalty = std::exp(-(delta * delta) / (2.0 * kSigma * kSigma));
      total += penalty * clipped_similarity(cand_vec, tfidf_vector(ref, n, idf));
    }
    total_over_n += total / static_cast<double>(references.size());
  }
  return 10.0 * total_over_n / static_cast<double>(IdfTable::kMaxN);
}

double cider_d(const std::vector<TokenizedCaption>& candidates,
               const std::vector<ReferenceSet>& references_per_image,
               const IdfTable& idf) {
  detail::check_corpus("cider_d", candidates, references_per_image);
  if (idf.n_images <= 0) throw DataError("cider_d: idf table has an empty corpus");

  double total = 0.0;
  for (std::size_t img = 0; img < candidates.size(); ++img) {
    total += cider_d_single(candidates[img], references_per_image[img], idf);
  }
  return total / static_cast<double>(candidates.size());
}

}  // namespace dualcap
