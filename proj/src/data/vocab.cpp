#include "dualcap/data/vocab.hpp"

#include <algorithm>
#include <fstream>

#include "dualcap/common/error.hpp"

namespace dualcap {

namespace {

std::vector<std::string> reserved_tokens() {
  return {kPadToken, kBosToken, kEosToken, kUnkToken};
}

}  // namespace

Vocabulary Vocabulary::build(const std::vector<TokenizedCaption>& captions,
                             long long min_count_exclusive, int max_len) {
  if (captions.empty()) throw DataError("vocab: empty caption corpus");
  std::map<std::string, long long> counts;
  for (const TokenizedCaption& caption : captions) {
    const std::size_t limit = std::min(caption.size(), static_cast<std::size_t>(max_len));
    for (std::size_t k = 0; k < limit; ++k) counts[caption[k]] += 1;
  }
  std::vector<std::pair<std::string, long long>> kept;
  for (const auto& [token, count] : counts) {
    if (count > min_count_exclusive) kept.emplace_back(token, count);
  }
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  std::vector<std::string> tokens = reserved_tokens();
  for (const auto& [token, count] : kept) tokens.push_back(token);
  Vocabulary vocab = from_tokens(std::move(tokens));
  vocab.threshold_ = min_count_exclusive;
  return vocab;
}

Vocabulary Vocabulary::from_tokens(std::vector<std::string> tokens) {
  const std::vector<std::string> reserved = reserved_tokens();
  if (tokens.size() < reserved.size()) {
    throw DataError("vocab: token list shorter than the reserved prefix");
  }
  for (std::size_t i = 0; i < reserved.size(); ++i) {
    if (tokens[i] != reserved[i]) {
      throw DataError("vocab: line " + std::to_string(i) + " must be " + reserved[i] +
                      ", got " + tokens[i]);
    }
  }
  Vocabulary vocab;
  vocab.tokens_ = std::move(tokens);
  for (std::size_t id = 0; id < vocab.tokens_.size(); ++id) {
    const auto [it, inserted] = vocab.index_.emplace(vocab.tokens_[id], (int)id);
    if (!inserted) throw DataError("vocab: duplicate token " + vocab.tokens_[id]);
  }
  return vocab;
}

int Vocabulary::encode(const std::string& token) const {
  const auto it = index_.find(token);
  return it == index_.end() ? kUnkId : it->second;
}

const std::string& Vocabulary::lookup(int id) const {
  if (id < 0 || id >= size()) {
    throw DataError("vocab: id " + std::to_string(id) + " outside [0, " +
                    std::to_string(size()) + ")");
  }
  return tokens_[id];
}

std::vector<int> Vocabulary::encode_caption(const TokenizedCaption& tokens,
                                            int max_len) const {
  std::vector<int> ids;
  const std::size_t limit = std::min(tokens.size(), static_cast<std::size_t>(max_len));
  ids.reserve(limit + 1);
  for (std::size_t k = 0; k < limit; ++k) ids.push_back(encode(tokens[k]));
  ids.push_back(kEosId);
  return ids;
}

TokenizedCaption Vocabulary::decode_caption(const std::vector<int>& ids) const {
  TokenizedCaption tokens;
  for (const int id : ids) {
    if (id == kEosId) break;
    if (id == kPadId || id == kBosId) continue;
    tokens.push_back(lookup(id));
  }
  return tokens;
}

void Vocabulary::save(const std::string& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("vocab: cannot write " + path);
  for (const std::string& token : tokens_) out << token << '\n';
  if (!out) throw DataError("vocab: write failed for " + path);
}

Vocabulary Vocabulary::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("vocab: cannot read " + path);
  std::vector<std::string> tokens;
  std::string line;
  while (std::getline(in, line)) tokens.push_back(line);
  return from_tokens(std::move(tokens));
}

}  // namespace dualcap
