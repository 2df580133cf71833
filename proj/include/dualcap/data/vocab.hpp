#pragma once

#include <map>
#include <string>
#include <vector>

#include "dualcap/common/tokens.hpp"
#include "dualcap/metrics/tokenize.hpp"

namespace dualcap {

inline constexpr const char* kPadToken = "<pad>";
inline constexpr const char* kBosToken = "<bos>";
inline constexpr const char* kEosToken = "<eos>";
inline constexpr const char* kUnkToken = "<unk>";

// Token <-> id mapping. Ids 0..3 are the reserved pad/bos/eos/unk tokens;
// the rest are corpus tokens ordered by descending frequency (ties broken
// alphabetically).
class Vocabulary {
 public:
  // Builds from tokenized captions. Each caption is truncated to max_len
  // tokens BEFORE counting; tokens must appear strictly more than
  // min_count_exclusive times to be kept.
  static Vocabulary build(const std::vector<TokenizedCaption>& captions,
                          long long min_count_exclusive = 5, int max_len = 16);

  // From a full token list (reserved tokens included, in order).
  static Vocabulary from_tokens(std::vector<std::string> tokens);

  int size() const { return static_cast<int>(tokens_.size()); }
  long long threshold() const { return threshold_; }

  // Unknown tokens encode to the unk id.
  int encode(const std::string& token) const;
  const std::string& lookup(int id) const;

  // Truncates to max_len tokens, encodes, and appends eos.
  std::vector<int> encode_caption(const TokenizedCaption& tokens, int max_len) const;
  // Drops everything at and after the first eos, skips pad/bos.
  TokenizedCaption decode_caption(const std::vector<int>& ids) const;

  // Plain text, one token per line; the line number is the id.
  void save(const std::string& path) const;
  static Vocabulary load(const std::string& path);

 private:
  std::vector<std::string> tokens_;
  std::map<std::string, int> index_;
  long long threshold_ = 5;
};

}  // namespace dualcap
