#pragma once

#include <string>
#include <vector>

namespace dualcap {

// Caption text normalized for scoring: lowercased, ASCII punctuation
// replaced by spaces, split on whitespace. Deterministic and idempotent.
using TokenizedCaption = std::vector<std::string>;

inline constexpr const char* kTokenizerVersion = "lower-ascii-punct-ws-v1";

TokenizedCaption tokenize(const std::string& text);

std::string join_tokens(const TokenizedCaption& tokens);

}  // namespace dualcap
