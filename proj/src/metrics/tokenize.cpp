#include "dualcap/metrics/tokenize.hpp"

#include <cctype>
#include <sstream>

namespace dualcap {

TokenizedCaption tokenize(const std::string& text) {
  std::string cleaned;
  cleaned.reserve(text.size());
  for (const char ch : text) {
    const auto u = static_cast<unsigned char>(ch);
    if (std::ispunct(u)) {
      cleaned.push_back(' ');
    } else {
      cleaned.push_back(static_cast<char>(std::tolower(u)));
    }
  }
  TokenizedCaption tokens;
  std::istringstream stream(cleaned);
  std::string token;
  while (stream >> token) tokens.push_back(token);
  return tokens;
}

std::string join_tokens(const TokenizedCaption& tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i > 0) out.push_back(' ');
    out += tokens[i];
  }
  return out;
}

}  // namespace dualcap
