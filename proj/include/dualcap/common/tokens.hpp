#pragma once

namespace dualcap {

// Reserved token ids shared by the vocabulary, the decoder and the trainers.
inline constexpr int kPadId = 0;
inline constexpr int kBosId = 1;
inline constexpr int kEosId = 2;
inline constexpr int kUnkId = 3;
inline constexpr int kNumReservedTokens = 4;

}  // namespace dualcap
