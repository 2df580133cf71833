#pragma once

#include "dualcap/metrics/metrics.hpp"

namespace dualcap::detail {

// Shared argument validation for the corpus-level scorers.
void check_corpus(const char* metric, const std::vector<TokenizedCaption>& candidates,
                  const std::vector<ReferenceSet>& references_per_image);

}  // namespace dualcap::detail
