#pragma once

#include <string>
#include <vector>

#include "dualcap/data/caption_io.hpp"
#include "dualcap/data/feature_io.hpp"
#include "dualcap/data/vocab.hpp"

namespace dualcap {

// One image ready for training/evaluation: features plus references both as
// scoring tokens and as id sequences (truncated, eos-terminated).
struct DatasetImage {
  std::uint64_t image_id = 0;
  ImageFeatures features;
  std::vector<TokenizedCaption> reference_tokens;
  std::vector<std::vector<int>> reference_ids;
};

struct CaptionDataset {
  std::string split;
  std::vector<DatasetImage> images;
};

// Joins features and captions by image_id (order follows the feature file).
// Every image must have at least one caption; ids must line up one-to-one.
CaptionDataset assemble_dataset(std::vector<StoredFeatures> features,
                                const std::vector<CaptionRecord>& captions,
                                const Vocabulary& vocab, int max_len, std::string split);

}  // namespace dualcap
