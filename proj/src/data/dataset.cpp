#include "dualcap/data/dataset.hpp"

#include <map>

#include "dualcap/common/error.hpp"

namespace dualcap {

CaptionDataset assemble_dataset(std::vector<StoredFeatures> features,
                                const std::vector<CaptionRecord>& captions,
                                const Vocabulary& vocab, int max_len, std::string split) {
  std::map<std::uint64_t, const CaptionRecord*> by_id;
  for (const CaptionRecord& record : captions) {
    if (!by_id.emplace(record.image_id, &record).second) {
      throw DataError("dataset: duplicate caption record for image " +
                      std::to_string(record.image_id));
    }
  }

  CaptionDataset dataset;
  dataset.split = std::move(split);
  dataset.images.reserve(features.size());
  for (StoredFeatures& stored : features) {
    const auto it = by_id.find(stored.image_id);
    if (it == by_id.end()) {
      throw DataError("dataset: image " + std::to_string(stored.image_id) +
                      " has features but no captions");
    }
    if (it->second->captions.empty()) {
      throw DataError("dataset: image " + std::to_string(stored.image_id) +
                      " has an empty caption list");
    }
    DatasetImage image;
    image.image_id = stored.image_id;
    image.features = std::move(stored.features);
    for (const std::string& text : it->second->captions) {
      TokenizedCaption tokens = tokenize(text);
      if (tokens.empty()) {
        throw DataError("dataset: image " + std::to_string(stored.image_id) +
                        " has a caption with no tokens");
      }
      image.reference_ids.push_back(vocab.encode_caption(tokens, max_len));
      image.reference_tokens.push_back(std::move(tokens));
    }
    dataset.images.push_back(std::move(image));
  }
  return dataset;
}

}  // namespace dualcap
