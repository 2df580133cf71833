#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dualcap/model/features.hpp"

namespace dualcap {

// Binary region-feature file, little-endian:
//   magic "AMTF" | u32 version=1 | u32 n_images | u32 n_regions | u32 dim
// then per image: u64 image_id | n_regions*dim float32, row-major.
// Values are stored at 32-bit precision; the mean is recomputed on read.
struct StoredFeatures {
  std::uint64_t image_id = 0;
  ImageFeatures features;
};

inline constexpr std::uint32_t kFeatureFileVersion = 1;

void write_features(const std::string& path, const std::vector<StoredFeatures>& images);
std::vector<StoredFeatures> read_features(const std::string& path);

}  // namespace dualcap
