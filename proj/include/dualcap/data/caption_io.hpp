#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace dualcap {

// One line of a caption file: {"image_id": <int>, "captions": ["...", ...]}.
struct CaptionRecord {
  std::uint64_t image_id = 0;
  std::vector<std::string> captions;
};

std::vector<CaptionRecord> read_caption_file(const std::string& path);
void write_caption_file(const std::string& path, const std::vector<CaptionRecord>& records);

}  // namespace dualcap
