#include "dualcap/data/caption_io.hpp"

#include <fstream>

#include "dualcap/common/error.hpp"
#include "json.hpp"

namespace dualcap {

std::vector<CaptionRecord> read_caption_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("captions: cannot read " + path);
  std::vector<CaptionRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json parsed;
    try {
      parsed = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw DataError("captions: " + path + " line " + std::to_string(line_no) + ": " +
                      e.what());
    }
    if (!parsed.is_object() || !parsed.contains("image_id") || !parsed.contains("captions")) {
      throw DataError("captions: " + path + " line " + std::to_string(line_no) +
                      ": need {image_id, captions}");
    }
    CaptionRecord record;
    record.image_id = parsed.at("image_id").get<std::uint64_t>();
    for (const auto& caption : parsed.at("captions")) {
      record.captions.push_back(caption.get<std::string>());
    }
    records.push_back(std::move(record));
  }
  return records;
}

void write_caption_file(const std::string& path, const std::vector<CaptionRecord>& records) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("captions: cannot write " + path);
  for (const CaptionRecord& record : records) {
    nlohmann::json obj;
    obj["image_id"] = record.image_id;
    obj["captions"] = record.captions;
    out << obj.dump() << '\n';
  }
  if (!out) throw DataError("captions: write failed for " + path);
}

}  // namespace dualcap
