#include "dualcap/persist/checkpoint.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <vector>

#include "json.hpp"

#include "dualcap/persist/config_json.hpp"

namespace dualcap {

namespace {

void put_f32_le(std::string& out, double value) {
  const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(value));
  out.push_back(static_cast<char>(bits & 0xff));
  out.push_back(static_cast<char>((bits >> 8) & 0xff));
  out.push_back(static_cast<char>((bits >> 16) & 0xff));
  out.push_back(static_cast<char>((bits >> 24) & 0xff));
}

double get_f32_le(const std::string& blob, std::size_t at) {
  std::uint32_t bits = 0;
  bits |= static_cast<std::uint32_t>(static_cast<unsigned char>(blob[at]));
  bits |= static_cast<std::uint32_t>(static_cast<unsigned char>(blob[at + 1])) << 8;
  bits |= static_cast<std::uint32_t>(static_cast<unsigned char>(blob[at + 2])) << 16;
  bits |= static_cast<std::uint32_t>(static_cast<unsigned char>(blob[at + 3])) << 24;
  return static_cast<double>(std::bit_cast<float>(bits));
}

void write_file_atomically(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("checkpoint: cannot write " + tmp);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw DataError("checkpoint: short write to " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    throw DataError("checkpoint: cannot move " + tmp + " into place: " + ec.message());
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("checkpoint: cannot open " + path);
  std::string content((std::istreambuf_iterator<char>(in)),
                      std::istreambuf_iterator<char>());
  return content;
}

// Fresh parameter tensors for a config; their shapes are the authority the
// manifest is checked against.
ModelParams expected_params(const ModelConfig& cfg) {
  std::mt19937_64 rng(0);
  return ModelParams::init(cfg, rng);
}

struct TableEntry {
  std::string name;
  Shape shape;
  std::uint64_t offset = 0;
  std::uint64_t bytes = 0;
};

}  // namespace

void save_checkpoint(const ModelParams& params, const CheckpointMeta& meta,
                     const std::string& prefix) {
  meta.model.validate();
  meta.train.validate();

  const ModelParams expected = expected_params(meta.model);
  const auto expected_named = expected.named();
  const auto named = params.named();

  std::string blob;
  nlohmann::json table = nlohmann::json::array();
  for (std::size_t k = 0; k < named.size(); ++k) {
    const auto& [name, tensor] = named[k];
    if (tensor.shape() != expected_named[k].second.shape()) {
      throw ShapeError("checkpoint: tensor " + name + " has shape " +
                       shape_str(tensor.shape()) + " but the model config expects " +
                       shape_str(expected_named[k].second.shape()));
    }
    nlohmann::json entry;
    entry["name"] = name;
    entry["shape"] = tensor.shape();
    entry["offset"] = blob.size();
    entry["bytes"] = static_cast<std::uint64_t>(tensor.numel()) * 4;
    table.push_back(std::move(entry));
    for (const double v : tensor.values()) put_f32_le(blob, v);
  }

  nlohmann::json manifest;
  manifest["format_version"] = kCheckpointFormatVersion;
  manifest["model"] = meta.model;
  manifest["train"] = meta.train;
  manifest["epoch"] = meta.epoch;
  manifest["best_val_cider"] = meta.best_val_cider;
  manifest["tensors"] = std::move(table);

  // Blob first, manifest last: a visible manifest always points at a
  // complete blob.
  write_file_atomically(prefix + ".bin", blob);
  write_file_atomically(prefix + ".json", manifest.dump(2) + "\n");
}

LoadedCheckpoint load_checkpoint(const std::string& prefix) {
  const std::string manifest_text = read_file(prefix + ".json");
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(manifest_text);
  } catch (const nlohmann::json::exception& e) {
    throw DataError("checkpoint: manifest is not valid JSON: " + std::string(e.what()));
  }

  LoadedCheckpoint out;
  try {
    const int version = manifest.at("format_version").get<int>();
    if (version != kCheckpointFormatVersion) {
      throw DataError("checkpoint: unsupported format version " +
                      std::to_string(version) + " (expected " +
                      std::to_string(kCheckpointFormatVersion) + ")");
    }
    out.meta.model = manifest.at("model").get<ModelConfig>();
    out.meta.train = manifest.at("train").get<TrainConfig>();
    out.meta.epoch = manifest.at("epoch").get<int>();
    out.meta.best_val_cider = manifest.at("best_val_cider").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError("checkpoint: malformed manifest: " + std::string(e.what()));
  }
  out.meta.model.validate();

  std::vector<TableEntry> table;
  try {
    for (const auto& entry : manifest.at("tensors")) {
      TableEntry t;
      t.name = entry.at("name").get<std::string>();
      t.shape = entry.at("shape").get<Shape>();
      t.offset = entry.at("offset").get<std::uint64_t>();
      t.bytes = entry.at("bytes").get<std::uint64_t>();
      table.push_back(std::move(t));
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError("checkpoint: malformed tensor table: " + std::string(e.what()));
  }

  out.params = expected_params(out.meta.model);
  const auto named = out.params.named();

  // Every model tensor exactly once, nothing extra.
  for (const auto& [name, tensor] : named) {
    std::size_t hits = 0;
    for (const auto& t : table) hits += (t.name == name) ? 1 : 0;
    if (hits == 0) throw DataError("checkpoint: missing tensor " + name);
    if (hits > 1) throw DataError("checkpoint: duplicate tensor " + name);
  }
  for (const auto& t : table) {
    const bool known = std::any_of(named.begin(), named.end(),
                                   [&](const auto& p) { return p.first == t.name; });
    if (!known) throw DataError("checkpoint: unknown tensor " + t.name);
  }

  const std::string blob = read_file(prefix + ".bin");
  for (const auto& [name, tensor] : named) {
    const auto it = std::find_if(table.begin(), table.end(),
                                 [&](const TableEntry& t) { return t.name == name; });
    if (it->shape != tensor.shape()) {
      throw DataError("checkpoint: tensor " + name + " has shape " +
                      shape_str(it->shape) + " but the model config expects " +
                      shape_str(tensor.shape()));
    }
    const std::uint64_t need = static_cast<std::uint64_t>(tensor.numel()) * 4;
    if (it->bytes != need) {
      throw DataError("checkpoint: tensor " + name + " claims " +
                      std::to_string(it->bytes) + " bytes but its shape needs " +
                      std::to_string(need));
    }
    if (it->offset + it->bytes > blob.size()) {
      throw DataError("checkpoint: tensor " + name + " at offset " +
                      std::to_string(it->offset) + " needs " + std::to_string(it->bytes) +
                      " bytes but the blob ends at byte " + std::to_string(blob.size()));
    }
  }

  // Offsets must tile the blob exactly.
  std::vector<TableEntry> by_offset = table;
  std::sort(by_offset.begin(), by_offset.end(),
            [](const TableEntry& a, const TableEntry& b) { return a.offset < b.offset; });
  std::uint64_t cursor = 0;
  for (const auto& t : by_offset) {
    if (t.offset != cursor) {
      throw DataError("checkpoint: tensor " + t.name + " at offset " +
                      std::to_string(t.offset) + " leaves the blob mistiled (expected " +
                      "offset " + std::to_string(cursor) + ")");
    }
    cursor += t.bytes;
  }
  if (cursor != blob.size()) {
    throw DataError("checkpoint: tensor table covers " + std::to_string(cursor) +
                    " bytes but the blob has " + std::to_string(blob.size()));
  }

  for (const auto& [name, tensor] : named) {
    const auto it = std::find_if(table.begin(), table.end(),
                                 [&](const TableEntry& t) { return t.name == name; });
    Tensor dst = tensor;
    auto& values = dst.values();
    for (std::size_t i = 0; i < values.size(); ++i) {
      values[i] = get_f32_le(blob, static_cast<std::size_t>(it->offset) + 4 * i);
    }
  }
  return out;
}

}  // namespace dualcap
