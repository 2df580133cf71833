#pragma once

#include <string>

#include "dualcap/model/params.hpp"
#include "dualcap/train/trainer.hpp"

namespace dualcap {

inline constexpr int kCheckpointFormatVersion = 1;

struct CheckpointMeta {
  ModelConfig model;
  TrainConfig train;
  int epoch = 0;
  double best_val_cider = 0.0;
};

struct LoadedCheckpoint {
  ModelParams params;
  CheckpointMeta meta;
};

// A checkpoint is a pair of files under one prefix: <prefix>.json holds the
// manifest (format version, both configs, epoch, best validation score, and
// a named-tensor table with byte offsets and shapes) and <prefix>.bin holds
// the values as little-endian 32-bit floats, tensor after tensor. Each file
// is written to a temporary sibling and renamed into place; the manifest is
// renamed last, so a readable manifest always refers to a complete blob.
void save_checkpoint(const ModelParams& params, const CheckpointMeta& meta,
                     const std::string& prefix);

// Validates version, tensor-table completeness, shapes against the stored
// model config, and that the offsets tile the blob exactly; every rejection
// names the offending tensor or byte offset. Values come back widened from
// 32-bit storage.
LoadedCheckpoint load_checkpoint(const std::string& prefix);

}  // namespace dualcap
