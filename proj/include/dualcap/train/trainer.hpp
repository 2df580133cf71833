#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "dualcap/data/dataset.hpp"
#include "dualcap/data/vocab.hpp"
#include "dualcap/metrics/metrics.hpp"
#include "dualcap/model/decoder.hpp"

namespace dualcap {

enum class LossKind { cross_entropy, self_critical };

std::string to_string(LossKind kind);
LossKind loss_kind_from_string(const std::string& name);

struct TrainConfig {
  LossKind loss_kind = LossKind::cross_entropy;
  int epochs = 1;
  int batch_size = 16;
  unsigned long long seed = 7;

  double lr_initial = 5e-4;
  double lr_decay_factor = 0.8;
  int lr_decay_every_epochs = 3;

  double ss_increment = 0.05;
  int ss_every_epochs = 5;
  double ss_cap = 0.25;

  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  double grad_clip_norm = 0.0;  // 0 disables clipping

  int n_attention_train = 1;
  int n_attention_eval = 0;  // 0 means "same as n_attention_train"
  int eval_beam = 2;
  long long eval_interval_iterations = 0;  // 0 means epoch boundaries only

  // Set when the model was initialized from a finished cross-entropy run;
  // self-critical training refuses to start from scratch.
  bool warm_started = false;

  void validate() const;
  int resolved_n_attention_eval() const;
};

// One evaluation point: mean training loss since the previous evaluation plus
// the validation score and the schedule values in effect.
struct EvalRecord {
  int epoch = 0;
  long long iteration = 0;
  double loss = 0.0;
  double val_cider = 0.0;
  double lr = 0.0;
  double ss_prob = 0.0;
};

std::string to_json_line(const EvalRecord& record);

struct TrainResult {
  ModelParams best_params;
  double best_val_cider = 0.0;
  int best_epoch = -1;
  std::vector<EvalRecord> log;
  long long checkpoints_saved = 0;
};

// Called whenever validation CIDEr-D strictly improves.
using CheckpointSink = std::function<void(const ModelParams&, const EvalRecord&)>;

class Trainer {
 public:
  Trainer(Decoder decoder, TrainConfig config, CaptionDataset train_data,
          CaptionDataset val_data, Vocabulary vocab);

  // Runs the configured number of epochs. Evaluation happens at every epoch
  // boundary and, if eval_interval_iterations > 0, every that many parameter
  // updates as well. Log lines (one JSON object per evaluation) go to
  // log_stream when given; sink fires on every strict validation improvement.
  TrainResult run(std::ostream* log_stream = nullptr,
                  const CheckpointSink& sink = nullptr);

  // Beam-decodes every validation image and scores the batch with CIDEr-D
  // against the validation references.
  double evaluate_validation() const;

  const Decoder& decoder() const { return decoder_; }

 private:
  Decoder decoder_;
  TrainConfig config_;
  CaptionDataset train_data_;
  CaptionDataset val_data_;
  Vocabulary vocab_;
  IdfTable train_idf_;
  IdfTable val_idf_;
};

}  // namespace dualcap
