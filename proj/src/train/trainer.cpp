#include "dualcap/train/trainer.hpp"

#include <cmath>
#include <limits>
#include <ostream>

#include "json.hpp"

#include "dualcap/common/rand.hpp"
#include "dualcap/infer/decode.hpp"
#include "dualcap/train/adam.hpp"
#include "dualcap/train/loss.hpp"
#include "dualcap/train/schedule.hpp"

namespace dualcap {

std::string to_string(LossKind kind) {
  switch (kind) {
    case LossKind::cross_entropy: return "cross_entropy";
    case LossKind::self_critical: return "self_critical";
  }
  throw Error("loss kind: unknown enum value");
}

LossKind loss_kind_from_string(const std::string& name) {
  if (name == "cross_entropy") return LossKind::cross_entropy;
  if (name == "self_critical") return LossKind::self_critical;
  throw DataError("loss kind: unknown name '" + name + "'");
}

void TrainConfig::validate() const {
  if (epochs < 0) throw Error("train config: epochs must be >= 0");
  if (batch_size < 1) throw Error("train config: batch_size must be >= 1");
  if (lr_initial <= 0.0) throw Error("train config: lr_initial must be positive");
  if (lr_decay_factor <= 0.0 || lr_decay_factor > 1.0) {
    throw Error("train config: lr_decay_factor must be in (0, 1]");
  }
  if (lr_decay_every_epochs < 1) {
    throw Error("train config: lr_decay_every_epochs must be >= 1");
  }
  if (ss_increment < 0.0) throw Error("train config: ss_increment must be >= 0");
  if (ss_every_epochs < 1) throw Error("train config: ss_every_epochs must be >= 1");
  if (ss_cap < 0.0 || ss_cap > 1.0) throw Error("train config: ss_cap must be in [0, 1]");
  if (adam_beta1 < 0.0 || adam_beta1 >= 1.0 || adam_beta2 < 0.0 || adam_beta2 >= 1.0) {
    throw Error("train config: adam betas must be in [0, 1)");
  }
  if (adam_eps <= 0.0) throw Error("train config: adam_eps must be positive");
  if (grad_clip_norm < 0.0) throw Error("train config: grad_clip_norm must be >= 0");
  if (n_attention_train < 1) throw Error("train config: n_attention_train must be >= 1");
  if (n_attention_eval < 0) throw Error("train config: n_attention_eval must be >= 0");
  if (eval_beam < 1) throw Error("train config: eval_beam must be >= 1");
  if (eval_interval_iterations < 0) {
    throw Error("train config: eval_interval_iterations must be >= 0");
  }
}

int TrainConfig::resolved_n_attention_eval() const {
  return n_attention_eval > 0 ? n_attention_eval : n_attention_train;
}

std::string to_json_line(const EvalRecord& record) {
  nlohmann::json j;
  j["epoch"] = record.epoch;
  j["iteration"] = record.iteration;
  j["loss"] = record.loss;
  j["val_cider"] = record.val_cider;
  j["lr"] = record.lr;
  j["ss_prob"] = record.ss_prob;
  return j.dump();
}

namespace {

IdfTable build_idf(const CaptionDataset& data) {
  if (data.images.empty()) return IdfTable{};
  std::vector<ReferenceSet> refs;
  refs.reserve(data.images.size());
  for (const auto& img : data.images) refs.push_back(img.reference_tokens);
  return IdfTable::build(refs);
}

double global_grad_norm(const std::vector<std::pair<std::string, Tensor>>& named) {
  double sq = 0.0;
  for (const auto& [name, t] : named) {
    if (!t.has_grad()) continue;
    for (double g : t.grad()) sq += g * g;
  }
  return std::sqrt(sq);
}

void scale_grads(const std::vector<std::pair<std::string, Tensor>>& named, double factor) {
  for (auto& [name, t] : named) {
    Tensor tensor = t;
    if (!tensor.has_grad()) continue;
    for (double& g : tensor.grad()) g *= factor;
  }
}

}  // namespace

Trainer::Trainer(Decoder decoder, TrainConfig config, CaptionDataset train_data,
                 CaptionDataset val_data, Vocabulary vocab)
    : decoder_(std::move(decoder)),
      config_(std::move(config)),
      train_data_(std::move(train_data)),
      val_data_(std::move(val_data)),
      vocab_(std::move(vocab)) {
  config_.validate();
  if (train_data_.images.empty()) throw DataError("trainer: empty training set");
  train_idf_ = build_idf(train_data_);
  val_idf_ = build_idf(val_data_);
}

double Trainer::evaluate_validation() const {
  if (val_data_.images.empty()) return 0.0;
  const int m = config_.resolved_n_attention_eval();
  const int max_len = decoder_.config().max_caption_len;
  std::vector<TokenizedCaption> candidates;
  std::vector<ReferenceSet> references;
  candidates.reserve(val_data_.images.size());
  references.reserve(val_data_.images.size());
  for (const auto& img : val_data_.images) {
    const DecodeResult out =
        beam_search(decoder_, img.features, m, config_.eval_beam, max_len);
    TokenizedCaption words;
    for (const int id : out.tokens) words.push_back(vocab_.lookup(id));
    candidates.push_back(std::move(words));
    references.push_back(img.reference_tokens);
  }
  return cider_d(candidates, references, val_idf_);
}

TrainResult Trainer::run(std::ostream* log_stream, const CheckpointSink& sink) {
  if (config_.loss_kind == LossKind::self_critical && !config_.warm_started) {
    throw DataError(
        "trainer: self-critical training must start from cross-entropy "
        "trained parameters; train with cross_entropy first and warm-start "
        "from that checkpoint");
  }

  std::mt19937_64 rng(config_.seed);
  AdamOptimizer adam(decoder_.params().named(), config_.adam_beta1,
                     config_.adam_beta2, config_.adam_eps);
  const auto named = decoder_.params().named();
  const int max_len = decoder_.config().max_caption_len;
  const int n_att = config_.n_attention_train;

  TrainResult result;
  result.best_params = decoder_.params().clone();
  double best = -std::numeric_limits<double>::infinity();

  long long iteration = 0;
  long long last_eval_iteration = -1;
  double loss_sum = 0.0;
  long long loss_count = 0;

  const auto do_eval = [&](int epoch, double lr, double ss) {
    if (iteration == last_eval_iteration) return;
    last_eval_iteration = iteration;
    EvalRecord record;
    record.epoch = epoch;
    record.iteration = iteration;
    record.loss = loss_count > 0 ? loss_sum / static_cast<double>(loss_count) : 0.0;
    record.val_cider = evaluate_validation();
    record.lr = lr;
    record.ss_prob = ss;
    loss_sum = 0.0;
    loss_count = 0;
    result.log.push_back(record);
    if (log_stream) (*log_stream) << to_json_line(record) << '\n';
    if (record.val_cider > best) {
      best = record.val_cider;
      result.best_val_cider = record.val_cider;
      result.best_epoch = epoch;
      result.best_params = decoder_.params().clone();
      ++result.checkpoints_saved;
      if (sink) sink(result.best_params, record);
    }
  };

  std::vector<std::size_t> order(train_data_.images.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (int epoch = 0; epoch < config_.epochs; ++epoch) {
    const double lr = learning_rate(epoch, config_.lr_initial, config_.lr_decay_factor,
                                    config_.lr_decay_every_epochs);
    const double ss = config_.loss_kind == LossKind::cross_entropy
                          ? scheduled_sampling_prob(epoch, config_.ss_increment,
                                                    config_.ss_every_epochs, config_.ss_cap)
                          : 0.0;
    shuffle_indices(order, rng);

    for (std::size_t start = 0; start < order.size(); start += config_.batch_size) {
      const std::size_t stop =
          std::min(order.size(), start + static_cast<std::size_t>(config_.batch_size));
      const double inv_batch = 1.0 / static_cast<double>(stop - start);
      decoder_.params().zero_grad();

      for (std::size_t k = start; k < stop; ++k) {
        const DatasetImage& img = train_data_.images[order[k]];
        Tape tape;
        TapeScope scope(tape);
        Tensor example_loss;
        if (config_.loss_kind == LossKind::cross_entropy) {
          const int pick = draw_int(rng, static_cast<int>(img.reference_ids.size()));
          example_loss = cross_entropy_loss(decoder_, img.features,
                                            img.reference_ids[pick], n_att, ss, rng);
        } else {
          example_loss = self_critical_loss(decoder_, img.features, img.reference_tokens,
                                            n_att, max_len, train_idf_, vocab_, rng)
                             .loss;
        }
        const double value = example_loss.item();
        if (!std::isfinite(value)) {
          throw NumericError("trainer: non-finite loss at iteration " +
                             std::to_string(iteration) + " (image " +
                             std::to_string(img.image_id) + ")");
        }
        loss_sum += value;
        ++loss_count;
        backward(scalar_mul(example_loss, inv_batch));
      }

      if (config_.grad_clip_norm > 0.0) {
        const double norm = global_grad_norm(named);
        if (norm > config_.grad_clip_norm) {
          scale_grads(named, config_.grad_clip_norm / norm);
        }
      }
      adam.step(lr);
      ++iteration;

      if (config_.eval_interval_iterations > 0 &&
          iteration % config_.eval_interval_iterations == 0) {
        do_eval(epoch, lr, ss);
      }
    }
    do_eval(epoch, lr, ss);
  }

  if (result.best_epoch >= 0) result.best_val_cider = best;
  return result;
}

}  // namespace dualcap
