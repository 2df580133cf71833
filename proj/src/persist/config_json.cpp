#include "dualcap/persist/config_json.hpp"

namespace dualcap {

void to_json(nlohmann::json& j, const ModelConfig& cfg) {
  j = nlohmann::json{
      {"vocab_size", cfg.vocab_size},
      {"embed_dim", cfg.embed_dim},
      {"hidden_dim", cfg.hidden_dim},
      {"att_hidden_dim", cfg.att_hidden_dim},
      {"feat_dim", cfg.feat_dim},
      {"out_hidden_dim", cfg.out_hidden_dim},
      {"max_caption_len", cfg.max_caption_len},
  };
}

void from_json(const nlohmann::json& j, ModelConfig& cfg) {
  cfg.vocab_size = j.value("vocab_size", cfg.vocab_size);
  cfg.embed_dim = j.value("embed_dim", cfg.embed_dim);
  cfg.hidden_dim = j.value("hidden_dim", cfg.hidden_dim);
  cfg.att_hidden_dim = j.value("att_hidden_dim", cfg.att_hidden_dim);
  cfg.feat_dim = j.value("feat_dim", cfg.feat_dim);
  cfg.out_hidden_dim = j.value("out_hidden_dim", cfg.out_hidden_dim);
  cfg.max_caption_len = j.value("max_caption_len", cfg.max_caption_len);
}

void to_json(nlohmann::json& j, const TrainConfig& cfg) {
  j = nlohmann::json{
      {"loss_kind", to_string(cfg.loss_kind)},
      {"epochs", cfg.epochs},
      {"batch_size", cfg.batch_size},
      {"seed", cfg.seed},
      {"lr_initial", cfg.lr_initial},
      {"lr_decay_factor", cfg.lr_decay_factor},
      {"lr_decay_every_epochs", cfg.lr_decay_every_epochs},
      {"ss_increment", cfg.ss_increment},
      {"ss_every_epochs", cfg.ss_every_epochs},
      {"ss_cap", cfg.ss_cap},
      {"adam_beta1", cfg.adam_beta1},
      {"adam_beta2", cfg.adam_beta2},
      {"adam_eps", cfg.adam_eps},
      {"grad_clip_norm", cfg.grad_clip_norm},
      {"n_attention_train", cfg.n_attention_train},
      {"n_attention_eval", cfg.n_attention_eval},
      {"eval_beam", cfg.eval_beam},
      {"eval_interval_iterations", cfg.eval_interval_iterations},
      {"warm_started", cfg.warm_started},
  };
}

void from_json(const nlohmann::json& j, TrainConfig& cfg) {
  if (j.contains("loss_kind")) {
    cfg.loss_kind = loss_kind_from_string(j.at("loss_kind").get<std::string>());
  }
  cfg.epochs = j.value("epochs", cfg.epochs);
  cfg.batch_size = j.value("batch_size", cfg.batch_size);
  cfg.seed = j.value("seed", cfg.seed);
  cfg.lr_initial = j.value("lr_initial", cfg.lr_initial);
  cfg.lr_decay_factor = j.value("lr_decay_factor", cfg.lr_decay_factor);
  cfg.lr_decay_every_epochs = j.value("lr_decay_every_epochs", cfg.lr_decay_every_epochs);
  cfg.ss_increment = j.value("ss_increment", cfg.ss_increment);
  cfg.ss_every_epochs = j.value("ss_every_epochs", cfg.ss_every_epochs);
  cfg.ss_cap = j.value("ss_cap", cfg.ss_cap);
  cfg.adam_beta1 = j.value("adam_beta1", cfg.adam_beta1);
  cfg.adam_beta2 = j.value("adam_beta2", cfg.adam_beta2);
  cfg.adam_eps = j.value("adam_eps", cfg.adam_eps);
  cfg.grad_clip_norm = j.value("grad_clip_norm", cfg.grad_clip_norm);
  cfg.n_attention_train = j.value("n_attention_train", cfg.n_attention_train);
  cfg.n_attention_eval = j.value("n_attention_eval", cfg.n_attention_eval);
  cfg.eval_beam = j.value("eval_beam", cfg.eval_beam);
  cfg.eval_interval_iterations =
      j.value("eval_interval_iterations", cfg.eval_interval_iterations);
  cfg.warm_started = j.value("warm_started", cfg.warm_started);
}

}  // namespace dualcap
