#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "dualcap/data/dataset.hpp"
#include "dualcap/data/synthetic.hpp"
#include "dualcap/infer/decode.hpp"
#include "dualcap/persist/checkpoint.hpp"
#include "dualcap/persist/config_json.hpp"
#include "dualcap/tensor/grad_check.hpp"
#include "dualcap/train/loss.hpp"
#include "dualcap/train/trainer.hpp"

namespace {

using namespace dualcap;
namespace fs = std::filesystem;
using nlohmann::json;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

constexpr std::uint64_t kInitSeedSalt = 0x6d6f64656cULL;

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw DataError(path + " is not valid JSON: " + e.what());
  }
}

void write_json_file(const std::string& path, const json& j) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write " + path);
  out << j.dump(2) << '\n';
}

void ensure_out_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataError("cannot create directory " + dir + ": " + ec.message());
}

std::string join_path(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

std::vector<int> parse_int_list(const std::string& text, const std::string& flag) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const int v = std::stoi(item, &used);
      if (used != item.size() || v < 1) throw std::invalid_argument(item);
      out.push_back(v);
    } catch (const std::exception&) {
      throw UsageError(flag + ": expected a comma-separated list of positive "
                       "integers, got '" + text + "'");
    }
  }
  if (out.empty()) throw UsageError(flag + ": empty list");
  return out;
}

CaptionDataset load_split(const std::string& data_dir, const std::string& split,
                          const Vocabulary& vocab, int max_len) {
  auto features = read_features(join_path(data_dir, split + ".feat"));
  const auto captions = read_caption_file(join_path(data_dir, split + ".jsonl"));
  return assemble_dataset(std::move(features), captions, vocab, max_len, split);
}

struct CorpusScores {
  double bleu4 = 0.0;
  double rouge_l = 0.0;
  double cider = 0.0;
  int n_images = 0;
};

CorpusScores evaluate_corpus(const Decoder& decoder, const CaptionDataset& data,
                             const Vocabulary& vocab, int m_attention, int beam) {
  std::vector<TokenizedCaption> candidates;
  std::vector<ReferenceSet> references;
  for (const auto& img : data.images) {
    const DecodeResult out = beam_search(decoder, img.features, m_attention, beam,
                                         decoder.config().max_caption_len);
    TokenizedCaption words;
    for (const int id : out.tokens) words.push_back(vocab.lookup(id));
    candidates.push_back(std::move(words));
    references.push_back(img.reference_tokens);
  }
  CorpusScores scores;
  scores.n_images = static_cast<int>(data.images.size());
  scores.bleu4 = bleu4(candidates, references);
  scores.rouge_l = rouge_l(candidates, references);
  scores.cider = cider_d(candidates, references, IdfTable::build(references));
  return scores;
}

json scores_to_json(const CorpusScores& s) {
  return json{{"bleu4", s.bleu4},
              {"rouge_l", s.rouge_l},
              {"cider_d", s.cider},
              {"n_images", s.n_images}};
}

// ---------------------------------------------------------------------------
// gen-data

struct GenDataArgs {
  std::string out;
  std::uint64_t seed = SyntheticWorld{}.seed;
  int train_images = 500;
  int val_images = 100;
  int test_images = 100;
};

void write_truths(const std::string& path, const SyntheticWorld& world,
                  const std::vector<SyntheticTruth>& truths) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write " + path);
  for (const auto& t : truths) {
    json j{{"image_id", t.image_id},
           {"primary_object", world.objects[static_cast<std::size_t>(t.primary_object)]},
           {"primary_color", world.colors[static_cast<std::size_t>(t.primary_color)]},
           {"secondary_object",
            world.objects[static_cast<std::size_t>(t.secondary_object)]},
           {"secondary_color",
            world.colors[static_cast<std::size_t>(t.secondary_color)]}};
    out << j.dump() << '\n';
  }
}

int run_gen_data(const GenDataArgs& args) {
  if (args.train_images < 1 || args.val_images < 1 || args.test_images < 1) {
    throw UsageError("gen-data: image counts must be positive");
  }
  SyntheticWorld world;
  world.seed = args.seed;
  world.validate();

  ensure_out_dir(args.out);
  json resolved{{"command", "gen-data"},
                {"out", args.out},
                {"seed", world.seed},
                {"train_images", args.train_images},
                {"val_images", args.val_images},
                {"test_images", args.test_images},
                {"objects", world.objects},
                {"colors", world.colors},
                {"templates", world.templates},
                {"n_regions", world.n_regions},
                {"feat_dim", world.feat_dim},
                {"noise", world.noise}};
  write_json_file(join_path(args.out, "resolved-gen-data.json"), resolved);

  const SyntheticDataset data =
      generate_synthetic(world, args.train_images, args.val_images, args.test_images);
  const auto emit = [&](const std::string& split, const SyntheticSplit& s) {
    write_features(join_path(args.out, split + ".feat"), s.features);
    write_caption_file(join_path(args.out, split + ".jsonl"), s.captions);
    write_truths(join_path(args.out, split + ".truth.jsonl"), world, s.truths);
    std::cout << split << ": " << s.features.size() << " images\n";
  };
  emit("train", data.train);
  emit("val", data.val);
  emit("test", data.test);
  std::cout << "dataset written to " << args.out << '\n';
  return 0;
}

// ---------------------------------------------------------------------------
// build-vocab

struct BuildVocabArgs {
  std::string data;
  std::string out;
  long long min_count = 5;
  int max_len = 16;
};

int run_build_vocab(const BuildVocabArgs& args) {
  if (args.max_len < 1) throw UsageError("build-vocab: --max-len must be positive");
  if (args.min_count < 0) throw UsageError("build-vocab: --min-count must be >= 0");
  ensure_out_dir(args.out);
  write_json_file(join_path(args.out, "resolved-build-vocab.json"),
                  json{{"command", "build-vocab"},
                       {"data", args.data},
                       {"out", args.out},
                       {"min_count", args.min_count},
                       {"max_len", args.max_len}});

  const auto records = read_caption_file(join_path(args.data, "train.jsonl"));
  std::vector<TokenizedCaption> corpus;
  for (const auto& rec : records) {
    for (const auto& text : rec.captions) corpus.push_back(tokenize(text));
  }
  const Vocabulary vocab = Vocabulary::build(corpus, args.min_count, args.max_len);
  const std::string path = join_path(args.out, "vocab.txt");
  vocab.save(path);
  std::cout << "vocabulary of " << vocab.size() << " tokens (count > " << args.min_count
            << ") written to " << path << '\n';
  return 0;
}

// ---------------------------------------------------------------------------
// train

struct TrainArgs {
  std::string data;
  std::string vocab;
  std::string out;
  std::string config;
  std::string init;
  std::string loss;
  std::uint64_t seed = 0;
  int epochs = 0;
  int train_attend = 0;
  int eval_attend = 0;
  int beam = 0;
  long long eval_interval = -1;
  bool has_seed = false, has_epochs = false, has_loss = false, has_train_attend = false,
       has_eval_attend = false, has_beam = false, has_interval = false;
};

ModelConfig resolve_model_config(const json& config_json, int vocab_size, int feat_dim) {
  ModelConfig cfg;
  if (config_json.contains("model")) cfg = config_json.at("model").get<ModelConfig>();
  cfg.vocab_size = vocab_size;
  cfg.feat_dim = feat_dim;
  cfg.validate();
  return cfg;
}

TrainConfig resolve_train_config(const json& config_json, const TrainArgs& args) {
  TrainConfig tc;
  if (config_json.contains("train")) tc = config_json.at("train").get<TrainConfig>();
  if (args.has_seed) tc.seed = args.seed;
  if (args.has_epochs) tc.epochs = args.epochs;
  if (args.has_loss) tc.loss_kind = loss_kind_from_string(args.loss);
  if (args.has_train_attend) tc.n_attention_train = args.train_attend;
  if (args.has_eval_attend) tc.n_attention_eval = args.eval_attend;
  if (args.has_beam) tc.eval_beam = args.beam;
  if (args.has_interval) tc.eval_interval_iterations = args.eval_interval;
  tc.warm_started = !args.init.empty();
  return tc;
}

void check_checkpoint_matches(const ModelConfig& from_ckpt, const ModelConfig& resolved) {
  const auto mismatch = [](const char* field, int a, int b) {
    throw DataError(std::string("warm start: checkpoint ") + field + " " +
                    std::to_string(a) + " does not match the current data/config " +
                    std::to_string(b));
  };
  if (from_ckpt.vocab_size != resolved.vocab_size) {
    mismatch("vocab_size", from_ckpt.vocab_size, resolved.vocab_size);
  }
  if (from_ckpt.feat_dim != resolved.feat_dim) {
    mismatch("feat_dim", from_ckpt.feat_dim, resolved.feat_dim);
  }
  if (from_ckpt.embed_dim != resolved.embed_dim ||
      from_ckpt.hidden_dim != resolved.hidden_dim ||
      from_ckpt.att_hidden_dim != resolved.att_hidden_dim ||
      from_ckpt.out_hidden_dim != resolved.out_hidden_dim) {
    throw DataError("warm start: checkpoint model dimensions do not match the config");
  }
}

int run_train(const TrainArgs& args) {
  const json config_json = args.config.empty() ? json::object() : read_json_file(args.config);
  const Vocabulary vocab = Vocabulary::load(args.vocab);

  auto train_features = read_features(join_path(args.data, "train.feat"));
  if (train_features.empty()) throw DataError("train: empty feature file");
  const int feat_dim = train_features[0].features.feat_dim();

  ModelConfig mcfg = resolve_model_config(config_json, vocab.size(), feat_dim);
  TrainConfig tc = resolve_train_config(config_json, args);
  tc.validate();

  ModelParams params;
  if (!args.init.empty()) {
    LoadedCheckpoint warm = load_checkpoint(args.init);
    check_checkpoint_matches(warm.meta.model, mcfg);
    mcfg.max_caption_len = warm.meta.model.max_caption_len;
    params = warm.params;
  } else {
    std::mt19937_64 init_rng(tc.seed ^ kInitSeedSalt);
    params = ModelParams::init(mcfg, init_rng);
  }

  const auto captions = read_caption_file(join_path(args.data, "train.jsonl"));
  CaptionDataset train_ds = assemble_dataset(std::move(train_features), captions, vocab,
                                             mcfg.max_caption_len, "train");
  CaptionDataset val_ds = load_split(args.data, "val", vocab, mcfg.max_caption_len);

  ensure_out_dir(args.out);
  write_json_file(join_path(args.out, "resolved-train.json"),
                  json{{"command", "train"},
                       {"data", args.data},
                       {"vocab", args.vocab},
                       {"out", args.out},
                       {"init", args.init},
                       {"model", mcfg},
                       {"train", tc}});

  const std::string log_path = join_path(args.out, "log.jsonl");
  std::ofstream log(log_path, std::ios::trunc);
  if (!log) throw DataError("cannot write " + log_path);
  const std::string ckpt_prefix = join_path(args.out, "checkpoint");

  Trainer trainer(Decoder(mcfg, params), tc, std::move(train_ds), std::move(val_ds), vocab);
  const TrainResult result =
      trainer.run(&log, [&](const ModelParams& best, const EvalRecord& at) {
        CheckpointMeta meta;
        meta.model = mcfg;
        meta.train = tc;
        meta.epoch = at.epoch;
        meta.best_val_cider = at.val_cider;
        save_checkpoint(best, meta, ckpt_prefix);
      });

  write_json_file(join_path(args.out, "train-summary.json"),
                  json{{"best_epoch", result.best_epoch},
                       {"best_val_cider", result.best_val_cider},
                       {"checkpoints_saved", result.checkpoints_saved},
                       {"evaluations", result.log.size()}});
  std::cout << "trained " << tc.epochs << " epochs (" << to_string(tc.loss_kind)
            << ", attend " << tc.n_attention_train << ")\n";
  std::cout << "best validation CIDEr-D " << result.best_val_cider << " at epoch "
            << result.best_epoch << '\n';
  std::cout << "checkpoint: " << ckpt_prefix << ".json / .bin\n";
  std::cout << "log: " << log_path << '\n';
  return 0;
}

// ---------------------------------------------------------------------------
// eval

struct EvalArgs {
  std::string data;
  std::string split = "test";
  std::string vocab;
  std::string ckpt;
  std::string out;
  int attend = 0;  // 0 = the checkpoint's training setting
  int beam = 2;
};

int run_eval(const EvalArgs& args) {
  if (args.beam < 1) throw UsageError("eval: --beam must be >= 1");
  if (args.attend < 0) throw UsageError("eval: --attend must be >= 0");
  const LoadedCheckpoint ckpt = load_checkpoint(args.ckpt);
  const Vocabulary vocab = Vocabulary::load(args.vocab);
  if (vocab.size() != ckpt.meta.model.vocab_size) {
    throw DataError("eval: vocabulary has " + std::to_string(vocab.size()) +
                    " tokens but the checkpoint was trained with " +
                    std::to_string(ckpt.meta.model.vocab_size));
  }
  const int m = args.attend > 0 ? args.attend : ckpt.meta.train.n_attention_train;
  const CaptionDataset data =
      load_split(args.data, args.split, vocab, ckpt.meta.model.max_caption_len);
  const Decoder decoder(ckpt.meta.model, ckpt.params);
  const CorpusScores scores = evaluate_corpus(decoder, data, vocab, m, args.beam);

  json report = scores_to_json(scores);
  report["split"] = args.split;
  report["attend"] = m;
  report["beam"] = args.beam;
  report["checkpoint"] = args.ckpt;
  std::cout << report.dump(2) << '\n';
  if (!args.out.empty()) {
    ensure_out_dir(args.out);
    write_json_file(join_path(args.out, "resolved-eval.json"),
                    json{{"command", "eval"},
                         {"data", args.data},
                         {"split", args.split},
                         {"vocab", args.vocab},
                         {"ckpt", args.ckpt},
                         {"attend", m},
                         {"beam", args.beam}});
    write_json_file(join_path(args.out, "eval.json"), report);
  }
  return 0;
}

// ---------------------------------------------------------------------------
// caption

struct CaptionArgs {
  std::string features;
  std::string vocab;
  std::string ckpt;
  std::string trace_path;
  std::string out;
  std::uint64_t image_id = 0;
  bool has_image_id = false;
  int attend = 0;
  int beam = 1;
};

int run_caption(const CaptionArgs& args) {
  if (args.beam < 1) throw UsageError("caption: --beam must be >= 1");
  if (args.attend < 0) throw UsageError("caption: --attend must be >= 0");
  if (!args.trace_path.empty() && args.beam != 1) {
    throw UsageError("caption: --trace requires greedy decoding (--beam 1)");
  }
  const LoadedCheckpoint ckpt = load_checkpoint(args.ckpt);
  const Vocabulary vocab = Vocabulary::load(args.vocab);
  if (vocab.size() != ckpt.meta.model.vocab_size) {
    throw DataError("caption: vocabulary size does not match the checkpoint");
  }
  const auto images = read_features(args.features);
  const StoredFeatures* chosen = nullptr;
  if (args.has_image_id) {
    for (const auto& img : images) {
      if (img.image_id == args.image_id) chosen = &img;
    }
    if (!chosen) {
      throw DataError("caption: image " + std::to_string(args.image_id) + " not in " +
                      args.features);
    }
  } else {
    if (images.empty()) throw DataError("caption: empty feature file");
    chosen = &images.front();
  }

  const int m = args.attend > 0 ? args.attend : ckpt.meta.train.n_attention_train;
  const Decoder decoder(ckpt.meta.model, ckpt.params);
  const int max_len = ckpt.meta.model.max_caption_len;

  std::vector<int> tokens;
  AttentionTrace trace;
  if (args.beam == 1) {
    tokens = greedy_decode(decoder, chosen->features, m, max_len,
                           args.trace_path.empty() ? nullptr : &trace);
  } else {
    tokens = beam_search(decoder, chosen->features, m, args.beam, max_len).tokens;
  }
  TokenizedCaption words;
  for (const int id : tokens) words.push_back(vocab.lookup(id));
  const std::string text = join_tokens(words);
  std::cout << text << '\n';

  if (!args.trace_path.empty()) {
    json weights = json::array();
    for (const auto& w : trace.weights) weights.push_back(w.values());
    write_json_file(args.trace_path, json{{"image_id", chosen->image_id},
                                          {"attend", m},
                                          {"weights", weights}});
  }
  if (!args.out.empty()) {
    ensure_out_dir(args.out);
    write_json_file(join_path(args.out, "resolved-caption.json"),
                    json{{"command", "caption"},
                         {"features", args.features},
                         {"image_id", chosen->image_id},
                         {"ckpt", args.ckpt},
                         {"attend", m},
                         {"beam", args.beam}});
    write_json_file(join_path(args.out, "caption.json"),
                    json{{"image_id", chosen->image_id},
                         {"caption", text},
                         {"tokens", tokens},
                         {"attend", m},
                         {"beam", args.beam}});
  }
  return 0;
}

// ---------------------------------------------------------------------------
// compare

struct CompareArgs {
  std::string data;
  std::string vocab;
  std::string config;
  std::string out;
  std::string split = "test";
  std::string train_attend = "1,2,3";
  std::string eval_attend = "1,2,3";
  int beam = 2;
  std::uint64_t seed = 0;
  int epochs = 0;
  bool has_seed = false, has_epochs = false;
};

int run_compare(const CompareArgs& args) {
  if (args.beam < 1) throw UsageError("compare: --beam must be >= 1");
  const std::vector<int> train_ns = parse_int_list(args.train_attend, "--train-attend");
  const std::vector<int> eval_ms = parse_int_list(args.eval_attend, "--eval-attend");

  const json config_json = args.config.empty() ? json::object() : read_json_file(args.config);
  const Vocabulary vocab = Vocabulary::load(args.vocab);
  auto train_features = read_features(join_path(args.data, "train.feat"));
  if (train_features.empty()) throw DataError("compare: empty feature file");
  const int feat_dim = train_features[0].features.feat_dim();

  const ModelConfig mcfg = resolve_model_config(config_json, vocab.size(), feat_dim);
  TrainConfig base;
  if (config_json.contains("train")) base = config_json.at("train").get<TrainConfig>();
  if (args.has_seed) base.seed = args.seed;
  if (args.has_epochs) base.epochs = args.epochs;
  base.eval_beam = args.beam;
  base.validate();

  ensure_out_dir(args.out);
  write_json_file(join_path(args.out, "resolved-compare.json"),
                  json{{"command", "compare"},
                       {"data", args.data},
                       {"vocab", args.vocab},
                       {"out", args.out},
                       {"split", args.split},
                       {"train_attend", train_ns},
                       {"eval_attend", eval_ms},
                       {"beam", args.beam},
                       {"model", mcfg},
                       {"train", base}});

  const auto captions = read_caption_file(join_path(args.data, "train.jsonl"));
  const CaptionDataset train_ds = assemble_dataset(train_features, captions, vocab,
                                                   mcfg.max_caption_len, "train");
  const CaptionDataset val_ds = load_split(args.data, "val", vocab, mcfg.max_caption_len);
  const CaptionDataset eval_ds =
      load_split(args.data, args.split, vocab, mcfg.max_caption_len);

  json rows = json::array();
  std::vector<std::vector<CorpusScores>> grid;
  for (const int n : train_ns) {
    TrainConfig tc = base;
    tc.n_attention_train = n;
    tc.seed = base.seed + static_cast<std::uint64_t>(n);
    std::mt19937_64 init_rng(tc.seed ^ kInitSeedSalt);
    ModelParams params = ModelParams::init(mcfg, init_rng);
    const std::string prefix = join_path(args.out, "model-n" + std::to_string(n));

    Trainer trainer(Decoder(mcfg, params), tc, train_ds, val_ds, vocab);
    std::ofstream log(prefix + ".log.jsonl", std::ios::trunc);
    const TrainResult result =
        trainer.run(&log, [&](const ModelParams& best, const EvalRecord& at) {
          CheckpointMeta meta;
          meta.model = mcfg;
          meta.train = tc;
          meta.epoch = at.epoch;
          meta.best_val_cider = at.val_cider;
          save_checkpoint(best, meta, prefix);
        });
    std::cout << "trained attend=" << n << ": best val CIDEr-D " << result.best_val_cider
              << " at epoch " << result.best_epoch << '\n';

    // Score from the saved checkpoint so every cell is reproducible by a
    // standalone eval run against the same files.
    const LoadedCheckpoint saved = load_checkpoint(prefix);
    const Decoder best_decoder(saved.meta.model, saved.params);
    json cells = json::array();
    std::vector<CorpusScores> row;
    for (const int m : eval_ms) {
      const CorpusScores s = evaluate_corpus(best_decoder, eval_ds, vocab, m, args.beam);
      json cell = scores_to_json(s);
      cell["eval_attend"] = m;
      cells.push_back(std::move(cell));
      row.push_back(s);
    }
    rows.push_back(json{{"train_attend", n},
                        {"checkpoint", prefix},
                        {"best_val_cider", result.best_val_cider},
                        {"cells", cells}});
    grid.push_back(std::move(row));
  }

  write_json_file(join_path(args.out, "compare.json"), json{{"split", args.split},
                                                            {"beam", args.beam},
                                                            {"rows", rows}});

  std::cout << "\nBLEU-4 / ROUGE-L / CIDEr-D on " << args.split << " (beam " << args.beam
            << ")\n";
  std::cout << std::left << std::setw(12) << "train\\eval";
  for (const int m : eval_ms) std::cout << std::setw(26) << ("M=" + std::to_string(m));
  std::cout << '\n';
  std::cout << std::fixed << std::setprecision(3);
  for (std::size_t i = 0; i < train_ns.size(); ++i) {
    std::cout << std::setw(12) << ("N=" + std::to_string(train_ns[i]));
    for (const auto& s : grid[i]) {
      std::ostringstream cell;
      cell << std::fixed << std::setprecision(3) << s.bleu4 << " / " << s.rouge_l << " / "
           << s.cider;
      std::cout << std::setw(26) << cell.str();
    }
    std::cout << '\n';
  }
  std::cout << "grid: " << join_path(args.out, "compare.json") << '\n';
  return 0;
}

// ---------------------------------------------------------------------------
// grad-check

struct GradCheckArgs {
  std::uint64_t seed = 7;
  std::string out;
};

int run_grad_check(const GradCheckArgs& args) {
  ModelConfig cfg;
  cfg.vocab_size = 32;
  cfg.embed_dim = 8;
  cfg.hidden_dim = 16;
  cfg.att_hidden_dim = 8;
  cfg.feat_dim = 12;
  cfg.out_hidden_dim = 16;
  cfg.max_caption_len = 16;

  std::mt19937_64 rng(args.seed);
  const Decoder decoder(cfg, ModelParams::init(cfg, rng));
  const ImageFeatures features =
      ImageFeatures::from_regions(Tensor::uniform({4, cfg.feat_dim}, -1.0, 1.0, rng));
  const std::vector<int> target = {7, 19, 4, kEosId};

  const auto loss_fn = [&decoder, &features, &target](const Tensor&) {
    std::mt19937_64 unused(0);
    return cross_entropy_loss(decoder, features, target, 2, 0.0, unused);
  };

  json per_tensor = json::object();
  double max_rel = 0.0;
  std::cout << "finite-difference check (attend 2, " << param_count(cfg)
            << " parameters)\n";
  for (auto& [name, tensor] : decoder.params().named()) {
    const double rel = finite_difference_check(loss_fn, tensor, 1e-5);
    per_tensor[name] = rel;
    max_rel = std::max(max_rel, rel);
    std::cout << "  " << std::left << std::setw(14) << name << std::scientific
              << std::setprecision(3) << rel << '\n';
  }
  const bool ok = max_rel < 1e-4;
  std::cout << "max relative error: " << std::scientific << std::setprecision(3)
            << max_rel << (ok ? "  (pass, < 1e-4)" : "  (FAIL, >= 1e-4)") << '\n';

  if (!args.out.empty()) {
    ensure_out_dir(args.out);
    write_json_file(join_path(args.out, "grad-check.json"),
                    json{{"command", "grad-check"},
                         {"seed", args.seed},
                         {"max_rel_error", max_rel},
                         {"threshold", 1e-4},
                         {"pass", ok},
                         {"tensors", per_tensor}});
  }
  if (!ok) throw NumericError("gradient check failed: max relative error above 1e-4");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"two-stream LSTM image captioner with repeated attention"};
  app.require_subcommand(1);

  GenDataArgs gen;
  CLI::App* cmd_gen = app.add_subcommand("gen-data", "generate the synthetic dataset");
  cmd_gen->add_option("--out", gen.out, "output directory")->required();
  cmd_gen->add_option("--seed", gen.seed, "world seed");
  cmd_gen->add_option("--train-images", gen.train_images, "training image count");
  cmd_gen->add_option("--val-images", gen.val_images, "validation image count");
  cmd_gen->add_option("--test-images", gen.test_images, "test image count");

  BuildVocabArgs bv;
  CLI::App* cmd_vocab = app.add_subcommand("build-vocab", "build the vocabulary file");
  cmd_vocab->add_option("--data", bv.data, "dataset directory")->required();
  cmd_vocab->add_option("--out", bv.out, "output directory")->required();
  cmd_vocab->add_option("--min-count", bv.min_count, "keep tokens with count > this");
  cmd_vocab->add_option("--max-len", bv.max_len, "caption length cut before counting");

  TrainArgs tr;
  CLI::App* cmd_train = app.add_subcommand("train", "train a captioning model");
  cmd_train->add_option("--data", tr.data, "dataset directory")->required();
  cmd_train->add_option("--vocab", tr.vocab, "vocabulary file")->required();
  cmd_train->add_option("--out", tr.out, "run output directory")->required();
  cmd_train->add_option("--config", tr.config, "JSON config file");
  cmd_train->add_option("--init", tr.init, "checkpoint prefix to warm-start from");
  auto* o_loss = cmd_train->add_option("--loss", tr.loss, "cross_entropy or self_critical");
  auto* o_seed = cmd_train->add_option("--seed", tr.seed, "training seed");
  auto* o_epochs = cmd_train->add_option("--epochs", tr.epochs, "epoch count");
  auto* o_ta = cmd_train->add_option("--train-attend", tr.train_attend,
                                     "attention iterations per word in training");
  auto* o_ea = cmd_train->add_option("--eval-attend", tr.eval_attend,
                                     "attention iterations per word in validation");
  auto* o_beam = cmd_train->add_option("--beam", tr.beam, "validation beam width");
  auto* o_iv = cmd_train->add_option("--eval-interval", tr.eval_interval,
                                     "evaluate every this many updates (0 = epoch ends)");

  EvalArgs ev;
  CLI::App* cmd_eval = app.add_subcommand("eval", "score a checkpoint on a split");
  cmd_eval->add_option("--data", ev.data, "dataset directory")->required();
  cmd_eval->add_option("--split", ev.split, "split name (default test)");
  cmd_eval->add_option("--vocab", ev.vocab, "vocabulary file")->required();
  cmd_eval->add_option("--ckpt", ev.ckpt, "checkpoint prefix")->required();
  cmd_eval->add_option("--attend", ev.attend,
                       "attention iterations per word (0 = training setting)");
  cmd_eval->add_option("--beam", ev.beam, "beam width");
  cmd_eval->add_option("--out", ev.out, "directory for the report JSON");

  CaptionArgs cap;
  CLI::App* cmd_caption = app.add_subcommand("caption", "caption one image");
  cmd_caption->add_option("--features", cap.features, "feature file")->required();
  cmd_caption->add_option("--vocab", cap.vocab, "vocabulary file")->required();
  cmd_caption->add_option("--ckpt", cap.ckpt, "checkpoint prefix")->required();
  auto* o_img = cmd_caption->add_option("--image-id", cap.image_id,
                                        "image id (default: first in the file)");
  cmd_caption->add_option("--attend", cap.attend,
                          "attention iterations per word (0 = training setting)");
  cmd_caption->add_option("--beam", cap.beam, "beam width (1 = greedy)");
  cmd_caption->add_option("--trace", cap.trace_path,
                          "write the attention weights of a greedy decode here");
  cmd_caption->add_option("--out", cap.out, "directory for the caption JSON");

  CompareArgs cmp;
  CLI::App* cmd_compare =
      app.add_subcommand("compare", "train and score a grid of attention settings");
  cmd_compare->add_option("--data", cmp.data, "dataset directory")->required();
  cmd_compare->add_option("--vocab", cmp.vocab, "vocabulary file")->required();
  cmd_compare->add_option("--out", cmp.out, "run output directory")->required();
  cmd_compare->add_option("--config", cmp.config, "JSON config file");
  cmd_compare->add_option("--split", cmp.split, "evaluation split (default test)");
  cmd_compare->add_option("--train-attend", cmp.train_attend,
                          "comma-separated training iteration counts");
  cmd_compare->add_option("--eval-attend", cmp.eval_attend,
                          "comma-separated evaluation iteration counts");
  cmd_compare->add_option("--beam", cmp.beam, "beam width for every cell");
  auto* o_cseed = cmd_compare->add_option("--seed", cmp.seed, "base seed (cell adds N)");
  auto* o_cepochs = cmd_compare->add_option("--epochs", cmp.epochs, "epochs per cell");

  GradCheckArgs gc;
  CLI::App* cmd_grad = app.add_subcommand("grad-check", "finite-difference gradient suite");
  cmd_grad->add_option("--seed", gc.seed, "model/features seed");
  cmd_grad->add_option("--out", gc.out, "directory for the report JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*cmd_gen) return run_gen_data(gen);
    if (*cmd_vocab) return run_build_vocab(bv);
    if (*cmd_train) {
      tr.has_seed = o_seed->count() > 0;
      tr.has_epochs = o_epochs->count() > 0;
      tr.has_loss = o_loss->count() > 0;
      tr.has_train_attend = o_ta->count() > 0;
      tr.has_eval_attend = o_ea->count() > 0;
      tr.has_beam = o_beam->count() > 0;
      tr.has_interval = o_iv->count() > 0;
      return run_train(tr);
    }
    if (*cmd_eval) return run_eval(ev);
    if (*cmd_caption) {
      cap.has_image_id = o_img->count() > 0;
      return run_caption(cap);
    }
    if (*cmd_compare) {
      cmp.has_seed = o_cseed->count() > 0;
      cmp.has_epochs = o_cepochs->count() > 0;
      return run_compare(cmp);
    }
    if (*cmd_grad) return run_grad_check(gc);
    std::cerr << "no command selected\n";
    return 2;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    std::cerr << "run with --help for details\n";
    return 2;
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return 4;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 3;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
}
