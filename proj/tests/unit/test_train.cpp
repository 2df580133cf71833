#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "dualcap/common/rand.hpp"
#include "dualcap/data/dataset.hpp"
#include "dualcap/data/synthetic.hpp"
#include "dualcap/infer/decode.hpp"
#include "dualcap/tensor/grad_check.hpp"
#include "dualcap/train/adam.hpp"
#include "dualcap/train/loss.hpp"
#include "dualcap/train/schedule.hpp"
#include "dualcap/train/trainer.hpp"

using namespace dualcap;

namespace {

ModelConfig small_config() {
  ModelConfig cfg;
  cfg.vocab_size = 10;
  cfg.embed_dim = 4;
  cfg.hidden_dim = 5;
  cfg.att_hidden_dim = 3;
  cfg.feat_dim = 6;
  cfg.out_hidden_dim = 5;
  cfg.max_caption_len = 6;
  return cfg;
}

ImageFeatures random_features(int n, int dim, std::mt19937_64& rng) {
  return ImageFeatures::from_regions(Tensor::uniform({n, dim}, -1.0, 1.0, rng));
}

ModelParams zero_params(const ModelConfig& cfg) {
  std::mt19937_64 rng(0);
  ModelParams p = ModelParams::init(cfg, rng);
  for (auto& [name, t] : p.named()) {
    Tensor tensor = t;
    std::fill(tensor.values().begin(), tensor.values().end(), 0.0);
  }
  return p;
}

// Mirror of the masked sampler used in training: mass over the emittable ids
// [eos, vocab), one unit draw, inverse-CDF walk.
int oracle_sample(const Tensor& probs, std::mt19937_64& rng) {
  double mass = 0.0;
  for (int id = kEosId; id < probs.extent(0); ++id) mass += probs(id);
  double r = draw_unit(rng) * mass;
  for (int id = kEosId; id < probs.extent(0); ++id) {
    r -= probs(id);
    if (r < 0.0) return id;
  }
  return probs.extent(0) - 1;
}

double oracle_mass(const Tensor& probs) {
  double mass = 0.0;
  for (int id = kEosId; id < probs.extent(0); ++id) mass += probs(id);
  return mass;
}

SyntheticWorld tiny_world() {
  SyntheticWorld world;
  world.seed = 99;
  world.objects = {"ball", "box", "car"};
  world.colors = {"red", "blue"};
  world.feat_dim = 7;  // 3 objects + 2 colors + 2 role flags
  return world;
}

struct Fixture {
  Vocabulary vocab;
  CaptionDataset train;
  CaptionDataset val;
  ModelConfig cfg;
};

Fixture make_fixture(int n_train, int n_val) {
  const SyntheticWorld world = tiny_world();
  const SyntheticDataset data = generate_synthetic(world, n_train, n_val, 1);
  std::vector<TokenizedCaption> all;
  for (const auto& rec : data.train.captions) {
    for (const auto& text : rec.captions) all.push_back(tokenize(text));
  }
  Fixture fx;
  fx.cfg.embed_dim = 6;
  fx.cfg.hidden_dim = 8;
  fx.cfg.att_hidden_dim = 4;
  fx.cfg.feat_dim = world.feat_dim;
  fx.cfg.out_hidden_dim = 8;
  fx.cfg.max_caption_len = 12;
  fx.vocab = Vocabulary::build(all, 0, fx.cfg.max_caption_len);
  fx.cfg.vocab_size = fx.vocab.size();
  fx.train = assemble_dataset(data.train.features, data.train.captions, fx.vocab,
                              fx.cfg.max_caption_len, "train");
  fx.val = assemble_dataset(data.val.features, data.val.captions, fx.vocab,
                            fx.cfg.max_caption_len, "val");
  return fx;
}

}  // namespace

TEST_CASE("scheduled sampling probability is a capped staircase") {
  CHECK(scheduled_sampling_prob(0) == 0.0);
  CHECK(scheduled_sampling_prob(4) == 0.0);
  CHECK(scheduled_sampling_prob(5) == doctest::Approx(0.05).epsilon(1e-12));
  CHECK(scheduled_sampling_prob(12) == doctest::Approx(0.10).epsilon(1e-12));
  CHECK(scheduled_sampling_prob(25) == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(scheduled_sampling_prob(60) == doctest::Approx(0.25).epsilon(1e-12));

  double prev = 0.0;
  for (int epoch = 0; epoch <= 100; ++epoch) {
    const double p = scheduled_sampling_prob(epoch);
    CHECK(p >= prev);
    CHECK(p <= 0.25);
    prev = p;
  }

  CHECK(scheduled_sampling_prob(7, 0.1, 2, 0.35) == doctest::Approx(0.3).epsilon(1e-12));
  CHECK_THROWS_AS(scheduled_sampling_prob(-1), Error);
  CHECK_THROWS_AS(scheduled_sampling_prob(3, 0.05, 0, 0.25), Error);
}

TEST_CASE("learning rate decays by a fixed factor every few epochs") {
  CHECK(learning_rate(0) == doctest::Approx(5e-4).epsilon(1e-14));
  CHECK(learning_rate(2) == doctest::Approx(5e-4).epsilon(1e-14));
  CHECK(learning_rate(3) == doctest::Approx(4e-4).epsilon(1e-14));
  CHECK(learning_rate(6) == doctest::Approx(5e-4 * 0.64).epsilon(1e-14));
  CHECK(learning_rate(99) == doctest::Approx(5e-4 * std::pow(0.8, 33)).epsilon(1e-14));
  CHECK(learning_rate(99) == doctest::Approx(3.17e-7).epsilon(1e-2));

  double prev = 1.0;
  for (int epoch = 0; epoch <= 100; ++epoch) {
    const double lr = learning_rate(epoch);
    CHECK(lr <= prev);
    CHECK(lr > 0.0);
    prev = lr;
  }
  CHECK_THROWS_AS(learning_rate(-1), Error);
  CHECK_THROWS_AS(learning_rate(5, 5e-4, 0.8, 0), Error);
}

TEST_CASE("adam leaves parameters alone when gradients are zero") {
  Tensor x = Tensor::from_data({3}, {1.0, -2.0, 0.5}, true);
  AdamOptimizer opt({{"x", x}});
  opt.step(0.1);
  opt.step(0.1);
  CHECK(x.values() == std::vector<double>{1.0, -2.0, 0.5});
  CHECK(opt.step_count() == 2);
}

TEST_CASE("first adam step moves each element by about lr against the gradient") {
  Tensor x = Tensor::from_data({2}, {1.0, -2.0}, true);
  AdamOptimizer opt({{"x", x}});
  x.grad()[0] = 0.5;
  x.grad()[1] = -0.25;
  opt.step(0.01);
  CHECK(x.values()[0] == doctest::Approx(1.0 - 0.01).epsilon(1e-7));
  CHECK(x.values()[1] == doctest::Approx(-2.0 + 0.01).epsilon(1e-7));
}

TEST_CASE("adam matches a hand-stepped oracle on a scalar quadratic") {
  Tensor x = Tensor::scalar(2.0, true);
  AdamOptimizer opt({{"x", x}}, 0.9, 0.999, 1e-8);

  double ox = 2.0, m = 0.0, v = 0.0;
  for (int t = 1; t <= 3; ++t) {
    x.zero_grad();
    x.grad()[0] = x.values()[0];  // d/dx of x^2 / 2
    opt.step(0.05);

    const double g = ox;
    m = 0.9 * m + 0.1 * g;
    v = 0.999 * v + 0.001 * g * g;
    const double m_hat = m / (1.0 - std::pow(0.9, t));
    const double v_hat = v / (1.0 - std::pow(0.999, t));
    ox -= 0.05 * m_hat / (std::sqrt(v_hat) + 1e-8);

    CHECK(x.values()[0] == doctest::Approx(ox).epsilon(1e-14));
  }
  CHECK(x.values()[0] < 2.0);
}

TEST_CASE("adam rejects non-finite gradients with a named diagnostic") {
  Tensor x = Tensor::from_data({2}, {1.0, 1.0}, true);
  AdamOptimizer opt({{"embed_w", x}});
  x.grad()[1] = std::numeric_limits<double>::quiet_NaN();
  try {
    opt.step(0.1);
    FAIL("expected NumericError");
  } catch (const NumericError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("embed_w") != std::string::npos);
    CHECK(msg.find("element 1") != std::string::npos);
  }
}

TEST_CASE("cross entropy of an all-zero model is length times log vocab") {
  ModelConfig cfg = small_config();
  cfg.vocab_size = 4;
  Decoder dec(cfg, zero_params(cfg));
  std::mt19937_64 rng(1);
  ImageFeatures feat = random_features(3, cfg.feat_dim, rng);

  std::mt19937_64 loss_rng(2);
  const Tensor loss =
      cross_entropy_loss(dec, feat, {kUnkId, kEosId}, 2, 0.0, loss_rng);
  CHECK(loss.item() == doctest::Approx(2.0 * std::log(4.0)).epsilon(1e-12));
  CHECK(loss.item() == doctest::Approx(2.772588722239781).epsilon(1e-12));
}

TEST_CASE("teacher forcing matches a manual step-by-step total and spends no randomness") {
  const ModelConfig cfg = small_config();
  std::mt19937_64 rng(3);
  Decoder dec(cfg, ModelParams::init(cfg, rng));
  ImageFeatures feat = random_features(4, cfg.feat_dim, rng);
  const std::vector<int> target = {5, 7, 4, kEosId};

  double manual = 0.0;
  {
    DecoderState s = dec.initial_state();
    int prev = kBosId;
    for (int tok : target) {
      const StepResult r = dec.decode_step(prev, feat, s, 2);
      manual -= std::log(r.probs(tok));
      s = r.state;
      prev = tok;
    }
  }

  std::mt19937_64 loss_rng(42);
  const std::mt19937_64 untouched = loss_rng;
  const Tensor loss = cross_entropy_loss(dec, feat, target, 2, 0.0, loss_rng);
  CHECK(loss.item() == doctest::Approx(manual).epsilon(1e-12));
  CHECK(loss_rng == untouched);
}

TEST_CASE("always-sampled inputs follow the replicated coin and walk") {
  const ModelConfig cfg = small_config();
  std::mt19937_64 rng(4);
  Decoder dec(cfg, ModelParams::init(cfg, rng));
  ImageFeatures feat = random_features(4, cfg.feat_dim, rng);
  const std::vector<int> target = {6, 8, 5, kEosId};

  double manual = 0.0;
  {
    std::mt19937_64 oracle_rng(55);
    DecoderState s = dec.initial_state();
    int prev = kBosId;
    for (std::size_t t = 0; t < target.size(); ++t) {
      const StepResult r = dec.decode_step(prev, feat, s, 1);
      manual -= std::log(r.probs(target[t]));
      s = r.state;
      if (t + 1 < target.size()) {
        CHECK(draw_unit(oracle_rng) < 1.0);  // the coin always lands on sampling
        prev = oracle_sample(r.probs, oracle_rng);
      }
    }
  }

  std::mt19937_64 loss_rng(55);
  const Tensor loss = cross_entropy_loss(dec, feat, target, 1, 1.0, loss_rng);
  CHECK(loss.item() == doctest::Approx(manual).epsilon(1e-12));
}

TEST_CASE("cross entropy rejects malformed targets") {
  const ModelConfig cfg = small_config();
  std::mt19937_64 rng(5);
  Decoder dec(cfg, ModelParams::init(cfg, rng));
  ImageFeatures feat = random_features(3, cfg.feat_dim, rng);
  std::mt19937_64 loss_rng(6);

  CHECK_THROWS_AS(cross_entropy_loss(dec, feat, {}, 1, 0.0, loss_rng), DataError);
  CHECK_THROWS_AS(cross_entropy_loss(dec, feat, {5, 6}, 1, 0.0, loss_rng), DataError);
  const std::vector<int> too_long = {4, 4, 4, 4, 4, 4, 4, kEosId};  // max_len 6 allows 7
  CHECK_THROWS_AS(cross_entropy_loss(dec, feat, too_long, 1, 0.0, loss_rng), DataError);
}

TEST_CASE("cross entropy gradients pass finite differences") {
  const ModelConfig cfg = small_config();
  std::mt19937_64 rng(7);
  Decoder dec(cfg, ModelParams::init(cfg, rng));
  ImageFeatures feat = random_features(3, cfg.feat_dim, rng);
  const std::vector<int> target = {5, 9, kEosId};

  const auto loss_fn = [&dec, &feat, &target](const Tensor&) {
    std::mt19937_64 unused(0);
    return cross_entropy_loss(dec, feat, target, 2, 0.0, unused);
  };
  for (const auto& name : {"embed_w", "att_w2", "out_b2", "att_lstm_w"}) {
    for (auto& [n, tensor] : dec.params().named()) {
      if (n != name) continue;
      INFO("tensor ", n);
      CHECK(finite_difference_check(loss_fn, tensor, 1e-5) < 1e-4);
    }
  }
}

TEST_CASE("caption sampling is deterministic given the seed and matches its replica") {
  const ModelConfig cfg = small_config();
  std::mt19937_64 rng(8);
  Decoder dec(cfg, ModelParams::init(cfg, rng));
  ImageFeatures feat = random_features(4, cfg.feat_dim, rng);

  std::mt19937_64 s1(123), s2(123);
  const SampledCaption a = sample_caption(dec, feat, 2, 6, s1);
  const SampledCaption b = sample_caption(dec, feat, 2, 6, s2);
  CHECK(a.tokens == b.tokens);
  CHECK(a.sum_log_prob == b.sum_log_prob);
  for (int id : a.tokens) {
    CHECK(id >= kUnkId);
    CHECK(id < cfg.vocab_size);
  }

  // Replicate the walk by hand.
  std::mt19937_64 s3(123);
  std::vector<int> tokens;
  double lp = 0.0;
  {
    DecoderState s = dec.initial_state();
    int prev = kBosId;
    for (int step = 0; step < 6; ++step) {
      const StepResult r = dec.decode_step(prev, feat, s, 2);
      const int id = oracle_sample(r.probs, s3);
      lp += std::log(r.probs(id)) - std::log(oracle_mass(r.probs));
      if (id == kEosId) break;
      tokens.push_back(id);
      s = r.state;
      prev = id;
    }
  }
  CHECK(a.tokens == tokens);
  CHECK(a.sum_log_prob == doctest::Approx(lp).epsilon(1e-12));
}

TEST_CASE("a sharply peaked model samples its own greedy caption") {
  ModelConfig cfg = small_config();
  cfg.max_caption_len = 3;
  std::mt19937_64 rng(9);
  ModelParams p = ModelParams::init(cfg, rng);
  p.out_b2.values()[4] = 50.0;  // one content word dominates every step
  Decoder dec(cfg, p);
  ImageFeatures feat = random_features(3, cfg.feat_dim, rng);

  std::mt19937_64 sample_rng(77);
  const SampledCaption sc = sample_caption(dec, feat, 1, 3, sample_rng);
  CHECK(sc.tokens == std::vector<int>{4, 4, 4});
  CHECK(sc.tokens == greedy_decode(dec, feat, 1, 3));
  CHECK(sc.sum_log_prob == doctest::Approx(0.0).epsilon(1e-6));
}

TEST_CASE("zero advantage gives an exactly zero loss and gradients") {
  ModelConfig cfg = small_config();
  cfg.max_caption_len = 3;
  std::mt19937_64 rng(10);
  ModelParams p = ModelParams::init(cfg, rng);
  p.out_b2.values()[4] = 50.0;
  Decoder dec(cfg, p);
  ImageFeatures feat = random_features(3, cfg.feat_dim, rng);

  std::vector<std::string> words = {kPadToken, kBosToken, kEosToken, kUnkToken,
                                    "ball", "red", "box", "blue", "the", "a"};
  const Vocabulary vocab = Vocabulary::from_tokens(words);
  const ReferenceSet refs = {{"ball", "ball"}, {"red", "ball"}};
  const IdfTable idf = IdfTable::build({refs, {{"box", "blue"}}});

  std::mt19937_64 sc_rng(11);
  Tape tape;
  TapeScope scope(tape);
  const SelfCriticalLoss out =
      self_critical_loss(dec, feat, refs, 1, 3, idf, vocab, sc_rng);
  CHECK(out.sampled == out.greedy);
  CHECK(out.reward == out.baseline);
  CHECK(out.loss.item() == 0.0);

  dec.params().zero_grad();
  backward(out.loss);
  for (const auto& [name, tensor] : dec.params().named()) {
    for (double g : tensor.grad()) CHECK(g == 0.0);
  }
}

TEST_CASE("self-critical loss equals the advantage-scaled path log-probability") {
  const ModelConfig cfg = small_config();
  std::mt19937_64 rng(12);
  Decoder dec(cfg, ModelParams::init(cfg, rng));
  ImageFeatures feat = random_features(4, cfg.feat_dim, rng);

  std::vector<std::string> words = {kPadToken, kBosToken, kEosToken, kUnkToken,
                                    "ball", "red", "box", "blue", "the", "a"};
  const Vocabulary vocab = Vocabulary::from_tokens(words);
  const ReferenceSet refs = {{"the", "red", "ball"}, {"a", "red", "ball"}};
  const IdfTable idf = IdfTable::build({refs, {{"a", "blue", "box"}}});
  const int max_len = 5;

  std::mt19937_64 sc_rng(13);
  Tape tape;
  TapeScope scope(tape);
  const SelfCriticalLoss out =
      self_critical_loss(dec, feat, refs, 2, max_len, idf, vocab, sc_rng);

  // Both scores must be recomputable from the returned captions.
  TokenizedCaption sampled_words, greedy_words;
  for (int id : out.sampled) sampled_words.push_back(vocab.lookup(id));
  for (int id : out.greedy) greedy_words.push_back(vocab.lookup(id));
  CHECK(out.reward == cider_d_single(sampled_words, refs, idf));
  CHECK(out.baseline == cider_d_single(greedy_words, refs, idf));
  CHECK(out.greedy == greedy_decode(dec, feat, 2, max_len));

  // Rebuild the masked log-probability of the sampled path and compare the
  // value and every parameter gradient against the returned graph.
  dec.params().zero_grad();
  const std::size_t visited = backward(out.loss);
  CHECK(visited > 0);
  std::vector<std::vector<double>> grads;
  for (const auto& [name, tensor] : dec.params().named()) grads.push_back(tensor.grad());

  dec.params().zero_grad();
  Tape tape2;
  TapeScope scope2(tape2);
  Tensor sum_lp = Tensor::zeros({1});
  {
    DecoderState s = dec.initial_state();
    int prev = kBosId;
    std::vector<int> steps = out.sampled;
    if (static_cast<int>(out.sampled.size()) < max_len) steps.push_back(kEosId);
    for (int tok : steps) {
      const StepResult r = dec.decode_step(prev, feat, s, 2);
      const Tensor mass = sum(slice(r.probs, kEosId, cfg.vocab_size - kEosId));
      sum_lp = add(sum_lp, add(log(slice(r.probs, tok, 1)), scalar_mul(log(mass), -1.0)));
      s = r.state;
      prev = tok;
    }
  }
  const Tensor rebuilt = scalar_mul(sum_lp, -(out.reward - out.baseline));
  CHECK(rebuilt.item() == doctest::Approx(out.loss.item()).epsilon(1e-12));
  backward(rebuilt);
  std::size_t k = 0;
  for (const auto& [name, tensor] : dec.params().named()) {
    INFO("tensor ", name);
    const auto& g = tensor.grad();
    REQUIRE(g.size() == grads[k].size());
    for (std::size_t i = 0; i < g.size(); ++i) {
      CHECK(g[i] == doctest::Approx(grads[k][i]).epsilon(1e-10));
    }
    ++k;
  }

  CHECK_THROWS_AS(
      self_critical_loss(dec, feat, {}, 1, max_len, idf, vocab, sc_rng), DataError);
}

TEST_CASE("training twice with the same seed is bit-identical") {
  const Fixture fx = make_fixture(8, 4);
  TrainConfig tc;
  tc.epochs = 2;
  tc.batch_size = 4;
  tc.seed = 21;
  tc.lr_initial = 2e-3;
  tc.n_attention_train = 2;

  const auto run_once = [&](std::string& log_text) {
    std::mt19937_64 rng(500);
    Decoder dec(fx.cfg, ModelParams::init(fx.cfg, rng));
    Trainer trainer(dec, tc, fx.train, fx.val, fx.vocab);
    std::ostringstream log;
    const TrainResult result = trainer.run(&log);
    log_text = log.str();
    return result;
  };

  std::string log_a, log_b;
  const TrainResult ra = run_once(log_a);
  const TrainResult rb = run_once(log_b);
  CHECK(log_a == log_b);
  CHECK(!log_a.empty());
  CHECK(ra.best_val_cider == rb.best_val_cider);
  const auto na = ra.best_params.named();
  const auto nb = rb.best_params.named();
  for (std::size_t i = 0; i < na.size(); ++i) {
    CHECK(na[i].second.values() == nb[i].second.values());
  }
}

TEST_CASE("cross entropy training reduces the loss on a toy corpus") {
  const Fixture fx = make_fixture(8, 4);
  TrainConfig tc;
  tc.epochs = 6;
  tc.batch_size = 4;
  tc.seed = 33;
  tc.lr_initial = 5e-3;
  tc.n_attention_train = 1;

  std::mt19937_64 rng(501);
  Decoder dec(fx.cfg, ModelParams::init(fx.cfg, rng));
  Trainer trainer(dec, tc, fx.train, fx.val, fx.vocab);

  long long sink_calls = 0;
  const TrainResult result = trainer.run(nullptr, [&](const ModelParams&, const EvalRecord&) {
    ++sink_calls;
  });

  REQUIRE(result.log.size() == 6);
  CHECK(result.log.back().loss < result.log.front().loss);
  double max_cider = result.log.front().val_cider;
  for (const auto& rec : result.log) max_cider = std::max(max_cider, rec.val_cider);
  CHECK(result.best_val_cider == max_cider);
  CHECK(result.checkpoints_saved == sink_calls);
  CHECK(sink_calls >= 1);
  CHECK(result.best_epoch >= 0);

  // Schedules recorded alongside each evaluation point.
  CHECK(result.log.front().lr == doctest::Approx(5e-3).epsilon(1e-14));
  CHECK(result.log.back().lr == doctest::Approx(5e-3 * 0.8).epsilon(1e-14));
  CHECK(result.log.front().ss_prob == 0.0);
  CHECK(result.log.back().ss_prob == doctest::Approx(0.05).epsilon(1e-12));
}

TEST_CASE("iteration-interval evaluation adds records without duplicates") {
  const Fixture fx = make_fixture(6, 2);
  TrainConfig tc;
  tc.epochs = 2;
  tc.batch_size = 3;  // two updates per epoch
  tc.seed = 44;
  tc.eval_interval_iterations = 1;

  std::mt19937_64 rng(502);
  Decoder dec(fx.cfg, ModelParams::init(fx.cfg, rng));
  Trainer trainer(dec, tc, fx.train, fx.val, fx.vocab);
  const TrainResult result = trainer.run();

  REQUIRE(result.log.size() == 4);  // one per update, epoch ends deduplicated
  for (std::size_t i = 0; i < result.log.size(); ++i) {
    CHECK(result.log[i].iteration == static_cast<long long>(i + 1));
  }
  CHECK(result.log[0].epoch == 0);
  CHECK(result.log[3].epoch == 1);
}

TEST_CASE("self-critical training demands a warm start") {
  const Fixture fx = make_fixture(4, 2);
  TrainConfig tc;
  tc.epochs = 1;
  tc.loss_kind = LossKind::self_critical;
  tc.warm_started = false;

  std::mt19937_64 rng(503);
  Decoder dec(fx.cfg, ModelParams::init(fx.cfg, rng));
  Trainer trainer(dec, tc, fx.train, fx.val, fx.vocab);
  CHECK_THROWS_AS(trainer.run(), DataError);
}

TEST_CASE("self-critical training runs after a cross entropy warm start") {
  const Fixture fx = make_fixture(6, 3);

  TrainConfig warm;
  warm.epochs = 3;
  warm.batch_size = 3;
  warm.seed = 60;
  warm.lr_initial = 5e-3;
  std::mt19937_64 rng(504);
  Decoder dec(fx.cfg, ModelParams::init(fx.cfg, rng));
  Trainer warm_trainer(dec, warm, fx.train, fx.val, fx.vocab);
  const TrainResult warm_result = warm_trainer.run();

  TrainConfig sc;
  sc.epochs = 2;
  sc.batch_size = 3;
  sc.seed = 61;
  sc.loss_kind = LossKind::self_critical;
  sc.warm_started = true;
  Decoder sc_decoder(fx.cfg, warm_result.best_params.clone());
  Trainer sc_trainer(sc_decoder, sc, fx.train, fx.val, fx.vocab);
  const TrainResult sc_result = sc_trainer.run();

  REQUIRE(sc_result.log.size() == 2);
  for (const auto& rec : sc_result.log) {
    CHECK(std::isfinite(rec.loss));
    CHECK(rec.ss_prob == 0.0);  // scheduled sampling never applies here
  }
}

TEST_CASE("a poisoned parameter surfaces as a numeric error with context") {
  const Fixture fx = make_fixture(4, 2);
  TrainConfig tc;
  tc.epochs = 1;
  tc.batch_size = 2;

  std::mt19937_64 rng(505);
  ModelParams p = ModelParams::init(fx.cfg, rng);
  p.out_b2.values()[0] = std::numeric_limits<double>::quiet_NaN();
  Decoder dec(fx.cfg, p);
  Trainer trainer(dec, tc, fx.train, fx.val, fx.vocab);
  try {
    trainer.run();
    FAIL("expected NumericError");
  } catch (const NumericError& e) {
    CHECK(std::string(e.what()).find("non-finite loss") != std::string::npos);
  }
}

TEST_CASE("evaluation record serializes to a stable json line") {
  EvalRecord rec;
  rec.epoch = 3;
  rec.iteration = 17;
  rec.loss = 1.5;
  rec.val_cider = 2.25;
  rec.lr = 4e-4;
  rec.ss_prob = 0.05;
  const std::string line = to_json_line(rec);
  CHECK(line.find("\"epoch\":3") != std::string::npos);
  CHECK(line.find("\"iteration\":17") != std::string::npos);
  CHECK(line.find("\"loss\":1.5") != std::string::npos);
  CHECK(line.find("\"val_cider\":2.25") != std::string::npos);
  CHECK(line.find("\"lr\":0.0004") != std::string::npos);
  CHECK(line.find("\"ss_prob\":0.05") != std::string::npos);
  CHECK(line.find('\n') == std::string::npos);
}
