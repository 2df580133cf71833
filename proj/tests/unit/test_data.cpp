#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "doctest.h"
#include "dualcap/data/dataset.hpp"
#include "dualcap/data/synthetic.hpp"

using namespace dualcap;

namespace {

struct TempFile {
  explicit TempFile(const std::string& name)
      : path((std::filesystem::temp_directory_path() / name).string()) {}
  ~TempFile() { std::remove(path.c_str()); }
  std::string path;
};

std::vector<TokenizedCaption> repeat_caption(const std::string& text, int times) {
  std::vector<TokenizedCaption> out;
  for (int k = 0; k < times; ++k) out.push_back(tokenize(text));
  return out;
}

}  // namespace

TEST_CASE("vocabulary frequency boundary: > 5 keeps, <= 5 drops") {
  std::vector<TokenizedCaption> corpus = repeat_caption("five", 5);
  const auto six = repeat_caption("six", 6);
  corpus.insert(corpus.end(), six.begin(), six.end());
  const Vocabulary vocab = Vocabulary::build(corpus);
  CHECK(vocab.encode("six") >= kNumReservedTokens);
  CHECK(vocab.encode("five") == kUnkId);
  CHECK(vocab.size() == kNumReservedTokens + 1);
}

TEST_CASE("vocabulary truncates to 16 tokens before counting") {
  // "tail" sits at position 16 (0-based) of every caption, past the cut.
  std::string long_caption;
  for (int k = 0; k < 16; ++k) long_caption += "w" + std::to_string(k) + " ";
  long_caption += "tail";
  const Vocabulary vocab = Vocabulary::build(repeat_caption(long_caption, 10));
  CHECK(vocab.encode("tail") == kUnkId);
  CHECK(vocab.encode("w0") >= kNumReservedTokens);
  CHECK(vocab.encode("w15") >= kNumReservedTokens);
}

TEST_CASE("vocabulary orders by count then alphabetically after the reserved block") {
  std::vector<TokenizedCaption> corpus;
  const auto add = [&corpus](const std::string& tok, int times) {
    const auto reps = repeat_caption(tok, times);
    corpus.insert(corpus.end(), reps.begin(), reps.end());
  };
  add("bravo", 8);
  add("alpha", 8);
  add("charlie", 9);
  const Vocabulary vocab = Vocabulary::build(corpus);
  CHECK(vocab.lookup(0) == kPadToken);
  CHECK(vocab.lookup(1) == kBosToken);
  CHECK(vocab.lookup(2) == kEosToken);
  CHECK(vocab.lookup(3) == kUnkToken);
  CHECK(vocab.lookup(4) == "charlie");
  CHECK(vocab.lookup(5) == "alpha");
  CHECK(vocab.lookup(6) == "bravo");
}

TEST_CASE("vocabulary round-trips ids, captions, and files") {
  const Vocabulary vocab = Vocabulary::build(repeat_caption("red ball near blue box", 7));
  for (const std::string tok : {"red", "ball", "near", "blue", "box"}) {
    CHECK(vocab.lookup(vocab.encode(tok)) == tok);
  }
  CHECK(vocab.encode("zebra") == kUnkId);
  CHECK_THROWS_AS(vocab.lookup(vocab.size()), DataError);
  CHECK_THROWS_AS(vocab.lookup(-1), DataError);

  const std::vector<int> ids = vocab.encode_caption(tokenize("red ball"), 16);
  REQUIRE(ids.size() == 3);
  CHECK(ids.back() == kEosId);
  CHECK(vocab.decode_caption(ids) == tokenize("red ball"));
  CHECK(vocab.decode_caption({kBosId, vocab.encode("red"), kEosId, vocab.encode("box")}) ==
        TokenizedCaption{"red"});

  const std::vector<int> truncated = vocab.encode_caption(tokenize("red ball near blue box"), 3);
  CHECK(truncated.size() == 4);

  TempFile tmp("dualcap_vocab_test.txt");
  vocab.save(tmp.path);
  const Vocabulary loaded = Vocabulary::load(tmp.path);
  REQUIRE(loaded.size() == vocab.size());
  for (int id = 0; id < vocab.size(); ++id) CHECK(loaded.lookup(id) == vocab.lookup(id));

  std::ofstream bad(tmp.path, std::ios::trunc);
  bad << "<pad>\n<bos>\n<unk>\n<eos>\nword\n";
  bad.close();
  CHECK_THROWS_AS(Vocabulary::load(tmp.path), DataError);
}

TEST_CASE("caption files round-trip and reject malformed lines") {
  TempFile tmp("dualcap_captions_test.jsonl");
  const std::vector<CaptionRecord> records = {
      {7, {"a red ball", "the ball is red"}},
      {9, {"a blue box"}},
  };
  write_caption_file(tmp.path, records);
  const auto loaded = read_caption_file(tmp.path);
  REQUIRE(loaded.size() == 2);
  CHECK(loaded[0].image_id == 7);
  CHECK(loaded[0].captions == records[0].captions);
  CHECK(loaded[1].image_id == 9);

  std::ofstream bad(tmp.path, std::ios::app);
  bad << "{not json\n";
  bad.close();
  try {
    read_caption_file(tmp.path);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
}

TEST_CASE("feature files follow the declared binary layout") {
  std::mt19937_64 rng(5);
  std::vector<StoredFeatures> images;
  for (int i = 0; i < 2; ++i) {
    StoredFeatures img;
    img.image_id = 100 + i;
    img.features = ImageFeatures::from_regions(Tensor::uniform({6, 32}, -2.0, 2.0, rng));
    images.push_back(std::move(img));
  }
  TempFile tmp("dualcap_features_test.amtf");
  write_features(tmp.path, images);

  CHECK(std::filesystem::file_size(tmp.path) == 20 + 2 * (8 + 6 * 32 * 4));

  const auto loaded = read_features(tmp.path);
  REQUIRE(loaded.size() == 2);
  for (int i = 0; i < 2; ++i) {
    CHECK(loaded[i].image_id == images[i].image_id);
    REQUIRE(loaded[i].features.regions.shape() == images[i].features.regions.shape());
    for (int k = 0; k < 6; ++k) {
      for (int j = 0; j < 32; ++j) {
        CHECK(loaded[i].features.regions(k, j) ==
              static_cast<double>(static_cast<float>(images[i].features.regions(k, j))));
      }
    }
    loaded[i].features.validate();
  }
}

TEST_CASE("feature reader rejects corrupt files with byte diagnostics") {
  std::mt19937_64 rng(6);
  StoredFeatures img;
  img.image_id = 1;
  img.features = ImageFeatures::from_regions(Tensor::uniform({2, 3}, -1.0, 1.0, rng));
  TempFile tmp("dualcap_features_corrupt.amtf");
  write_features(tmp.path, {img});

  auto read_all = [&tmp] {
    std::ifstream in(tmp.path, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  };
  const std::string original = read_all();

  auto write_all = [&tmp](const std::string& data) {
    std::ofstream out(tmp.path, std::ios::binary | std::ios::trunc);
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
  };

  // Wrong magic.
  std::string bad = original;
  bad[0] = 'X';
  write_all(bad);
  try {
    read_features(tmp.path);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("AMTF") != std::string::npos);
  }

  // Unsupported version.
  bad = original;
  bad[4] = 9;
  write_all(bad);
  CHECK_THROWS_AS(read_features(tmp.path), DataError);

  // Truncated by one byte.
  write_all(original.substr(0, original.size() - 1));
  try {
    read_features(tmp.path);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("offset") != std::string::npos);
  }

  // Trailing bytes.
  write_all(original + "zz");
  CHECK_THROWS_AS(read_features(tmp.path), DataError);

  write_all(original);
  CHECK(read_features(tmp.path).size() == 1);
}

TEST_CASE("synthetic generation is deterministic and split-disjoint") {
  SyntheticWorld world;
  const SyntheticDataset a = generate_synthetic(world, 6, 3, 3);
  const SyntheticDataset b = generate_synthetic(world, 6, 3, 3);

  REQUIRE(a.train.features.size() == 6);
  REQUIRE(a.val.features.size() == 3);
  REQUIRE(a.test.features.size() == 3);

  std::vector<std::uint64_t> ids;
  for (const auto* split : {&a.train, &a.val, &a.test}) {
    for (const auto& f : split->features) ids.push_back(f.image_id);
  }
  std::sort(ids.begin(), ids.end());
  CHECK(std::adjacent_find(ids.begin(), ids.end()) == ids.end());

  for (std::size_t i = 0; i < a.train.features.size(); ++i) {
    CHECK(a.train.captions[i].captions == b.train.captions[i].captions);
    const auto& ra = a.train.features[i].features.regions;
    const auto& rb = b.train.features[i].features.regions;
    REQUIRE(ra.shape() == rb.shape());
    CHECK(ra.values() == rb.values());
  }
}

TEST_CASE("synthetic captions name the drawn objects, primary first") {
  SyntheticWorld world;
  const SyntheticDataset data = generate_synthetic(world, 20, 0, 0);
  for (std::size_t i = 0; i < data.train.captions.size(); ++i) {
    const SyntheticTruth& truth = data.train.truths[i];
    const auto& captions = data.train.captions[i].captions;
    CHECK(captions.size() >= 2);
    CHECK(captions.size() <= 3);
    for (const std::string& caption : captions) {
      const std::string primary =
          world.colors[truth.primary_color] + " " + world.objects[truth.primary_object];
      const std::string secondary =
          world.colors[truth.secondary_color] + " " + world.objects[truth.secondary_object];
      const std::size_t p = caption.find(primary);
      const std::size_t s = caption.find(secondary);
      REQUIRE(p != std::string::npos);
      REQUIRE(s != std::string::npos);
      CHECK(p < s);
    }
  }
}

TEST_CASE("zero-noise single-template world is fully determined by the draw") {
  SyntheticWorld world;
  world.noise = 0.0;
  world.templates = {"a {c1} {o1} next to a {c2} {o2}"};
  const SyntheticDataset data = generate_synthetic(world, 8, 0, 0);
  const int n_obj = static_cast<int>(world.objects.size());
  for (std::size_t i = 0; i < data.train.features.size(); ++i) {
    const SyntheticTruth& truth = data.train.truths[i];
    REQUIRE(data.train.captions[i].captions.size() == 1);
    CHECK(data.train.captions[i].captions[0] ==
          "a " + world.colors[truth.primary_color] + " " +
              world.objects[truth.primary_object] + " next to a " +
              world.colors[truth.secondary_color] + " " +
              world.objects[truth.secondary_object]);
    const Tensor& regions = data.train.features[i].features.regions;
    CHECK(regions(0, truth.primary_object) == 1.0);
    CHECK(regions(0, n_obj + truth.primary_color) == 1.0);
    for (int j = 0; j < world.feat_dim; ++j) {
      CHECK(regions(world.n_regions - 1, j) == 0.0);  // background region
    }
  }
}

TEST_CASE("impossible synthetic configurations are rejected") {
  SyntheticWorld one_object;
  one_object.objects = {"ball"};
  CHECK_THROWS_AS(generate_synthetic(one_object, 1, 0, 0), DataError);

  SyntheticWorld narrow;
  narrow.feat_dim = 8;
  CHECK_THROWS_AS(generate_synthetic(narrow, 1, 0, 0), DataError);
}

TEST_CASE("dataset assembly joins features with encoded references") {
  SyntheticWorld world;
  const SyntheticDataset data = generate_synthetic(world, 12, 0, 0);
  std::vector<TokenizedCaption> all;
  for (const CaptionRecord& record : data.train.captions) {
    for (const std::string& caption : record.captions) all.push_back(tokenize(caption));
  }
  const Vocabulary vocab = Vocabulary::build(all, 0, 16);

  const CaptionDataset dataset =
      assemble_dataset(data.train.features, data.train.captions, vocab, 16, "train");
  REQUIRE(dataset.images.size() == 12);
  CHECK(dataset.split == "train");
  for (const DatasetImage& image : dataset.images) {
    REQUIRE(!image.reference_ids.empty());
    for (const auto& ids : image.reference_ids) {
      CHECK(ids.size() <= 17);
      CHECK(ids.back() == kEosId);
      for (const int id : ids) {
        CHECK(id >= 0);
        CHECK(id < vocab.size());
        CHECK(id != kUnkId);  // toy grammar is fully in-vocabulary
      }
    }
  }

  std::vector<CaptionRecord> missing(data.train.captions.begin(),
                                     data.train.captions.end() - 1);
  CHECK_THROWS_AS(assemble_dataset(data.train.features, missing, vocab, 16, "train"),
                  DataError);
}
