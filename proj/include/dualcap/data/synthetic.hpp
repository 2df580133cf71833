#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dualcap/data/caption_io.hpp"
#include "dualcap/data/feature_io.hpp"

namespace dualcap {

// A compositional toy domain: each image shows a primary and a secondary
// colored object. Region features are one-hot object/color prototypes plus
// role-flag dimensions and seeded noise; captions come from paraphrase
// templates naming the primary object first.
struct SyntheticWorld {
  std::uint64_t seed = 2024;
  std::vector<std::string> objects = {"ball", "box", "car", "tree",
                                      "dog",  "cat", "cup", "hat"};
  std::vector<std::string> colors = {"red", "blue", "green", "yellow"};
  // Placeholders {c1} {o1} {c2} {o2} are substituted per image.
  std::vector<std::string> templates = {
      "a {c1} {o1} next to a {c2} {o2}",
      "the {c1} {o1} and the {c2} {o2}",
      "there is a {c1} {o1} near a {c2} {o2}",
  };
  int n_regions = 6;
  int feat_dim = 32;
  double noise = 0.05;

  void validate() const;
};

// Ground truth of one generated image, kept alongside the caption record so
// caption quality can be judged against the actual draw.
struct SyntheticTruth {
  std::uint64_t image_id = 0;
  int primary_object = 0;
  int primary_color = 0;
  int secondary_object = 0;
  int secondary_color = 0;
};

struct SyntheticSplit {
  std::vector<StoredFeatures> features;
  std::vector<CaptionRecord> captions;
  std::vector<SyntheticTruth> truths;
};

struct SyntheticDataset {
  SyntheticSplit train, val, test;
};

// Image ids are assigned consecutively (train, then val, then test), so the
// splits are disjoint; every image is a pure function of (world.seed, id).
SyntheticDataset generate_synthetic(const SyntheticWorld& world, int n_train, int n_val,
                                    int n_test);

}  // namespace dualcap
