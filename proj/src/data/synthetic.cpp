#include "dualcap/data/synthetic.hpp"

#include <random>

#include "dualcap/common/error.hpp"
#include "dualcap/common/rand.hpp"

namespace dualcap {

namespace {

std::string substitute(std::string text, const std::string& placeholder,
                       const std::string& value) {
  std::size_t pos = 0;
  while ((pos = text.find(placeholder, pos)) != std::string::npos) {
    text.replace(pos, placeholder.size(), value);
    pos += value.size();
  }
  return text;
}

}  // namespace

void SyntheticWorld::validate() const {
  if (objects.size() < 2) {
    throw DataError("synthetic: need at least 2 object categories to place 2 distinct objects");
  }
  if (colors.empty()) throw DataError("synthetic: need at least 1 color");
  if (templates.empty()) throw DataError("synthetic: need at least 1 caption template");
  if (n_regions < 2) throw DataError("synthetic: need at least 2 regions");
  const int needed = static_cast<int>(objects.size() + colors.size()) + 2;
  if (feat_dim < needed) {
    throw DataError("synthetic: feat_dim " + std::to_string(feat_dim) +
                    " too small; need >= " + std::to_string(needed) +
                    " (objects + colors + 2 role flags)");
  }
  if (noise < 0.0) throw DataError("synthetic: noise must be >= 0");
}

namespace {

void generate_image(const SyntheticWorld& world, std::uint64_t image_id,
                    SyntheticSplit& split) {
  std::mt19937_64 rng(world.seed ^ (0x9e3779b97f4a7c15ULL * (image_id + 1)));

  SyntheticTruth truth;
  truth.image_id = image_id;
  truth.primary_object = draw_int(rng, static_cast<int>(world.objects.size()));
  truth.primary_color = draw_int(rng, static_cast<int>(world.colors.size()));
  do {
    truth.secondary_object = draw_int(rng, static_cast<int>(world.objects.size()));
  } while (truth.secondary_object == truth.primary_object);
  truth.secondary_color = draw_int(rng, static_cast<int>(world.colors.size()));

  // Region budget: one background region when there is room, the rest split
  // between the two objects with the primary getting at least as many.
  const int background = world.n_regions >= 3 ? 1 : 0;
  const int object_regions = world.n_regions - background;
  const int secondary_count = object_regions / 2;
  const int primary_count = object_regions - secondary_count;

  const int n_obj = static_cast<int>(world.objects.size());
  const int n_col = static_cast<int>(world.colors.size());
  const int flag_primary = n_obj + n_col;
  const int flag_secondary = n_obj + n_col + 1;

  std::vector<double> values(
      static_cast<std::size_t>(world.n_regions) * world.feat_dim, 0.0);
  const auto region = [&](int k) { return values.begin() + (std::size_t)k * world.feat_dim; };
  int next = 0;
  for (int k = 0; k < primary_count; ++k, ++next) {
    auto row = region(next);
    row[truth.primary_object] = 1.0;
    row[n_obj + truth.primary_color] = 1.0;
    row[flag_primary] = 1.0;
  }
  for (int k = 0; k < secondary_count; ++k, ++next) {
    auto row = region(next);
    row[truth.secondary_object] = 1.0;
    row[n_obj + truth.secondary_color] = 1.0;
    row[flag_secondary] = 1.0;
  }
  for (double& v : values) v += (2.0 * draw_unit(rng) - 1.0) * world.noise;

  StoredFeatures stored;
  stored.image_id = image_id;
  stored.features = ImageFeatures::from_regions(
      Tensor::from_data({world.n_regions, world.feat_dim}, std::move(values)));

  CaptionRecord record;
  record.image_id = image_id;
  const int max_caps = std::min<int>(3, static_cast<int>(world.templates.size()));
  const int min_caps = std::min(2, max_caps);
  const int n_caps = min_caps + (max_caps > min_caps ? draw_int(rng, max_caps - min_caps + 1) : 0);
  std::vector<int> order(world.templates.size());
  for (std::size_t t = 0; t < order.size(); ++t) order[t] = static_cast<int>(t);
  for (int t = static_cast<int>(order.size()) - 1; t > 0; --t) {
    std::swap(order[t], order[draw_int(rng, t + 1)]);
  }
  for (int t = 0; t < n_caps; ++t) {
    std::string caption = world.templates[order[t]];
    caption = substitute(caption, "{c1}", world.colors[truth.primary_color]);
    caption = substitute(caption, "{o1}", world.objects[truth.primary_object]);
    caption = substitute(caption, "{c2}", world.colors[truth.secondary_color]);
    caption = substitute(caption, "{o2}", world.objects[truth.secondary_object]);
    record.captions.push_back(std::move(caption));
  }

  split.features.push_back(std::move(stored));
  split.captions.push_back(std::move(record));
  split.truths.push_back(truth);
}

}  // namespace

SyntheticDataset generate_synthetic(const SyntheticWorld& world, int n_train, int n_val,
                                    int n_test) {
  world.validate();
  if (n_train < 1 || n_val < 0 || n_test < 0) {
    throw DataError("synthetic: split sizes must be positive (train) and non-negative");
  }
  SyntheticDataset data;
  std::uint64_t id = 0;
  for (int k = 0; k < n_train; ++k) generate_image(world, id++, data.train);
  for (int k = 0; k < n_val; ++k) generate_image(world, id++, data.val);
  for (int k = 0; k < n_test; ++k) generate_image(world, id++, data.test);
  return data;
}

}  // namespace dualcap
