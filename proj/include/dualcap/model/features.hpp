#pragma once

#include "dualcap/tensor/tensor.hpp"

namespace dualcap {

// Per-image region features: n region vectors plus their arithmetic mean.
struct ImageFeatures {
  Tensor regions;  // [n, feat_dim]
  Tensor mean;     // [feat_dim]

  static ImageFeatures from_regions(Tensor regions);

  int n_regions() const { return regions.extent(0); }
  int feat_dim() const { return regions.extent(1); }

  // Checks the stored mean against the row mean of regions (within 1e-10).
  void validate() const;
};

}  // namespace dualcap
