#include "dualcap/model/features.hpp"

#include <cmath>

#include "dualcap/common/error.hpp"

namespace dualcap {

ImageFeatures ImageFeatures::from_regions(Tensor regions) {
  if (regions.rank() != 2 || regions.extent(0) < 1) {
    throw ShapeError("features: regions must be a nonempty [n x dim] matrix, got " +
                     shape_str(regions.shape()));
  }
  const int n = regions.extent(0);
  const int dim = regions.extent(1);
  Tensor mean = Tensor::zeros({dim});
  for (int k = 0; k < n; ++k) {
    for (int j = 0; j < dim; ++j) mean.values()[j] += regions(k, j);
  }
  for (int j = 0; j < dim; ++j) mean.values()[j] /= n;
  return ImageFeatures{std::move(regions), std::move(mean)};
}

void ImageFeatures::validate() const {
  if (regions.rank() != 2 || mean.rank() != 1 || mean.extent(0) != regions.extent(1)) {
    throw ShapeError("features: regions " + shape_str(regions.shape()) +
                     " inconsistent with mean " + shape_str(mean.shape()));
  }
  const ImageFeatures fresh = from_regions(regions.clone());
  for (int j = 0; j < feat_dim(); ++j) {
    if (std::abs(fresh.mean(j) - mean(j)) > 1e-10) {
      throw DataError("features: stored mean deviates from the row mean at index " +
                      std::to_string(j));
    }
  }
}

}  // namespace dualcap
