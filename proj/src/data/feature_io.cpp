#include "dualcap/data/feature_io.hpp"

#include <cstring>
#include <fstream>

#include "dualcap/common/error.hpp"

namespace dualcap {

namespace {

constexpr char kMagic[4] = {'A', 'M', 'T', 'F'};

void put_u32(std::string& out, std::uint32_t v) {
  for (int k = 0; k < 4; ++k) out.push_back(static_cast<char>((v >> (8 * k)) & 0xff));
}

void put_u64(std::string& out, std::uint64_t v) {
  for (int k = 0; k < 8; ++k) out.push_back(static_cast<char>((v >> (8 * k)) & 0xff));
}

void put_f32(std::string& out, float v) {
  std::uint32_t bits = 0;
  std::memcpy(&bits, &v, sizeof(bits));
  put_u32(out, bits);
}

class Reader {
 public:
  Reader(std::string data, std::string path)
      : data_(std::move(data)), path_(std::move(path)) {}

  std::size_t offset() const { return pos_; }

  void need(std::size_t n, const char* what) {
    if (pos_ + n > data_.size()) {
      throw DataError("features: " + path_ + " truncated at byte offset " +
                      std::to_string(data_.size()) + " while reading " + what +
                      " (needed " + std::to_string(pos_ + n) + " bytes)");
    }
  }

  std::uint32_t u32(const char* what) {
    need(4, what);
    std::uint32_t v = 0;
    for (int k = 0; k < 4; ++k) {
      v |= static_cast<std::uint32_t>(static_cast<unsigned char>(data_[pos_ + k])) << (8 * k);
    }
    pos_ += 4;
    return v;
  }

  std::uint64_t u64(const char* what) {
    need(8, what);
    std::uint64_t v = 0;
    for (int k = 0; k < 8; ++k) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_ + k])) << (8 * k);
    }
    pos_ += 8;
    return v;
  }

  float f32(const char* what) {
    const std::uint32_t bits = u32(what);
    float v = 0.0f;
    std::memcpy(&v, &bits, sizeof(v));
    return v;
  }

  void magic() {
    need(4, "magic");
    if (std::memcmp(data_.data(), kMagic, 4) != 0) {
      throw DataError("features: " + path_ + " has wrong magic at byte offset 0, expected \"AMTF\"");
    }
    pos_ += 4;
  }

  bool at_end() const { return pos_ == data_.size(); }

 private:
  std::string data_;
  std::string path_;
  std::size_t pos_ = 0;
};

}  // namespace

void write_features(const std::string& path, const std::vector<StoredFeatures>& images) {
  if (images.empty()) throw DataError("features: refusing to write an empty set");
  const int n_regions = images.front().features.n_regions();
  const int dim = images.front().features.feat_dim();
  for (const StoredFeatures& img : images) {
    if (img.features.n_regions() != n_regions || img.features.feat_dim() != dim) {
      throw DataError("features: image " + std::to_string(img.image_id) +
                      " has shape " + shape_str(img.features.regions.shape()) +
                      ", expected [" + std::to_string(n_regions) + "x" +
                      std::to_string(dim) + "]");
    }
  }

  std::string blob;
  blob.append(kMagic, 4);
  put_u32(blob, kFeatureFileVersion);
  put_u32(blob, static_cast<std::uint32_t>(images.size()));
  put_u32(blob, static_cast<std::uint32_t>(n_regions));
  put_u32(blob, static_cast<std::uint32_t>(dim));
  for (const StoredFeatures& img : images) {
    put_u64(blob, img.image_id);
    for (int k = 0; k < n_regions; ++k) {
      for (int j = 0; j < dim; ++j) {
        put_f32(blob, static_cast<float>(img.features.regions(k, j)));
      }
    }
  }

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("features: cannot write " + path);
  out.write(blob.data(), static_cast<std::streamsize>(blob.size()));
  if (!out) throw DataError("features: write failed for " + path);
}

std::vector<StoredFeatures> read_features(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("features: cannot read " + path);
  std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  Reader reader(std::move(data), path);
  reader.magic();
  const std::uint32_t version = reader.u32("version");
  if (version != kFeatureFileVersion) {
    throw DataError("features: " + path + " has unsupported version " +
                    std::to_string(version) + " at byte offset 4, expected " +
                    std::to_string(kFeatureFileVersion));
  }
  const std::uint32_t n_images = reader.u32("image count");
  const std::uint32_t n_regions = reader.u32("region count");
  const std::uint32_t dim = reader.u32("feature dim");
  if (n_regions == 0 || dim == 0) {
    throw DataError("features: " + path + " declares an empty region grid");
  }

  std::vector<StoredFeatures> images;
  images.reserve(n_images);
  for (std::uint32_t i = 0; i < n_images; ++i) {
    StoredFeatures img;
    img.image_id = reader.u64("image id");
    std::vector<double> values;
    values.reserve(static_cast<std::size_t>(n_regions) * dim);
    for (std::uint32_t k = 0; k < n_regions * dim; ++k) {
      values.push_back(reader.f32("feature value"));
    }
    img.features = ImageFeatures::from_regions(
        Tensor::from_data({static_cast<int>(n_regions), static_cast<int>(dim)},
                          std::move(values)));
    images.push_back(std::move(img));
  }
  if (!reader.at_end()) {
    throw DataError("features: " + path + " has trailing bytes at offset " +
                    std::to_string(reader.offset()));
  }
  return images;
}

}  // namespace dualcap
