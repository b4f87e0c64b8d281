#ifndef EPLS_PIPELINE_HPP
#define EPLS_PIPELINE_HPP

#include <cstdint>
#include <vector>

#include "epls/types.hpp"

namespace epls {

// Fixed-shape 8-bit image collection. Pixels are stored image-major, then
// channel plane, then row-major within the plane -- the same channel-major
// order patches are flattened in.
struct ImageSet {
  Index width = 0;
  Index height = 0;
  Index channels = 0;
  std::vector<std::uint8_t> pixels;
  std::vector<int> labels;  // empty when unlabeled

  Index pixels_per_image() const { return width * height * channels; }
  Index count() const {
    const Index per = pixels_per_image();
    return per == 0 ? 0 : static_cast<Index>(pixels.size()) / per;
  }
  std::uint8_t at(Index image, Index channel, Index y, Index x) const {
    return pixels[static_cast<std::size_t>(((image * channels + channel) * height + y) * width + x)];
  }
  std::uint8_t& at(Index image, Index channel, Index y, Index x) {
    return pixels[static_cast<std::size_t>(((image * channels + channel) * height + y) * width + x)];
  }
};

struct PatchConfig {
  Index receptive_field = 10;
  Index stride = 1;
  Index patch_count = 0;           // for random extraction
  Scalar normalize_floor = 10.0;   // variance floor, sized for 0-255 pixels
};

enum class EncoderTag { Natural, SignSplit, SoftThreshold };

struct EncoderKind {
  EncoderTag tag = EncoderTag::Natural;
  Scalar alpha = 0.25;  // soft threshold, > 0
  // Sign split applies the logistic to +/-W responses by default; set this
  // to rectify the raw linear responses instead.
  bool split_preactivation = false;
};

Index code_width(const EncoderKind& encoder, Index output_dim);

// Uniformly random (image, x, y) patches, flattened channel-major then
// row-major: row width = rf * rf * channels. Raw pixel values, unnormalized.
Matrix extract_random_patches(const ImageSet& images, const PatchConfig& cfg, std::uint64_t seed);

// Per-row brightness/contrast normalization: subtract the mean, divide by
// sqrt(variance + floor).
void normalize_patch_rows_in_place(Matrix& patches, Scalar floor = 10.0);
Matrix normalize_patch_rows(Matrix patches, Scalar floor = 10.0);

// Dense feature map over all receptive-field placements at the given stride,
// one row per position (y-major), each patch normalized before encoding.
Matrix encode_image(const ImageSet& images, Index image_index, const ModelParams& params,
                    const EncoderKind& encoder, const PatchConfig& cfg);

// Sum of codes over the four spatial quadrants (odd grids split at
// ceil(dim/2), middle row/column going to the top/left), concatenated in
// TL, TR, BL, BR order.
Vector pool_quadrants(const MatrixRef& feature_map, Index positions_w, Index positions_h);

// encode_image + pool_quadrants per image; one row per image. Parallel over
// images, bit-identical to the serial result for any thread count.
Matrix encode_and_pool(const ImageSet& images, const ModelParams& params,
                       const EncoderKind& encoder, const PatchConfig& cfg, int threads = 0);

// One-vs-all ridge regression with internal standardization; the regularizer
// is picked by 5-fold cross-validation over a fixed log grid.
struct RidgeClassifier {
  Matrix weights;  // feature_dim x n_classes
  Vector intercepts;
  Vector feature_mean;
  Vector feature_scale;
  std::vector<int> classes;
  Scalar lambda = 0.0;
};

RidgeClassifier ridge_train(const MatrixRef& features, const std::vector<int>& labels);
std::vector<int> ridge_predict(const RidgeClassifier& classifier, const MatrixRef& features);

// Recovery benchmark data: K orthonormal bases, each sample a uniformly
// chosen basis scaled by uniform [0.5, 1.5] plus Gaussian noise.
struct SyntheticData {
  Matrix data;   // sample_count x input_dim
  Matrix bases;  // input_dim x basis_count, orthonormal columns
};

SyntheticData make_synthetic(Index basis_count, Index input_dim, Index sample_count,
                             Scalar noise_sigma, std::uint64_t seed);

// Mean |cosine| over the optimal one-to-one matching of true bases to
// learned columns; sign flips and permutations score 1.
Scalar match_bases(const MatrixRef& learned, const MatrixRef& truth);

}  // namespace epls

#endif
