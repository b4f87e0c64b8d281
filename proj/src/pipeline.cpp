#include "epls/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <string>
#include <thread>

#include "epls/assignment.hpp"
#include "epls/model.hpp"
#include "epls/rng.hpp"

namespace epls {

Index code_width(const EncoderKind& encoder, Index output_dim) {
  return encoder.tag == EncoderTag::SignSplit ? 2 * output_dim : output_dim;
}

Matrix extract_random_patches(const ImageSet& images, const PatchConfig& cfg, std::uint64_t seed) {
  const Index rf = cfg.receptive_field;
  if (rf < 1 || rf > images.width || rf > images.height) {
    throw ConfigError("extract_random_patches: receptive field larger than image");
  }
  if (images.count() == 0 && cfg.patch_count > 0) {
    throw ConfigError("extract_random_patches: no images to sample from");
  }
  const Index row_width = rf * rf * images.channels;
  Matrix patches(cfg.patch_count, row_width);
  auto rng = seeded_stream(seed, RngStream::Patches);
  for (Index p = 0; p < cfg.patch_count; ++p) {
    const Index image = static_cast<Index>(uniform_index(rng, static_cast<std::uint64_t>(images.count())));
    const Index x0 = static_cast<Index>(uniform_index(rng, static_cast<std::uint64_t>(images.width - rf + 1)));
    const Index y0 = static_cast<Index>(uniform_index(rng, static_cast<std::uint64_t>(images.height - rf + 1)));
    Index col = 0;
    for (Index c = 0; c < images.channels; ++c) {
      for (Index y = 0; y < rf; ++y) {
        for (Index x = 0; x < rf; ++x) {
          patches(p, col++) = static_cast<Scalar>(images.at(image, c, y0 + y, x0 + x));
        }
      }
    }
  }
  return patches;
}

void normalize_patch_rows_in_place(Matrix& patches, Scalar floor) {
  const Index cols = patches.cols();
  if (cols == 0) return;
  for (Index r = 0; r < patches.rows(); ++r) {
    auto row = patches.row(r);
    const Scalar mean = row.mean();
    row.array() -= mean;
    const Scalar variance = row.squaredNorm() / static_cast<Scalar>(cols);
    row /= std::sqrt(variance + floor);
  }
}

Matrix normalize_patch_rows(Matrix patches, Scalar floor) {
  normalize_patch_rows_in_place(patches, floor);
  return patches;
}

namespace {

Matrix image_patches(const ImageSet& images, Index image_index, const PatchConfig& cfg) {
  const Index rf = cfg.receptive_field;
  const Index stride = cfg.stride;
  if (stride < 1) throw ConfigError("encode_image: stride must be >= 1");
  if (rf < 1 || rf > images.width || rf > images.height) {
    throw ConfigError("encode_image: receptive field larger than image");
  }
  const Index positions_w = (images.width - rf) / stride + 1;
  const Index positions_h = (images.height - rf) / stride + 1;
  Matrix patches(positions_w * positions_h, rf * rf * images.channels);
  Index row = 0;
  for (Index py = 0; py < positions_h; ++py) {
    for (Index px = 0; px < positions_w; ++px, ++row) {
      Index col = 0;
      for (Index c = 0; c < images.channels; ++c) {
        for (Index y = 0; y < rf; ++y) {
          for (Index x = 0; x < rf; ++x) {
            patches(row, col++) =
                static_cast<Scalar>(images.at(image_index, c, py * stride + y, px * stride + x));
          }
        }
      }
    }
  }
  return patches;
}

}  // namespace

Matrix encode_image(const ImageSet& images, Index image_index, const ModelParams& params,
                    const EncoderKind& encoder, const PatchConfig& cfg) {
  Matrix patches = image_patches(images, image_index, cfg);
  require(patches.cols() == params.weights.rows(),
          "encode_image: model expects input dim " + std::to_string(params.weights.rows()) +
              ", patches have " + std::to_string(patches.cols()));
  normalize_patch_rows_in_place(patches, cfg.normalize_floor);

  Matrix linear(patches.rows(), params.weights.cols());
  linear.noalias() = patches * params.weights;

  const Index n_h = params.weights.cols();
  switch (encoder.tag) {
    case EncoderTag::Natural: {
      linear.rowwise() += params.bias.transpose();
      return linear.unaryExpr([](Scalar x) { return logistic(x); });
    }
    case EncoderTag::SignSplit: {
      Matrix codes(linear.rows(), 2 * n_h);
      if (encoder.split_preactivation) {
        codes.leftCols(n_h) = linear.cwiseMax(0.0);
        codes.rightCols(n_h) = (-linear).cwiseMax(0.0);
      } else {
        codes.leftCols(n_h) =
            (linear.rowwise() + params.bias.transpose()).unaryExpr([](Scalar x) { return logistic(x); });
        codes.rightCols(n_h) =
            ((-linear).rowwise() + params.bias.transpose()).unaryExpr([](Scalar x) { return logistic(x); });
      }
      return codes;
    }
    case EncoderTag::SoftThreshold: {
      if (!(encoder.alpha > 0.0)) throw ConfigError("encode_image: soft threshold alpha must be > 0");
      return (linear.array() - encoder.alpha).max(0.0);
    }
  }
  throw ConfigError("encode_image: unknown encoder");
}

Vector pool_quadrants(const MatrixRef& feature_map, Index positions_w, Index positions_h) {
  require(positions_w * positions_h == feature_map.rows(),
          "pool_quadrants: grid size does not match feature map rows");
  const Index width = feature_map.cols();
  const Index split_x = (positions_w + 1) / 2;
  const Index split_y = (positions_h + 1) / 2;
  Vector pooled = Vector::Zero(4 * width);
  for (Index y = 0; y < positions_h; ++y) {
    for (Index x = 0; x < positions_w; ++x) {
      const Index quadrant = (y < split_y ? 0 : 2) + (x < split_x ? 0 : 1);
      pooled.segment(quadrant * width, width) += feature_map.row(y * positions_w + x).transpose();
    }
  }
  return pooled;
}

Matrix encode_and_pool(const ImageSet& images, const ModelParams& params,
                       const EncoderKind& encoder, const PatchConfig& cfg, int threads) {
  const Index n_images = images.count();
  const Index positions_w = (images.width - cfg.receptive_field) / cfg.stride + 1;
  const Index positions_h = (images.height - cfg.receptive_field) / cfg.stride + 1;
  Matrix pooled(n_images, 4 * code_width(encoder, params.weights.cols()));

  const auto encode_range = [&](Index begin, Index end) {
    for (Index i = begin; i < end; ++i) {
      pooled.row(i) =
          pool_quadrants(encode_image(images, i, params, encoder, cfg), positions_w, positions_h)
              .transpose();
    }
  };

  int n_threads = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
  if (n_threads < 1) n_threads = 1;
  n_threads = static_cast<int>(std::min<Index>(n_threads, std::max<Index>(n_images, 1)));
  if (n_threads == 1) {
    encode_range(0, n_images);
    return pooled;
  }
  std::vector<std::thread> workers;
  const Index chunk = (n_images + n_threads - 1) / n_threads;
  for (int t = 0; t < n_threads; ++t) {
    const Index begin = t * chunk;
    const Index end = std::min(n_images, begin + chunk);
    if (begin >= end) break;
    workers.emplace_back(encode_range, begin, end);
  }
  for (auto& w : workers) w.join();
  return pooled;
}

namespace {

constexpr Scalar kRidgeGrid[] = {1e-3, 1e-2, 1e-1, 1.0, 1e1, 1e2, 1e3};

// Fit on standardized features; one-hot targets centered per class.
void ridge_fit(const Matrix& standardized, const std::vector<int>& class_index, Index n_classes,
               Scalar lambda, Matrix& weights, Vector& intercepts) {
  const Index n = standardized.rows();
  const Index d = standardized.cols();
  Matrix targets = Matrix::Zero(n, n_classes);
  for (Index i = 0; i < n; ++i) targets(i, class_index[static_cast<std::size_t>(i)]) = 1.0;
  const Eigen::RowVectorXd target_mean = targets.colwise().mean();
  targets.rowwise() -= target_mean;

  Matrix gram = standardized.transpose() * standardized;
  gram.diagonal().array() += lambda;
  weights = Eigen::LDLT<Eigen::MatrixXd>(gram).solve(standardized.transpose() * targets);
  intercepts = target_mean.transpose();
}

}  // namespace

RidgeClassifier ridge_train(const MatrixRef& features, const std::vector<int>& labels) {
  const Index n = features.rows();
  require(static_cast<Index>(labels.size()) == n, "ridge_train: labels/features row mismatch");
  std::set<int> unique(labels.begin(), labels.end());
  if (unique.size() < 2) throw ConfigError("ridge_train: need at least 2 classes");

  RidgeClassifier model;
  model.classes.assign(unique.begin(), unique.end());
  const Index n_classes = static_cast<Index>(model.classes.size());
  std::vector<int> class_index(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    class_index[i] = static_cast<int>(
        std::lower_bound(model.classes.begin(), model.classes.end(), labels[i]) -
        model.classes.begin());
  }

  model.feature_mean = features.colwise().mean();
  Matrix standardized = features.rowwise() - model.feature_mean.transpose();
  model.feature_scale =
      (standardized.colwise().squaredNorm() / static_cast<Scalar>(n)).cwiseSqrt().transpose();
  for (Index j = 0; j < model.feature_scale.size(); ++j) {
    if (model.feature_scale(j) == 0.0) model.feature_scale(j) = 1.0;
  }
  standardized.array().rowwise() /= model.feature_scale.transpose().array();

  // 5-fold CV by row index; ties resolved toward the smaller lambda.
  const int k_folds = static_cast<int>(std::min<Index>(5, n));
  Scalar best_lambda = kRidgeGrid[0];
  Index best_errors = std::numeric_limits<Index>::max();
  if (k_folds >= 2) {
    for (const Scalar lambda : kRidgeGrid) {
      Index errors = 0;
      for (int fold = 0; fold < k_folds; ++fold) {
        std::vector<Index> train_rows, test_rows;
        for (Index i = 0; i < n; ++i) {
          (static_cast<int>(i % k_folds) == fold ? test_rows : train_rows).push_back(i);
        }
        Matrix fold_features(static_cast<Index>(train_rows.size()), standardized.cols());
        std::vector<int> fold_classes(train_rows.size());
        for (std::size_t i = 0; i < train_rows.size(); ++i) {
          fold_features.row(static_cast<Index>(i)) = standardized.row(train_rows[i]);
          fold_classes[i] = class_index[static_cast<std::size_t>(train_rows[i])];
        }
        Matrix weights;
        Vector intercepts;
        ridge_fit(fold_features, fold_classes, n_classes, lambda, weights, intercepts);
        for (const Index row : test_rows) {
          Index predicted;
          (standardized.row(row) * weights + intercepts.transpose()).maxCoeff(&predicted);
          if (predicted != class_index[static_cast<std::size_t>(row)]) ++errors;
        }
      }
      if (errors < best_errors) {
        best_errors = errors;
        best_lambda = lambda;
      }
    }
  }

  model.lambda = best_lambda;
  ridge_fit(standardized, class_index, n_classes, best_lambda, model.weights, model.intercepts);
  return model;
}

std::vector<int> ridge_predict(const RidgeClassifier& classifier, const MatrixRef& features) {
  require(features.cols() == classifier.weights.rows(), "ridge_predict: feature width mismatch");
  std::vector<int> predictions(static_cast<std::size_t>(features.rows()));
  for (Index i = 0; i < features.rows(); ++i) {
    const Eigen::RowVectorXd standardized =
        (features.row(i) - classifier.feature_mean.transpose()).array() /
        classifier.feature_scale.transpose().array();
    Index best;
    (standardized * classifier.weights + classifier.intercepts.transpose()).maxCoeff(&best);
    predictions[static_cast<std::size_t>(i)] = classifier.classes[static_cast<std::size_t>(best)];
  }
  return predictions;
}

SyntheticData make_synthetic(Index basis_count, Index input_dim, Index sample_count,
                             Scalar noise_sigma, std::uint64_t seed) {
  if (basis_count > input_dim) throw ConfigError("make_synthetic: basis_count must be <= input_dim");
  if (basis_count < 1 || sample_count < 1) throw ConfigError("make_synthetic: empty request");
  auto rng = seeded_stream(seed, RngStream::Synthetic);

  Matrix gaussian_block(input_dim, basis_count);
  for (Index i = 0; i < input_dim; ++i) {
    for (Index j = 0; j < basis_count; ++j) gaussian_block(i, j) = gaussian(rng);
  }
  Eigen::MatrixXd thin_q = Eigen::HouseholderQR<Eigen::MatrixXd>(gaussian_block)
                               .householderQ() *
                           Eigen::MatrixXd::Identity(input_dim, basis_count);

  SyntheticData synthetic;
  synthetic.bases = thin_q;
  synthetic.data.resize(sample_count, input_dim);
  for (Index n = 0; n < sample_count; ++n) {
    const Index k = static_cast<Index>(uniform_index(rng, static_cast<std::uint64_t>(basis_count)));
    const Scalar scale = uniform_in(rng, 0.5, 1.5);
    synthetic.data.row(n) = scale * synthetic.bases.col(k).transpose();
    if (noise_sigma > 0.0) {
      for (Index d = 0; d < input_dim; ++d) synthetic.data(n, d) += noise_sigma * gaussian(rng);
    }
  }
  return synthetic;
}

Scalar match_bases(const MatrixRef& learned, const MatrixRef& truth) {
  require(learned.rows() == truth.rows(), "match_bases: dimension mismatch");
  require(learned.cols() >= truth.cols(), "match_bases: need at least as many learned columns");
  const Index k = truth.cols();
  Matrix cost(k, learned.cols());
  for (Index i = 0; i < k; ++i) {
    const Scalar truth_norm = truth.col(i).norm();
    for (Index j = 0; j < learned.cols(); ++j) {
      const Scalar denom = truth_norm * learned.col(j).norm();
      const Scalar cosine = denom > 0.0 ? std::abs(truth.col(i).dot(learned.col(j))) / denom : 0.0;
      cost(i, j) = 1.0 - cosine;
    }
  }
  const std::vector<Index> matched = min_cost_matching(cost);
  Scalar total = 0.0;
  for (Index i = 0; i < k; ++i) total += 1.0 - cost(i, matched[static_cast<std::size_t>(i)]);
  return total / static_cast<Scalar>(k);
}

}  // namespace epls
