// Command-line surface for the EPLS feature-learning library.
//
// Exit codes: 0 success, 2 usage error, 3 data/format error, 4 numerical
// failure.

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "epls/bench.hpp"
#include "epls/io.hpp"
#include "epls/model.hpp"
#include "epls/pipeline.hpp"
#include "epls/trainer.hpp"

namespace {

using namespace epls;

struct ExtractOptions {
  std::string images_path;
  std::string matrix_path;
  Index width = 0, height = 0, channels = 0;
  Index receptive_field = 10;
  Index count = 0;
  std::uint64_t seed = 42;
  double floor = 10.0;
  std::string dtype = "f64";
  Index limit = 0;
  std::string out_path;
};

struct TrainOptions {
  std::string patches_path;
  Index outputs = 0;
  Index batch = 0;
  std::uint64_t seed = 42;
  std::string mode = "soft";
  std::string optimizer = "adaptive";
  int max_epochs = 500;
  double epsilon = 1e-6;
  double tol = 1e-6;
  bool verbose = false;
  std::string out_path;
  std::string log_path;
};

struct EncodeOptions {
  std::string model_path;
  std::string images_path;
  std::string labels_path;
  std::string labels_out_path;
  Index limit = 0;
  std::string encoder = "natural";
  double alpha = 0.25;
  Index receptive_field = 10;
  Index stride = 1;
  double floor = 10.0;
  int threads = 0;
  std::string out_path;
};

struct EvalOptions {
  std::string train_features, train_labels, test_features, test_labels;
};

struct ExportOptions {
  std::string model_path;
  Index receptive_field = 10;
  Index channels = 3;
  std::string out_path;
};

struct BenchOptions {
  Index samples = 100000;
  Index outputs = 256;
  int trials = 5;
  std::uint64_t seed = 42;
};

ImageSet image_set_from_matrix(const std::string& path, Index width, Index height, Index channels) {
  if (width < 1 || height < 1 || (channels != 1 && channels != 3)) {
    throw ConfigError("--matrix input needs --width, --height and --channels (1 or 3)");
  }
  const Matrix rows = read_matrix(path);
  if (rows.cols() != width * height * channels) {
    throw IoError(IoCode::SizeMismatch, path + ": row width " + std::to_string(rows.cols()) +
                                            " != width*height*channels");
  }
  ImageSet images;
  images.width = width;
  images.height = height;
  images.channels = channels;
  images.pixels.resize(static_cast<std::size_t>(rows.rows() * rows.cols()));
  for (Index i = 0; i < rows.rows(); ++i) {
    for (Index j = 0; j < rows.cols(); ++j) {
      const double clamped = std::clamp(rows(i, j), 0.0, 255.0);
      images.pixels[static_cast<std::size_t>(i * rows.cols() + j)] =
          static_cast<std::uint8_t>(std::lround(clamped));
    }
  }
  return images;
}

int run_extract(const ExtractOptions& opt) {
  std::printf("config: command=extract-patches images=%s matrix=%s rf=%lld count=%lld seed=%llu "
              "floor=%g dtype=%s limit=%lld out=%s\n",
              opt.images_path.c_str(), opt.matrix_path.c_str(),
              static_cast<long long>(opt.receptive_field), static_cast<long long>(opt.count),
              static_cast<unsigned long long>(opt.seed), opt.floor, opt.dtype.c_str(),
              static_cast<long long>(opt.limit), opt.out_path.c_str());
  if (opt.images_path.empty() == opt.matrix_path.empty()) {
    throw ConfigError("exactly one of --images or --matrix is required");
  }
  const ImageSet images =
      !opt.images_path.empty()
          ? read_stl10(opt.images_path, "", opt.limit)
          : image_set_from_matrix(opt.matrix_path, opt.width, opt.height, opt.channels);

  PatchConfig cfg;
  cfg.receptive_field = opt.receptive_field;
  cfg.patch_count = opt.count;
  cfg.normalize_floor = opt.floor;
  Matrix patches = extract_random_patches(images, cfg, opt.seed);
  normalize_patch_rows_in_place(patches, cfg.normalize_floor);
  write_matrix(opt.out_path, patches,
               opt.dtype == "f32" ? MatrixDtype::Float32 : MatrixDtype::Float64);
  std::printf("wrote %lld x %lld patch matrix to %s\n", static_cast<long long>(patches.rows()),
              static_cast<long long>(patches.cols()), opt.out_path.c_str());
  return 0;
}

OptimizerOptions parse_optimizer(const std::string& text) {
  OptimizerOptions options;
  if (text == "adaptive") {
    options.kind = OptimizerKind::AdaptiveVsgd;
  } else if (text.rfind("fixed:", 0) == 0) {
    options.kind = OptimizerKind::FixedRate;
    try {
      options.fixed_rate = std::stod(text.substr(6));
    } catch (const std::exception&) {
      throw ConfigError("--optimizer fixed:<rate> needs a numeric rate");
    }
    if (!(options.fixed_rate > 0.0)) throw ConfigError("--optimizer fixed rate must be > 0");
  } else {
    throw ConfigError("--optimizer must be 'adaptive' or 'fixed:<rate>'");
  }
  return options;
}

int run_train(const TrainOptions& opt) {
  std::printf("config: command=train patches=%s outputs=%lld batch=%lld seed=%llu mode=%s "
              "optimizer=%s max-epochs=%d epsilon=%g tol=%g out=%s log=%s\n",
              opt.patches_path.c_str(), static_cast<long long>(opt.outputs),
              static_cast<long long>(opt.batch), static_cast<unsigned long long>(opt.seed),
              opt.mode.c_str(), opt.optimizer.c_str(), opt.max_epochs, opt.epsilon, opt.tol,
              opt.out_path.c_str(), opt.log_path.c_str());

  TrainConfig config;
  config.output_dim = opt.outputs;
  config.batch_size = opt.batch;
  config.seed = opt.seed;
  config.max_epochs = opt.max_epochs;
  config.epsilon = opt.epsilon;
  config.stop_rel_tol = opt.tol;
  config.verbose = opt.verbose;
  if (opt.mode == "soft") {
    config.inhibitor_mode = InhibitorMode::SoftPaper;
  } else if (opt.mode == "strict") {
    config.inhibitor_mode = InhibitorMode::StrictCap;
  } else {
    throw ConfigError("--mode must be 'soft' or 'strict'");
  }
  config.optimizer = parse_optimizer(opt.optimizer);

  const Matrix patches = read_matrix(opt.patches_path);
  auto [params, report] = train(patches, config);
  write_model(opt.out_path, params);

  if (!opt.log_path.empty()) {
    std::ofstream log(opt.log_path);
    if (!log) throw IoError(IoCode::OpenFailed, opt.log_path + ": cannot open for writing");
    log << "epoch,loss,rel_decrement,hist_min,hist_max\n";
    for (std::size_t e = 0; e < report.epoch_loss.size(); ++e) {
      const auto& hist = report.epoch_histogram[e];
      const auto [mn, mx] = std::minmax_element(hist.begin(), hist.end());
      log << (e + 1) << "," << report.epoch_loss[e] << ",";
      if (e > 0 && report.epoch_loss[e - 1] > 0.0) {
        log << std::abs(report.epoch_loss[e - 1] - report.epoch_loss[e]) / report.epoch_loss[e - 1];
      }
      log << "," << *mn << "," << *mx << "\n";
    }
  }

  std::printf("epochs_run: %d\n", report.epochs_run);
  std::printf("final_loss: %.10g\n", report.epoch_loss.back());
  std::printf("stop_reason: %s\n",
              report.stop_reason == StopReason::Converged ? "Converged" : "MaxEpochs");
  std::printf("wrote model to %s\n", opt.out_path.c_str());
  return 0;
}

int run_encode(const EncodeOptions& opt) {
  std::printf("config: command=encode model=%s images=%s limit=%lld encoder=%s alpha=%g rf=%lld "
              "stride=%lld floor=%g threads=%d out=%s\n",
              opt.model_path.c_str(), opt.images_path.c_str(), static_cast<long long>(opt.limit),
              opt.encoder.c_str(), opt.alpha, static_cast<long long>(opt.receptive_field),
              static_cast<long long>(opt.stride), opt.floor, opt.threads, opt.out_path.c_str());

  const ModelParams params = read_model(opt.model_path);
  const ImageSet images = read_stl10(opt.images_path, opt.labels_path, opt.limit);

  EncoderKind encoder;
  if (opt.encoder == "natural") {
    encoder.tag = EncoderTag::Natural;
  } else if (opt.encoder == "signsplit") {
    encoder.tag = EncoderTag::SignSplit;
  } else if (opt.encoder == "softthresh") {
    encoder.tag = EncoderTag::SoftThreshold;
    encoder.alpha = opt.alpha;
  } else {
    throw ConfigError("--encoder must be natural, signsplit or softthresh");
  }

  PatchConfig cfg;
  cfg.receptive_field = opt.receptive_field;
  cfg.stride = opt.stride;
  cfg.normalize_floor = opt.floor;

  const Matrix pooled = encode_and_pool(images, params, encoder, cfg, opt.threads);
  write_matrix(opt.out_path, pooled);
  std::printf("wrote %lld x %lld feature matrix to %s\n", static_cast<long long>(pooled.rows()),
              static_cast<long long>(pooled.cols()), opt.out_path.c_str());

  if (!opt.labels_out_path.empty()) {
    if (images.labels.empty()) throw ConfigError("--labels-out needs --labels");
    Matrix labels(static_cast<Index>(images.labels.size()), 1);
    for (std::size_t i = 0; i < images.labels.size(); ++i) {
      labels(static_cast<Index>(i), 0) = static_cast<Scalar>(images.labels[i]);
    }
    write_matrix(opt.labels_out_path, labels);
    std::printf("wrote %lld labels to %s\n", static_cast<long long>(labels.rows()),
                opt.labels_out_path.c_str());
  }
  return 0;
}

std::vector<int> labels_from_matrix(const std::string& path) {
  const Matrix m = read_matrix(path);
  if (m.cols() != 1) throw IoError(IoCode::SizeMismatch, path + ": labels must be a column matrix");
  std::vector<int> labels(static_cast<std::size_t>(m.rows()));
  for (Index i = 0; i < m.rows(); ++i) labels[static_cast<std::size_t>(i)] = static_cast<int>(std::lround(m(i, 0)));
  return labels;
}

int run_eval(const EvalOptions& opt) {
  std::printf("config: command=eval train-features=%s train-labels=%s test-features=%s "
              "test-labels=%s\n",
              opt.train_features.c_str(), opt.train_labels.c_str(), opt.test_features.c_str(),
              opt.test_labels.c_str());

  const Matrix train_x = read_matrix(opt.train_features);
  const Matrix test_x = read_matrix(opt.test_features);
  const std::vector<int> train_y = labels_from_matrix(opt.train_labels);
  const std::vector<int> test_y = labels_from_matrix(opt.test_labels);
  if (static_cast<Index>(test_y.size()) != test_x.rows()) {
    throw IoError(IoCode::LabelMismatch, "test labels/features row mismatch");
  }

  const RidgeClassifier classifier = ridge_train(train_x, train_y);
  const std::set<int> known(classifier.classes.begin(), classifier.classes.end());
  for (const int label : test_y) {
    if (!known.count(label)) {
      throw IoError(IoCode::LabelMismatch,
                    "test label " + std::to_string(label) + " unseen in training set");
    }
  }

  const std::vector<int> predicted = ridge_predict(classifier, test_x);
  std::size_t correct = 0;
  std::map<int, std::pair<std::size_t, std::size_t>> per_class;  // correct, total
  for (std::size_t i = 0; i < test_y.size(); ++i) {
    per_class[test_y[i]].second += 1;
    if (predicted[i] == test_y[i]) {
      ++correct;
      per_class[test_y[i]].first += 1;
    }
  }
  std::printf("accuracy: %.6f\n", static_cast<double>(correct) / static_cast<double>(test_y.size()));
  for (const auto& [label, counts] : per_class) {
    std::printf("class %d accuracy: %.6f (%zu/%zu)\n", label,
                static_cast<double>(counts.first) / static_cast<double>(counts.second),
                counts.first, counts.second);
  }
  return 0;
}

int run_export(const ExportOptions& opt) {
  std::printf("config: command=export-bases model=%s rf=%lld channels=%lld out=%s\n",
              opt.model_path.c_str(), static_cast<long long>(opt.receptive_field),
              static_cast<long long>(opt.channels), opt.out_path.c_str());
  const ModelParams params = read_model(opt.model_path);
  export_bases_image(params, opt.receptive_field, opt.channels, opt.out_path);
  std::printf("wrote bases grid to %s\n", opt.out_path.c_str());
  return 0;
}

int run_bench(const BenchOptions& opt) {
  std::printf("config: command=bench-target N=%lld Nh=%lld trials=%d seed=%llu\n",
              static_cast<long long>(opt.samples), static_cast<long long>(opt.outputs), opt.trials,
              static_cast<unsigned long long>(opt.seed));
  const TargetBenchResult r = bench_generate_target(opt.samples, opt.outputs, opt.trials, opt.seed);
  std::printf("%-16s %-10s %s\n", "size", "seconds", "ratio vs base");
  std::printf("N    x Nh        %.6f   1.00\n", r.seconds_base);
  std::printf("2N   x Nh        %.6f   %.2f\n", r.seconds_double_samples, r.ratio_samples);
  std::printf("N    x 2Nh       %.6f   %.2f\n", r.seconds_double_outputs, r.ratio_outputs);
  std::printf("2N   x 2Nh       %.6f   %.2f\n", r.seconds_double_both,
              r.seconds_double_both / r.seconds_base);
  std::printf("elements_per_second: %.4g\n", r.elements_per_second);
  std::printf("ratio_N: %.4f\nratio_Nh: %.4f\n", r.ratio_samples, r.ratio_outputs);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"EPLS unsupervised sparse feature learning"};
  app.require_subcommand(1);

  ExtractOptions extract_opt;
  auto* extract = app.add_subcommand("extract-patches", "Extract and normalize random patches");
  extract->add_option("--images", extract_opt.images_path, "STL-10 binary image file");
  extract->add_option("--matrix", extract_opt.matrix_path, "Matrix file of flattened images");
  extract->add_option("--width", extract_opt.width, "Image width for --matrix input");
  extract->add_option("--height", extract_opt.height, "Image height for --matrix input");
  extract->add_option("--channels", extract_opt.channels, "Image channels for --matrix input");
  extract->add_option("--rf", extract_opt.receptive_field, "Receptive field side length")
      ->capture_default_str();
  extract->add_option("--count", extract_opt.count, "Number of patches")->required();
  extract->add_option("--seed", extract_opt.seed, "RNG seed")->capture_default_str();
  extract->add_option("--floor", extract_opt.floor, "Contrast normalization variance floor")
      ->capture_default_str();
  extract->add_option("--dtype", extract_opt.dtype, "Output precision: f64 or f32")
      ->check(CLI::IsMember({"f64", "f32"}))
      ->capture_default_str();
  extract->add_option("--limit", extract_opt.limit, "Read at most this many images (0 = all)")
      ->capture_default_str();
  extract->add_option("--out", extract_opt.out_path, "Output patch matrix")->required();

  TrainOptions train_opt;
  auto* train_cmd = app.add_subcommand("train", "Train a dictionary on a patch matrix");
  train_cmd->add_option("--patches", train_opt.patches_path, "Input patch matrix")->required();
  train_cmd->add_option("--outputs", train_opt.outputs, "Number of outputs N_h")->required();
  train_cmd->add_option("--batch", train_opt.batch, "Mini-batch size (0 = N_h)")
      ->capture_default_str();
  train_cmd->add_option("--seed", train_opt.seed, "RNG seed")->capture_default_str();
  train_cmd->add_option("--mode", train_opt.mode, "Inhibitor mode: soft or strict")
      ->check(CLI::IsMember({"soft", "strict"}))
      ->capture_default_str();
  train_cmd->add_option("--optimizer", train_opt.optimizer, "adaptive or fixed:<rate>")
      ->capture_default_str();
  train_cmd->add_option("--max-epochs", train_opt.max_epochs, "Epoch cap")->capture_default_str();
  train_cmd->add_option("--epsilon", train_opt.epsilon, "Inhibitor epsilon")->capture_default_str();
  train_cmd->add_option("--tol", train_opt.tol, "Relative decrement stop tolerance")
      ->capture_default_str();
  train_cmd->add_flag("--verbose", train_opt.verbose, "Per-epoch progress on stderr");
  train_cmd->add_option("--out", train_opt.out_path, "Output model file")->required();
  train_cmd->add_option("--log", train_opt.log_path, "Per-epoch CSV report");

  EncodeOptions encode_opt;
  auto* encode = app.add_subcommand("encode", "Encode images into pooled features");
  encode->add_option("--model", encode_opt.model_path, "Trained model file")->required();
  encode->add_option("--images", encode_opt.images_path, "STL-10 binary image file")->required();
  encode->add_option("--labels", encode_opt.labels_path, "STL-10 binary label file");
  encode->add_option("--labels-out", encode_opt.labels_out_path, "Write labels as a column matrix");
  encode->add_option("--limit", encode_opt.limit, "Encode at most this many images (0 = all)")
      ->capture_default_str();
  encode->add_option("--encoder", encode_opt.encoder, "natural, signsplit or softthresh")
      ->check(CLI::IsMember({"natural", "signsplit", "softthresh"}))
      ->capture_default_str();
  encode->add_option("--alpha", encode_opt.alpha, "Soft threshold")->capture_default_str();
  encode->add_option("--rf", encode_opt.receptive_field, "Receptive field side length")
      ->capture_default_str();
  encode->add_option("--stride", encode_opt.stride, "Patch stride")->capture_default_str();
  encode->add_option("--floor", encode_opt.floor, "Contrast normalization variance floor")
      ->capture_default_str();
  encode->add_option("--threads", encode_opt.threads, "Worker threads (0 = hardware)")
      ->capture_default_str();
  encode->add_option("--out", encode_opt.out_path, "Output feature matrix")->required();

  EvalOptions eval_opt;
  auto* eval = app.add_subcommand("eval", "Ridge-classifier accuracy on pooled features");
  eval->add_option("--train-features", eval_opt.train_features)->required();
  eval->add_option("--train-labels", eval_opt.train_labels)->required();
  eval->add_option("--test-features", eval_opt.test_features)->required();
  eval->add_option("--test-labels", eval_opt.test_labels)->required();

  ExportOptions export_opt;
  auto* export_cmd = app.add_subcommand("export-bases", "Render dictionary columns as an image grid");
  export_cmd->add_option("--model", export_opt.model_path)->required();
  export_cmd->add_option("--rf", export_opt.receptive_field)->capture_default_str();
  export_cmd->add_option("--channels", export_opt.channels)->capture_default_str();
  export_cmd->add_option("--out", export_opt.out_path)->required();

  BenchOptions bench_opt;
  auto* bench = app.add_subcommand("bench-target", "Time target generation at doubled sizes");
  bench->add_option("--N", bench_opt.samples, "Samples per epoch")->capture_default_str();
  bench->add_option("--Nh", bench_opt.outputs, "Output dimensionality")->capture_default_str();
  bench->add_option("--trials", bench_opt.trials, "Timing trials (best kept)")
      ->capture_default_str();
  bench->add_option("--seed", bench_opt.seed, "RNG seed")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (extract->parsed()) return run_extract(extract_opt);
    if (train_cmd->parsed()) return run_train(train_opt);
    if (encode->parsed()) return run_encode(encode_opt);
    if (eval->parsed()) return run_eval(eval_opt);
    if (export_cmd->parsed()) return run_export(export_opt);
    if (bench->parsed()) return run_bench(bench_opt);
    std::cerr << "usage error: no subcommand\n";
    return 2;
  } catch (const IoError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const NumericError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 4;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
