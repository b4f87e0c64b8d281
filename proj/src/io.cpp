#include "epls/io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <vector>

namespace epls {

namespace {

constexpr char kMatrixMagic[8] = {'E', 'P', 'L', 'S', 'M', 'A', 'T', '1'};
constexpr char kModelMagic[8] = {'E', 'P', 'L', 'S', 'M', 'D', 'L', '1'};

template <typename T>
void write_le(std::ostream& out, T value) {
  std::array<char, sizeof(T)> bytes;
  std::memcpy(bytes.data(), &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) {
    std::reverse(bytes.begin(), bytes.end());
  }
  out.write(bytes.data(), sizeof(T));
}

template <typename T>
T read_le(std::istream& in, const std::string& path) {
  std::array<char, sizeof(T)> bytes;
  in.read(bytes.data(), sizeof(T));
  if (in.gcount() != static_cast<std::streamsize>(sizeof(T))) {
    throw IoError(IoCode::Truncated, path + ": truncated file");
  }
  if constexpr (std::endian::native == std::endian::big) {
    std::reverse(bytes.begin(), bytes.end());
  }
  T value;
  std::memcpy(&value, bytes.data(), sizeof(T));
  return value;
}

template <typename T>
void write_scalars(std::ostream& out, const Matrix& matrix) {
  for (Index r = 0; r < matrix.rows(); ++r) {
    for (Index c = 0; c < matrix.cols(); ++c) {
      write_le(out, static_cast<T>(matrix(r, c)));
    }
  }
}

void check_magic(std::istream& in, const char (&magic)[8], const std::string& path) {
  char found[8];
  in.read(found, 8);
  if (in.gcount() != 8) throw IoError(IoCode::Truncated, path + ": truncated header");
  if (std::memcmp(found, magic, 8) != 0) {
    throw IoError(IoCode::BadMagic, path + ": bad magic");
  }
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(IoCode::OpenFailed, path + ": cannot open for writing");
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(IoCode::OpenFailed, path + ": cannot open");
  return in;
}

std::uint32_t checked_u32(Index value, const std::string& what) {
  if (value < 0 || value > static_cast<Index>(std::numeric_limits<std::uint32_t>::max())) {
    throw IoError(IoCode::BadHeader, what + " out of 32-bit range");
  }
  return static_cast<std::uint32_t>(value);
}

}  // namespace

void write_matrix(const std::string& path, const MatrixRef& matrix, MatrixDtype dtype) {
  auto out = open_out(path);
  out.write(kMatrixMagic, 8);
  write_le(out, checked_u32(matrix.rows(), "rows"));
  write_le(out, checked_u32(matrix.cols(), "cols"));
  write_le(out, static_cast<std::uint8_t>(dtype));
  const Matrix dense = matrix;
  if (dtype == MatrixDtype::Float32) {
    write_scalars<float>(out, dense);
  } else {
    write_scalars<double>(out, dense);
  }
  if (!out) throw IoError(IoCode::WriteFailed, path + ": write failed");
}

Matrix read_matrix(const std::string& path) {
  auto in = open_in(path);
  check_magic(in, kMatrixMagic, path);
  const auto rows = read_le<std::uint32_t>(in, path);
  const auto cols = read_le<std::uint32_t>(in, path);
  const auto dtype_byte = read_le<std::uint8_t>(in, path);
  if (dtype_byte > 1) throw IoError(IoCode::BadDtype, path + ": unknown dtype");
  const auto dtype = static_cast<MatrixDtype>(dtype_byte);

  Matrix matrix(static_cast<Index>(rows), static_cast<Index>(cols));
  for (Index r = 0; r < matrix.rows(); ++r) {
    for (Index c = 0; c < matrix.cols(); ++c) {
      matrix(r, c) = dtype == MatrixDtype::Float32
                         ? static_cast<Scalar>(read_le<float>(in, path))
                         : read_le<double>(in, path);
    }
  }
  // anything after the payload is a malformed file
  char extra;
  if (in.read(&extra, 1)) throw IoError(IoCode::SizeMismatch, path + ": trailing bytes");
  return matrix;
}

void write_model(const std::string& path, const ModelParams& params) {
  auto out = open_out(path);
  out.write(kModelMagic, 8);
  write_le(out, checked_u32(params.weights.rows(), "input dim"));
  write_le(out, checked_u32(params.weights.cols(), "output dim"));
  write_le(out, static_cast<std::uint8_t>(params.activation));
  write_scalars<double>(out, params.weights);
  for (Index j = 0; j < params.bias.size(); ++j) write_le(out, params.bias(j));
  if (!out) throw IoError(IoCode::WriteFailed, path + ": write failed");
}

ModelParams read_model(const std::string& path) {
  auto in = open_in(path);
  check_magic(in, kModelMagic, path);
  const auto input_dim = read_le<std::uint32_t>(in, path);
  const auto output_dim = read_le<std::uint32_t>(in, path);
  const auto activation = read_le<std::uint8_t>(in, path);
  if (activation != 0) throw IoError(IoCode::BadHeader, path + ": unknown activation tag");

  ModelParams params;
  params.activation = ActivationKind::Logistic;
  params.weights.resize(static_cast<Index>(input_dim), static_cast<Index>(output_dim));
  for (Index r = 0; r < params.weights.rows(); ++r) {
    for (Index c = 0; c < params.weights.cols(); ++c) {
      params.weights(r, c) = read_le<double>(in, path);
    }
  }
  params.bias.resize(static_cast<Index>(output_dim));
  for (Index j = 0; j < params.bias.size(); ++j) params.bias(j) = read_le<double>(in, path);
  char extra;
  if (in.read(&extra, 1)) throw IoError(IoCode::SizeMismatch, path + ": trailing bytes");
  return params;
}

ImageSet read_stl10(const std::string& images_path, const std::string& labels_path, Index limit) {
  constexpr Index kSide = 96;
  constexpr Index kChannels = 3;
  constexpr Index kImageBytes = kSide * kSide * kChannels;

  auto in = open_in(images_path);
  in.seekg(0, std::ios::end);
  const std::int64_t file_size = static_cast<std::int64_t>(in.tellg());
  in.seekg(0, std::ios::beg);
  if (file_size % kImageBytes != 0) {
    throw IoError(IoCode::SizeMismatch,
                  images_path + ": size is not a multiple of " + std::to_string(kImageBytes));
  }
  const Index total = static_cast<Index>(file_size / kImageBytes);
  const Index count = (limit > 0 && limit < total) ? limit : total;

  ImageSet images;
  images.width = kSide;
  images.height = kSide;
  images.channels = kChannels;
  images.pixels.resize(static_cast<std::size_t>(count * kImageBytes));

  std::vector<char> raw(static_cast<std::size_t>(kImageBytes));
  for (Index i = 0; i < count; ++i) {
    in.read(raw.data(), kImageBytes);
    if (in.gcount() != kImageBytes) throw IoError(IoCode::Truncated, images_path + ": truncated");
    // column-major planes on disk, row-major internally
    for (Index c = 0; c < kChannels; ++c) {
      for (Index x = 0; x < kSide; ++x) {
        for (Index y = 0; y < kSide; ++y) {
          images.at(i, c, y, x) =
              static_cast<std::uint8_t>(raw[static_cast<std::size_t>(c * kSide * kSide + x * kSide + y)]);
        }
      }
    }
  }

  if (!labels_path.empty()) {
    auto labels_in = open_in(labels_path);
    labels_in.seekg(0, std::ios::end);
    const std::int64_t label_count = static_cast<std::int64_t>(labels_in.tellg());
    labels_in.seekg(0, std::ios::beg);
    if (label_count != total) {
      throw IoError(IoCode::LabelMismatch, labels_path + ": " + std::to_string(label_count) +
                                               " labels for " + std::to_string(total) + " images");
    }
    images.labels.resize(static_cast<std::size_t>(count));
    for (Index i = 0; i < count; ++i) {
      const auto byte = read_le<std::uint8_t>(labels_in, labels_path);
      if (byte < 1 || byte > 10) {
        throw IoError(IoCode::LabelMismatch, labels_path + ": label out of 1..10 range");
      }
      images.labels[static_cast<std::size_t>(i)] = static_cast<int>(byte) - 1;
    }
  }
  return images;
}

void export_bases_image(const ModelParams& params, Index receptive_field, Index channels,
                        const std::string& path) {
  const Index rf = receptive_field;
  if (channels != 1 && channels != 3) {
    throw ConfigError("export_bases_image: channels must be 1 or 3");
  }
  if (params.weights.rows() != rf * rf * channels) {
    throw ConfigError("export_bases_image: input dim " + std::to_string(params.weights.rows()) +
                      " != rf^2 * channels = " + std::to_string(rf * rf * channels));
  }
  const Index n_bases = params.weights.cols();
  const Index grid_cols = static_cast<Index>(std::ceil(std::sqrt(static_cast<double>(n_bases))));
  const Index grid_rows = (n_bases + grid_cols - 1) / grid_cols;
  const Index img_w = grid_cols * rf + (grid_cols - 1);
  const Index img_h = grid_rows * rf + (grid_rows - 1);

  std::vector<std::uint8_t> canvas(static_cast<std::size_t>(img_w * img_h * channels), 0);
  for (Index basis = 0; basis < n_bases; ++basis) {
    const auto column = params.weights.col(basis);
    const Scalar lo = column.minCoeff();
    const Scalar hi = column.maxCoeff();
    const Index tile_y = (basis / grid_cols) * (rf + 1);
    const Index tile_x = (basis % grid_cols) * (rf + 1);
    for (Index c = 0; c < channels; ++c) {
      for (Index y = 0; y < rf; ++y) {
        for (Index x = 0; x < rf; ++x) {
          const Scalar value = column((c * rf + y) * rf + x);
          std::uint8_t pixel = 128;
          if (hi > lo) {
            const double scaled = 255.0 * (value - lo) / (hi - lo);
            pixel = static_cast<std::uint8_t>(std::lround(std::clamp(scaled, 0.0, 255.0)));
          }
          // interleaved channels for PPM output
          canvas[static_cast<std::size_t>(((tile_y + y) * img_w + (tile_x + x)) * channels + c)] = pixel;
        }
      }
    }
  }

  auto out = open_out(path);
  out << (channels == 1 ? "P5" : "P6") << "\n" << img_w << " " << img_h << "\n255\n";
  out.write(reinterpret_cast<const char*>(canvas.data()), static_cast<std::streamsize>(canvas.size()));
  if (!out) throw IoError(IoCode::WriteFailed, path + ": write failed");
}

}  // namespace epls
