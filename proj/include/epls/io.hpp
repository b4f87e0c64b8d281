#ifndef EPLS_IO_HPP
#define EPLS_IO_HPP

#include <cstdint>
#include <string>

#include "epls/pipeline.hpp"
#include "epls/types.hpp"

namespace epls {

// File containers are little-endian and platform independent.
//
// Matrix container ("EPLSMAT1"):
//   magic   8 bytes
//   rows    u32 LE
//   cols    u32 LE
//   dtype   u8 (0 = float32, 1 = float64)
//   payload rows*cols scalars, row-major LE
//
// Model container ("EPLSMDL1"):
//   magic   8 bytes
//   N_d     u32 LE
//   N_h     u32 LE
//   act     u8 (0 = logistic)
//   W       N_d*N_h float64 row-major LE
//   b       N_h float64 LE

enum class IoCode {
  OpenFailed,
  BadMagic,
  BadHeader,
  BadDtype,
  Truncated,
  SizeMismatch,
  LabelMismatch,
  WriteFailed,
};

struct IoError : std::runtime_error {
  IoCode code;
  IoError(IoCode c, const std::string& message) : std::runtime_error(message), code(c) {}
};

enum class MatrixDtype : std::uint8_t { Float32 = 0, Float64 = 1 };

void write_matrix(const std::string& path, const MatrixRef& matrix,
                  MatrixDtype dtype = MatrixDtype::Float64);
Matrix read_matrix(const std::string& path);

void write_model(const std::string& path, const ModelParams& params);
ModelParams read_model(const std::string& path);

// STL-10 binary layout: per image, three 96x96 channel planes (R, G, B),
// each plane column-major, 8-bit. Labels, when given, are one byte per
// image in 1..10 and are remapped to 0..9. limit <= 0 reads everything;
// otherwise only the first `limit` images are read from disk.
ImageSet read_stl10(const std::string& images_path, const std::string& labels_path = "",
                    Index limit = 0);

// Tiles every column of W as an rf x rf (x channels) patch into a
// near-square grid with 1-pixel separators; each tile independently
// rescaled to 0..255 (constant tiles map to mid-gray). Binary PGM for one
// channel, PPM for three.
void export_bases_image(const ModelParams& params, Index receptive_field, Index channels,
                        const std::string& path);

}  // namespace epls

#endif
