#ifndef EPLS_TESTS_SYNTHETIC_IMAGES_HPP
#define EPLS_TESTS_SYNTHETIC_IMAGES_HPP

#include <algorithm>
#include <cmath>

#include "epls/pipeline.hpp"
#include "epls/rng.hpp"

namespace epls::testing {

// Two-class oriented textures: class 0 carries horizontal stripes, class 1
// vertical, with per-image random frequency and phase plus pixel noise.
inline ImageSet make_stripe_images(Index count, Index side, std::uint64_t seed) {
  ImageSet images;
  images.width = side;
  images.height = side;
  images.channels = 1;
  images.pixels.resize(static_cast<std::size_t>(count * side * side));
  images.labels.resize(static_cast<std::size_t>(count));
  auto rng = seeded_stream(seed, RngStream::Synthetic);
  constexpr double kTau = 2.0 * 3.14159265358979323846;
  for (Index i = 0; i < count; ++i) {
    const int label = static_cast<int>(i % 2);
    images.labels[static_cast<std::size_t>(i)] = label;
    const double frequency = uniform_in(rng, 0.15, 0.35);
    const double phase = uniform_in(rng, 0.0, kTau);
    for (Index y = 0; y < side; ++y) {
      for (Index x = 0; x < side; ++x) {
        const double t = static_cast<double>(label == 0 ? y : x);
        const double value =
            128.0 + 60.0 * std::sin(kTau * frequency * t + phase) + 15.0 * gaussian(rng);
        images.at(i, 0, y, x) =
            static_cast<std::uint8_t>(std::lround(std::clamp(value, 0.0, 255.0)));
      }
    }
  }
  return images;
}

inline ImageSet slice_images(const ImageSet& images, Index begin, Index end) {
  ImageSet out;
  out.width = images.width;
  out.height = images.height;
  out.channels = images.channels;
  const Index per = images.pixels_per_image();
  out.pixels.assign(images.pixels.begin() + begin * per, images.pixels.begin() + end * per);
  if (!images.labels.empty()) {
    out.labels.assign(images.labels.begin() + begin, images.labels.begin() + end);
  }
  return out;
}

}  // namespace epls::testing

#endif
