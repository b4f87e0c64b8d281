#include <doctest.h>

#include <cmath>

#include "epls/model.hpp"
#include "epls/rng.hpp"

using namespace epls;

namespace {

Matrix random_matrix(Index rows, Index cols, std::mt19937_64& rng, double lo = -1.0,
                     double hi = 1.0) {
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) m(i, j) = uniform_in(rng, lo, hi);
  }
  return m;
}

ModelParams random_params(Index input_dim, Index output_dim, std::mt19937_64& rng) {
  ModelParams params;
  params.weights = random_matrix(input_dim, output_dim, rng);
  params.bias = random_matrix(output_dim, 1, rng);
  return params;
}

// Independent oracle: central differences of the loss through the forward
// pass, target frozen.
GradientPair finite_difference_gradient(const Matrix& data, ModelParams params,
                                        const Matrix& target, double step = 1e-5) {
  GradientPair fd;
  fd.d_weights.resize(params.weights.rows(), params.weights.cols());
  fd.d_bias.resize(params.bias.size());
  const auto loss_at = [&]() { return l2_loss(forward(data, params), target); };
  for (Index i = 0; i < params.weights.rows(); ++i) {
    for (Index j = 0; j < params.weights.cols(); ++j) {
      const double saved = params.weights(i, j);
      params.weights(i, j) = saved + step;
      const double up = loss_at();
      params.weights(i, j) = saved - step;
      const double down = loss_at();
      params.weights(i, j) = saved;
      fd.d_weights(i, j) = (up - down) / (2.0 * step);
    }
  }
  for (Index j = 0; j < params.bias.size(); ++j) {
    const double saved = params.bias(j);
    params.bias(j) = saved + step;
    const double up = loss_at();
    params.bias(j) = saved - step;
    const double down = loss_at();
    params.bias(j) = saved;
    fd.d_bias(j) = (up - down) / (2.0 * step);
  }
  return fd;
}

double gradient_rel_error(const GradientPair& a, const GradientPair& b) {
  const double diff = std::sqrt((a.d_weights - b.d_weights).squaredNorm() +
                                (a.d_bias - b.d_bias).squaredNorm());
  const double scale =
      std::sqrt(a.d_weights.squaredNorm() + a.d_bias.squaredNorm());
  return diff / std::max(scale, 1e-12);
}

}  // namespace

TEST_CASE("forward of a zero matrix is all one-half") {
  ModelParams params;
  params.weights = Matrix::Random(4, 3);
  params.bias = Vector::Zero(3);
  const Matrix out = forward(Matrix::Zero(5, 4), params);
  CHECK(out.rows() == 5);
  CHECK(out.cols() == 3);
  for (Index i = 0; i < out.size(); ++i) CHECK(out.reshaped()(i) == doctest::Approx(0.5));
}

TEST_CASE("forward matches hand evaluation") {
  ModelParams params;
  params.weights = Matrix(2, 2);
  params.weights << 2, 0, 0, 2;
  params.bias = Vector::Zero(2);
  Matrix data(1, 2);
  data << 1, 0;
  const Matrix out = forward(data, params);
  CHECK(out(0, 0) == doctest::Approx(0.8807970779778823).epsilon(1e-12));
  CHECK(out(0, 1) == doctest::Approx(0.5));
}

TEST_CASE("forward output lies strictly inside (0,1)") {
  auto rng = seeded_stream(1, RngStream::Init);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix data = random_matrix(6, 5, rng, -3.0, 3.0);
    ModelParams params = random_params(5, 4, rng);
    const Matrix out = forward(data, params);
    CHECK((out.array() > 0.0).all());
    CHECK((out.array() < 1.0).all());
  }
}

TEST_CASE("forward rejects mismatched shapes") {
  ModelParams params;
  params.weights = Matrix::Zero(3, 2);
  params.bias = Vector::Zero(2);
  CHECK_THROWS_AS(forward(Matrix::Zero(1, 4), params), ShapeError);
}

TEST_CASE("l2 loss hand values") {
  Matrix h(2, 2), t(2, 2);
  h << 0.9, 0.3, 0.8, 0.1;
  t << 1, 0, 0, 1;
  CHECK(l2_loss(h, h) == 0.0);
  CHECK(l2_loss(h, t) == doctest::Approx(1.55).epsilon(1e-12));
  Matrix t2(2, 2);
  t2 << 0, 1, 1, 0;
  CHECK(l2_loss(h, t2) == doctest::Approx(1.35).epsilon(1e-12));
  CHECK_THROWS_AS(l2_loss(h, Matrix::Zero(1, 2)), ShapeError);
}

TEST_CASE("one-hot loss identity") {
  // l2_loss(H, T) == sum ||h_n||^2 + rows - 2 sum H[n, k(n)] for one-hot T
  auto rng = seeded_stream(2, RngStream::Init);
  for (int trial = 0; trial < 50; ++trial) {
    const Index rows = 1 + static_cast<Index>(uniform_index(rng, 8));
    const Index cols = 1 + static_cast<Index>(uniform_index(rng, 6));
    const Matrix h = random_matrix(rows, cols, rng, 0.0, 1.0);
    Matrix t = Matrix::Zero(rows, cols);
    double picked = 0.0;
    for (Index n = 0; n < rows; ++n) {
      const Index k = static_cast<Index>(uniform_index(rng, static_cast<std::uint64_t>(cols)));
      t(n, k) = 1.0;
      picked += h(n, k);
    }
    const double expected = h.squaredNorm() + static_cast<double>(rows) - 2.0 * picked;
    CHECK(l2_loss(h, t) == doctest::Approx(expected).epsilon(1e-9));
  }
}

TEST_CASE("gradient is zero at zero residual") {
  auto rng = seeded_stream(3, RngStream::Init);
  const Matrix data = random_matrix(4, 3, rng);
  ModelParams params = random_params(3, 2, rng);
  const Matrix h = forward(data, params);
  const GradientPair grads = gradient(data, h, h);
  CHECK(grads.d_weights.isZero(0.0));
  CHECK(grads.d_bias.isZero(0.0));
}

TEST_CASE("gradient matches central finite differences with frozen target") {
  auto rng = seeded_stream(4, RngStream::Init);
  for (int trial = 0; trial < 10; ++trial) {
    const Index rows = 1 + static_cast<Index>(uniform_index(rng, 20));
    const Index in_dim = 1 + static_cast<Index>(uniform_index(rng, 20));
    const Index out_dim = 1 + static_cast<Index>(uniform_index(rng, 30));
    const Matrix data = random_matrix(rows, in_dim, rng);
    ModelParams params = random_params(in_dim, out_dim, rng);
    Matrix target = Matrix::Zero(rows, out_dim);
    for (Index n = 0; n < rows; ++n) {
      target(n, static_cast<Index>(uniform_index(rng, static_cast<std::uint64_t>(out_dim)))) = 1.0;
    }
    const GradientPair analytic = gradient(data, forward(data, params), target);
    const GradientPair fd = finite_difference_gradient(data, params, target);
    CHECK(gradient_rel_error(analytic, fd) < 1e-5);
  }
}

TEST_CASE("limit_unit_norm clips long columns only") {
  ModelParams params;
  params.weights = Matrix(2, 3);
  params.weights << 2, 0.3, 0, 0, 0.4, 0;
  params.bias = Vector::Constant(3, 7.0);
  const ModelParams limited = limit_unit_norm(params);
  CHECK(limited.weights(0, 0) == doctest::Approx(1.0));
  CHECK(limited.weights(1, 0) == 0.0);
  CHECK(limited.weights(0, 1) == 0.3);  // norm 0.5, untouched
  CHECK(limited.weights(1, 1) == 0.4);
  CHECK(limited.weights.col(2).isZero(0.0));  // zero column untouched
  CHECK(limited.bias(0) == 7.0);              // bias excluded from the limit
}

TEST_CASE("limit_unit_norm is idempotent") {
  auto rng = seeded_stream(5, RngStream::Init);
  ModelParams params = random_params(6, 5, rng);
  params.weights *= 3.0;
  const ModelParams once = limit_unit_norm(params);
  const ModelParams twice = limit_unit_norm(once);
  CHECK(once.weights == twice.weights);
  for (Index j = 0; j < once.weights.cols(); ++j) {
    CHECK(once.weights.col(j).norm() <= 1.0 + 1e-12);
  }
}

TEST_CASE("limit_unit_norm normalize mode rescales every nonzero column") {
  ModelParams params;
  params.weights = Matrix(2, 2);
  params.weights << 0.3, 0, 0.4, 0;
  params.bias = Vector::Zero(2);
  const ModelParams normalized = limit_unit_norm(params, NormMode::Normalize);
  CHECK(normalized.weights.col(0).norm() == doctest::Approx(1.0));
  CHECK(normalized.weights.col(1).isZero(0.0));
}

TEST_CASE("init_params is seeded and bounded") {
  const ModelParams a = init_params(100, 7, 9);
  const ModelParams b = init_params(100, 7, 9);
  const ModelParams c = init_params(100, 7, 10);
  CHECK(a.weights == b.weights);
  CHECK(a.bias.isZero(0.0));
  CHECK(a.weights.array().abs().maxCoeff() <= 0.1);
  CHECK(a.weights != c.weights);
}
