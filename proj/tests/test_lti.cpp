#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <complex>

#include "ssmkit/activation.hpp"
#include "ssmkit/engines.hpp"
#include "ssmkit/errors.hpp"
#include "ssmkit/lti.hpp"
#include "ssmkit/rng.hpp"

using namespace ssm;
using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;
using cd = std::complex<double>;

namespace {

// Random diagonal layer with all eigenvalues strictly inside the unit disk.
SsLayer random_layer(std::uint64_t seed, Eigen::Index n, Eigen::Index n_u,
                     Eigen::Index n_y, ActivationKind act = ActivationKind::Tanh) {
  Rng rng(seed);
  SsLayer layer;
  layer.lti.structure = LtiStructure::Diagonal;
  layer.lti.a = MatrixXcd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double r = rng.uniform(0.2, 0.95);
    const double th = rng.uniform(0.0, 3.1);
    layer.lti.a(i, i) = std::polar(r, th);
  }
  layer.lti.b = MatrixXcd::Zero(n, n_u);
  layer.lti.c = MatrixXcd::Zero(n_y, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n_u; ++j)
      layer.lti.b(i, j) = cd(rng.normal(), rng.normal());
  for (Eigen::Index i = 0; i < n_y; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      layer.lti.c(i, j) = cd(rng.normal(), rng.normal());
  layer.lti.d = MatrixXd::Zero(n_y, n_u);
  for (Eigen::Index i = 0; i < n_y; ++i)
    for (Eigen::Index j = 0; j < n_u; ++j) layer.lti.d(i, j) = rng.normal();
  if (n_u == n_y) {
    layer.skip_identity = true;
    layer.lti.f = MatrixXd::Identity(n_y, n_u);
  } else {
    layer.skip_identity = false;
    layer.lti.f = MatrixXd::Zero(n_y, n_u);
    for (Eigen::Index i = 0; i < n_y; ++i)
      for (Eigen::Index j = 0; j < n_u; ++j) layer.lti.f(i, j) = rng.normal();
  }
  layer.activation = Activation{act};
  return layer;
}

MatrixXd random_input(std::uint64_t seed, Eigen::Index rows, Eigen::Index cols) {
  Rng rng(seed);
  MatrixXd u(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) u(i, j) = rng.normal();
  return u;
}

}  // namespace

TEST_SUITE("lti") {

TEST_CASE("conjugate assembly doubles the state and keeps outputs real") {
  const SsLayer layer = random_layer(11, 4, 2, 3);
  const FullSystem full = assemble_conjugate(layer.lti);
  const Eigen::Index n = layer.lti.n_lambda();
  CHECK(full.a.rows() == 2 * n);
  CHECK(full.a.cols() == 2 * n);
  CHECK(full.b.rows() == 2 * n);
  CHECK(full.c.cols() == 2 * n);
  // Block diagonal: top-left the stored half, bottom-right its conjugate.
  CHECK((full.a.topLeftCorner(n, n) - layer.lti.a).norm() == 0.0);
  CHECK((full.a.bottomRightCorner(n, n) - layer.lti.a.conjugate()).norm() ==
        0.0);
  CHECK(full.a.topRightCorner(n, n).norm() == 0.0);
  CHECK(full.a.bottomLeftCorner(n, n).norm() == 0.0);
  CHECK((full.b.topRows(n) - layer.lti.b).norm() == 0.0);
  CHECK((full.b.bottomRows(n) - layer.lti.b.conjugate()).norm() == 0.0);
}

TEST_CASE("full doubled system reproduces the half-system simulation") {
  const SsLayer layer = random_layer(17, 5, 2, 2);
  const Eigen::Index T = 40;
  const MatrixXd u = random_input(3, T, layer.lti.n_u());
  const SimResult ref = simulate_sequential(layer, u);

  const FullSystem full = assemble_conjugate(layer.lti);
  const Eigen::Index n2 = full.a.rows();
  VectorXcd x = VectorXcd::Zero(n2);
  for (Eigen::Index k = 0; k < T; ++k) {
    const VectorXcd eta_c =
        full.c * x + layer.lti.d.cast<cd>() * u.row(k).transpose().cast<cd>();
    for (Eigen::Index j = 0; j < eta_c.size(); ++j) {
      CHECK(std::abs(eta_c(j).imag()) < 1e-12);
      CHECK(eta_c(j).real() == doctest::Approx(ref.eta(k, j)).epsilon(1e-12));
    }
    x = full.a * x + full.b * u.row(k).transpose().cast<cd>();
  }
}

TEST_CASE("single step matches the closed-form update") {
  const SsLayer layer = random_layer(23, 3, 2, 2);
  Rng rng(5);
  ComplexState st;
  st.x = VectorXcd(3);
  for (int i = 0; i < 3; ++i) st.x(i) = cd(rng.normal(), rng.normal());
  const VectorXcd x0 = st.x;
  VectorXd u(2);
  u << 0.3, -1.1;

  const auto [next, y] = ssl_step(layer, st, u);

  const VectorXd eta = 2.0 * (layer.lti.c * x0).real() + layer.lti.d * u;
  VectorXd expect(eta.size());
  for (Eigen::Index i = 0; i < eta.size(); ++i)
    expect(i) = layer.activation(eta(i));
  expect += layer.lti.f * u;
  CHECK((y - expect).lpNorm<Eigen::Infinity>() < 1e-12);
  const VectorXcd x1 = layer.lti.a * x0 + layer.lti.b * u.cast<cd>();
  CHECK((next.x - x1).lpNorm<Eigen::Infinity>() < 1e-12);
}

TEST_CASE("the output at step zero sees only the feedthrough") {
  // The state starts at zero and is updated after emitting, so row 0 of eta
  // is exactly d * u_0.
  const SsLayer layer = random_layer(31, 4, 2, 3);
  const MatrixXd u = random_input(9, 6, 2);
  const SimResult res = simulate_sequential(layer, u);
  const VectorXd expect = layer.lti.d * u.row(0).transpose();
  CHECK((res.eta.row(0).transpose() - expect).lpNorm<Eigen::Infinity>() <
        1e-14);
}

TEST_CASE("validation rejects malformed systems") {
  SsLayer layer = random_layer(41, 3, 2, 2);
  CHECK_NOTHROW(layer.validate());

  SUBCASE("dimension mismatch") {
    layer.lti.b = MatrixXcd::Zero(2, 2);
    CHECK_THROWS_AS(layer.validate(), ConfigError);
  }
  SUBCASE("off-diagonal entry in a diagonal layer") {
    layer.lti.a(0, 1) = cd(0.1, 0.0);
    CHECK_THROWS_AS(layer.validate(), ConfigError);
  }
  SUBCASE("unstable spectrum") {
    layer.lti.a(0, 0) = cd(1.01, 0.0);
    CHECK_THROWS_AS(layer.validate(), NumericError);
  }
  SUBCASE("non-finite entries") {
    layer.lti.b(0, 0) = cd(std::nan(""), 0.0);
    CHECK_THROWS_AS(layer.validate(), NumericError);
  }
  SUBCASE("identity skip must be the identity") {
    layer.lti.f(0, 1) = 0.5;  // skip_identity is set for this square layer
    CHECK_THROWS_AS(layer.validate(), ConfigError);
  }
}

TEST_CASE("spectral radius reports the largest eigenvalue modulus") {
  SsLayer layer = random_layer(43, 4, 1, 1);
  layer.lti.a(2, 2) = std::polar(0.93, 1.0);
  double expect = 0.0;
  for (Eigen::Index i = 0; i < 4; ++i)
    expect = std::max(expect, std::abs(layer.lti.a(i, i)));
  CHECK(layer.lti.spectral_radius() == doctest::Approx(expect).epsilon(1e-15));
}

TEST_CASE("model validation checks layer chaining") {
  SsModel model;
  model.layers.push_back(random_layer(51, 3, 2, 4));
  model.layers.push_back(random_layer(52, 3, 4, 1));
  CHECK_NOTHROW(model.validate());
  CHECK(model.n_u() == 2);
  CHECK(model.n_y() == 1);

  model.layers[1] = random_layer(53, 3, 5, 1);
  CHECK_THROWS_AS(model.validate(), ConfigError);
}

TEST_CASE("model forward composes layers") {
  SsModel model;
  model.layers.push_back(random_layer(61, 3, 2, 3));
  model.layers.push_back(random_layer(62, 2, 3, 1));
  const MatrixXd u = random_input(77, 25, 2);
  const MatrixXd y = ssm_forward(model, u, Engine::Sequential);
  CHECK(y.rows() == 25);
  CHECK(y.cols() == 1);

  MatrixXd manual = simulate_sequential(model.layers[0], u).y;
  manual = simulate_sequential(model.layers[1], manual).y;
  CHECK((y - manual).lpNorm<Eigen::Infinity>() < 1e-12);

  const MatrixXd bad = random_input(78, 25, 3);
  CHECK_THROWS_AS(ssm_forward(model, bad, Engine::Sequential), DataError);
}

}  // TEST_SUITE
