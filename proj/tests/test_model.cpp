#include <doctest.h>

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "ssmkit/errors.hpp"
#include "ssmkit/model.hpp"
#include "ssmkit/rng.hpp"

using namespace ssm;
using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXd;
using cd = std::complex<double>;

namespace {

LruParams make_lru(std::uint64_t seed, Eigen::Index n, Eigen::Index n_u,
                   Eigen::Index n_y, bool skip) {
  Rng rng(seed);
  LruParams p;
  p.mu = VectorXd(n);
  p.theta = VectorXd(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    p.mu(i) = rng.uniform(-2.0, 0.5);
    p.theta(i) = rng.uniform(-2.0, 1.0);
  }
  p.b_check = MatrixXcd::Zero(n, n_u);
  p.c_tilde = MatrixXcd::Zero(n_y, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n_u; ++j)
      p.b_check(i, j) = cd(rng.normal(), rng.normal());
  for (Eigen::Index i = 0; i < n_y; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      p.c_tilde(i, j) = cd(rng.normal(), rng.normal());
  p.d = MatrixXd::Zero(n_y, n_u);
  p.f = MatrixXd::Zero(n_y, n_u);
  for (Eigen::Index i = 0; i < n_y; ++i)
    for (Eigen::Index j = 0; j < n_u; ++j) {
      p.d(i, j) = rng.normal();
      p.f(i, j) = rng.normal();
    }
  p.skip_identity = skip;
  return p;
}

CtDiagParams make_ct(std::uint64_t seed, Eigen::Index n, Eigen::Index n_u,
                     Eigen::Index n_y) {
  Rng rng(seed);
  CtDiagParams p;
  p.alpha_re = VectorXd(n);
  p.alpha_im = VectorXd(n);
  p.log_gamma = VectorXd(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    p.alpha_re(i) = rng.uniform(-0.5, 0.5);
    p.alpha_im(i) = rng.uniform(-0.5, 1.0);
    p.log_gamma(i) = rng.uniform(-0.3, 0.3);
  }
  p.b_c = MatrixXcd::Zero(n, n_u);
  p.c_c = MatrixXcd::Zero(n_y, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n_u; ++j)
      p.b_c(i, j) = cd(rng.normal(), rng.normal());
  for (Eigen::Index i = 0; i < n_y; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      p.c_c(i, j) = cd(rng.normal(), rng.normal());
  p.f = MatrixXd::Zero(n_y, n_u);
  p.skip_identity = false;
  p.tau = 0.15;
  return p;
}

DplrParams make_dplr(std::uint64_t seed, Eigen::Index n, Eigen::Index n_r,
                     bool tied) {
  Rng rng(seed);
  DplrParams p;
  p.alpha_re = VectorXd(n);
  p.alpha_im = VectorXd(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    p.alpha_re(i) = rng.uniform(0.1, 0.8);
    p.alpha_im(i) = rng.uniform(-3.0, 3.0);
  }
  p.p = MatrixXcd::Zero(n, n_r);
  p.q = MatrixXcd::Zero(n, n_r);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n_r; ++j) {
      p.p(i, j) = 0.3 * cd(rng.normal(), rng.normal());
      p.q(i, j) = 0.3 * cd(rng.normal(), rng.normal());
    }
  p.q_equals_p = tied;
  p.b_c = MatrixXcd::Zero(n, 1);
  p.c_c = MatrixXcd::Zero(1, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    p.b_c(i, 0) = cd(rng.normal(), rng.normal());
    p.c_c(0, i) = cd(rng.normal(), rng.normal());
  }
  p.f = MatrixXd::Zero(1, 1);
  p.skip_identity = true;
  p.log_gamma = 0.0;
  p.tau = 0.1;
  return p;
}

}  // namespace

TEST_SUITE("model") {

TEST_CASE("flat layout lists blocks in declaration order") {
  ParamModel m;
  m.layers.push_back(SslParams{make_lru(1, 3, 1, 4, false)});
  m.layers.push_back(SslParams{make_lru(2, 2, 4, 4, true)});
  m.method = DiscretizationMethod::Zoh;

  const FlatLayout layout = flat_layout(m);
  std::vector<std::string> names;
  for (const ParamBlock& b : layout.blocks) names.push_back(b.name);

  const std::vector<std::string> expect = {
      "layer0.mu",      "layer0.theta", "layer0.b_check", "layer0.c_tilde",
      "layer0.d",       "layer0.f",     "layer1.mu",      "layer1.theta",
      "layer1.b_check", "layer1.c_tilde", "layer1.d",
  };
  CHECK(names == expect);  // no layer1.f: the identity skip is not trainable

  // Sizes: complex blocks store interleaved (re, im) pairs.
  CHECK(layout.blocks[0].size == 3);       // mu
  CHECK(layout.blocks[2].size == 2 * 3);   // b_check, 3x1 complex
  CHECK(layout.blocks[3].size == 2 * 12);  // c_tilde, 4x3 complex
  CHECK(layout.blocks[4].size == 4);       // d, 4x1 real

  Eigen::Index running = 0;
  for (const ParamBlock& b : layout.blocks) {
    CHECK(b.offset == running);
    running += b.size;
  }
  CHECK(layout.total == running);
}

TEST_CASE("low-rank layout exposes q only when untied") {
  ParamModel tied;
  tied.layers.push_back(SslParams{make_dplr(5, 3, 2, true)});
  tied.method = DiscretizationMethod::Bilinear;
  ParamModel untied = tied;
  untied.layers[0] = SslParams{make_dplr(5, 3, 2, false)};

  const FlatLayout lt = flat_layout(tied);
  const FlatLayout lu = flat_layout(untied);
  bool tied_has_q = false, untied_has_q = false;
  for (const ParamBlock& b : lt.blocks) tied_has_q |= (b.name == "layer0.q");
  for (const ParamBlock& b : lu.blocks) untied_has_q |= (b.name == "layer0.q");
  CHECK(!tied_has_q);
  CHECK(untied_has_q);
  CHECK(lu.total == lt.total + 2 * 3 * 2);  // q is 3x2 complex

  // log_gamma is a scalar block for this parametrization.
  bool found = false;
  for (const ParamBlock& b : lt.blocks)
    if (b.name == "layer0.log_gamma") {
      found = true;
      CHECK(b.size == 1);
    }
  CHECK(found);
}

TEST_CASE("pack and unpack round-trip bit-exactly") {
  ParamModel m;
  m.layers.push_back(SslParams{make_lru(7, 4, 2, 3, false)});
  m.layers.push_back(SslParams{make_ct(8, 3, 3, 3)});
  m.layers.push_back(SslParams{make_dplr(9, 2, 1, false)});
  m.method = DiscretizationMethod::Bilinear;

  const VectorXd theta = pack(m);
  const FlatLayout layout = flat_layout(m);
  CHECK(theta.size() == layout.total);

  const ParamModel back = unpack(m, theta);
  const VectorXd theta2 = pack(back);
  REQUIRE(theta2.size() == theta.size());
  CHECK((theta - theta2).lpNorm<Eigen::Infinity>() == 0.0);

  // A perturbed vector lands in the right block.
  VectorXd bumped = theta;
  const ParamBlock& blk = layout.block_of(5);
  bumped(5) += 1.0;
  const ParamModel changed = unpack(m, bumped);
  const VectorXd theta3 = pack(changed);
  CHECK(theta3(5) == theta(5) + 1.0);
  CHECK(blk.offset <= 5);
  CHECK(5 < blk.offset + blk.size);
}

TEST_CASE("unpack validates the vector length") {
  ParamModel m;
  m.layers.push_back(SslParams{make_lru(11, 2, 1, 1, false)});
  const VectorXd theta = pack(m);

  CHECK_THROWS_AS(unpack(m, theta.head(theta.size() - 1)), ConfigError);
  VectorXd longer(theta.size() + 3);
  longer.setZero();
  longer.head(theta.size()) = theta;
  CHECK_THROWS_AS(unpack(m, longer), ConfigError);
}

TEST_CASE("block lookup rejects out-of-range indices") {
  ParamModel m;
  m.layers.push_back(SslParams{make_lru(13, 2, 1, 1, false)});
  const FlatLayout layout = flat_layout(m);
  CHECK_NOTHROW(layout.block_of(0));
  CHECK_NOTHROW(layout.block_of(layout.total - 1));
  CHECK_THROWS_AS(layout.block_of(layout.total), ConfigError);
  CHECK_THROWS_AS(layout.block_of(-1), ConfigError);
}

TEST_CASE("realization produces the advertised structures") {
  ParamModel m;
  m.layers.push_back(SslParams{make_lru(17, 3, 2, 3, false)});
  m.layers.push_back(SslParams{make_ct(18, 4, 3, 3)});
  m.layers.push_back(SslParams{make_dplr(19, 2, 1, true)});
  // Widths: dplr helper is 1-in/1-out; rebuild its matrices for 3-in/3-out.
  DplrParams& d = std::get<DplrParams>(m.layers[2]);
  d.b_c = MatrixXcd::Ones(2, 3);
  d.c_c = MatrixXcd::Ones(3, 2);
  d.f = MatrixXd::Zero(3, 3);
  d.skip_identity = true;
  m.method = DiscretizationMethod::Bilinear;

  CHECK_NOTHROW(m.validate());
  CHECK(m.n_u() == 2);
  CHECK(m.n_y() == 3);

  const SsModel real = realize_model(m);
  REQUIRE(real.layers.size() == 3);
  CHECK(real.layers[0].lti.structure == LtiStructure::Diagonal);
  CHECK(real.layers[1].lti.structure == LtiStructure::Diagonal);
  CHECK(real.layers[2].lti.structure == LtiStructure::Dense);
  CHECK(real.layers[2].transfer.has_value());
  CHECK(real.layers[1].lti.d.norm() == 0.0);
  CHECK(real.layers[2].skip_identity);
  CHECK(real.layers[2].lti.f.isIdentity(0.0));
  CHECK_NOTHROW(real.validate());
}

TEST_CASE("model validation reports broken chaining") {
  ParamModel m;
  m.layers.push_back(SslParams{make_lru(23, 3, 2, 3, false)});
  m.layers.push_back(SslParams{make_lru(24, 2, 4, 1, false)});  // expects 4
  try {
    m.validate();
    FAIL("expected a configuration error");
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("layer 1") != std::string::npos);
  }
}

}  // TEST_SUITE
