#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <complex>

#include "ssmkit/errors.hpp"
#include "ssmkit/init.hpp"
#include "ssmkit/rng.hpp"

using namespace ssm;
using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;
using cd = std::complex<double>;

namespace {
constexpr double kPi = 3.14159265358979323846;
}

TEST_SUITE("init") {

TEST_CASE("ring spec validation") {
  RingSpec s;
  s.r_min = 0.05;
  s.r_max = 0.975;
  s.theta_min = 0.0;
  s.theta_max = 2.0 * kPi;
  CHECK_NOTHROW(s.validate_discrete());

  SUBCASE("discrete radii ordering") {
    s.r_min = 0.98;
    CHECK_THROWS_AS(s.validate_discrete(), ConfigError);
  }
  SUBCASE("discrete radius above one") {
    s.r_max = 1.0;
    CHECK_THROWS_AS(s.validate_discrete(), ConfigError);
  }
  SUBCASE("discrete phase range") {
    s.theta_max = 7.0;
    CHECK_THROWS_AS(s.validate_discrete(), ConfigError);
  }
  SUBCASE("continuous sector") {
    RingSpec c;
    c.r_min = 10.0;
    c.r_max = 100.0;
    c.theta_min = 0.55 * kPi;
    c.theta_max = 0.75 * kPi;
    CHECK_NOTHROW(c.validate_continuous(0.01));
    CHECK_THROWS_AS(c.validate_continuous(0.0), ConfigError);
    // pi/tau = 314.159...; a radius beyond it is out of the sampling band.
    c.r_max = 320.0;
    CHECK_THROWS_AS(c.validate_continuous(0.01), ConfigError);
    c.r_max = 100.0;
    c.theta_min = 0.4 * kPi;  // not past pi/2
    CHECK_THROWS_AS(c.validate_continuous(0.01), ConfigError);
  }
}

TEST_CASE("discrete ring draws stay inside the requested crown") {
  RingSpec s;
  s.r_min = 0.4;
  s.r_max = 0.9;
  s.theta_min = 0.3;
  s.theta_max = 2.0;
  s.seed = 11;
  const Eigen::Index n = 200;
  const LruRingInit init = init_lru_ring(n, s);
  REQUIRE(init.mu.size() == n);

  double sum_m2 = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    const double modulus = std::exp(-std::exp(init.mu[j]));
    const double phase = std::exp(init.theta[j]);
    CHECK(modulus >= s.r_min - 1e-12);
    CHECK(modulus <= s.r_max + 1e-12);
    CHECK(phase >= s.theta_min - 1e-12);
    CHECK(phase <= s.theta_max + 1e-12);
    sum_m2 += modulus * modulus;
  }
  // |lambda|^2 is uniform on [r_min^2, r_max^2]; check the sample mean.
  const double expect = 0.5 * (s.r_min * s.r_min + s.r_max * s.r_max);
  CHECK(std::abs(sum_m2 / static_cast<double>(n) - expect) < 0.03);

  const LruRingInit again = init_lru_ring(n, s);
  CHECK((init.mu - again.mu).lpNorm<Eigen::Infinity>() == 0.0);
  CHECK((init.theta - again.theta).lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("continuous ring draws stay inside the left half-plane sector") {
  RingSpec s;
  s.r_min = 20.0;
  s.r_max = 200.0;
  s.theta_min = 0.55 * kPi;
  s.theta_max = 0.75 * kPi;
  s.seed = 3;
  const double tau = 0.01;
  const Eigen::Index n = 150;
  const CtRingInit init = init_ct_ring(n, s, tau);
  for (Eigen::Index j = 0; j < n; ++j) {
    const cd lam(-std::exp(init.alpha_re[j]), std::exp(init.alpha_im[j]));
    CHECK(lam.real() < 0.0);
    CHECK(lam.imag() > 0.0);
    const double r = std::abs(lam);
    const double th = std::arg(lam);
    CHECK(r >= s.r_min - 1e-9);
    CHECK(r <= s.r_max + 1e-9);
    CHECK(th >= s.theta_min - 1e-12);
    CHECK(th <= s.theta_max + 1e-12);
  }
  const CtRingInit again = init_ct_ring(n, s, tau);
  CHECK((init.alpha_re - again.alpha_re).lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("scaled-legendre matrix entries") {
  const HippoLegs legs = hippo_legs(4);
  REQUIRE(legs.a_normal.rows() == 4);
  // Above/below the diagonal: +-sqrt((a-1/2)(b-1/2)); on it: -1/2.
  CHECK(legs.a_normal(2, 1) ==
        doctest::Approx(-1.9364916731037085).epsilon(1e-15));
  CHECK(legs.a_normal(1, 2) ==
        doctest::Approx(1.9364916731037085).epsilon(1e-15));
  for (int i = 0; i < 4; ++i) CHECK(legs.a_normal(i, i) == -0.5);
  for (int a = 1; a <= 4; ++a)
    CHECK(legs.p(a - 1) == doctest::Approx(std::sqrt(a - 0.5)).epsilon(1e-15));

  // a_normal + I/2 is antisymmetric.
  const MatrixXd skew = legs.a_normal + 0.5 * MatrixXd::Identity(4, 4);
  CHECK((skew + skew.transpose()).lpNorm<Eigen::Infinity>() < 1e-14);
}

TEST_CASE("legendre eigenvalues for the two-state system") {
  const HippoFactors f = hippo_dplr_init(2, 1);
  REQUIRE(f.lambda_c.size() == 2);
  // -1/2 +- i sqrt(3)/2, ordered by ascending imaginary part.
  CHECK(f.lambda_c(0).real() == -0.5);
  CHECK(f.lambda_c(1).real() == -0.5);
  CHECK(f.lambda_c(0).imag() ==
        doctest::Approx(-0.8660254037844386).epsilon(1e-12));
  CHECK(f.lambda_c(1).imag() ==
        doctest::Approx(0.8660254037844386).epsilon(1e-12));
}

TEST_CASE("legendre factorization structure") {
  const Eigen::Index n = 12;
  const HippoFactors f = hippo_dplr_init(n, 1);
  const HippoLegs legs = hippo_legs(n);

  // Unitary eigenbasis.
  const MatrixXcd vhv = f.v.adjoint() * f.v;
  CHECK((vhv - MatrixXcd::Identity(n, n)).cwiseAbs().maxCoeff() < 1e-12);

  // V diag(lambda) V* reconstructs the normal part.
  MatrixXcd recon =
      f.v * f.lambda_c.asDiagonal() * f.v.adjoint();
  CHECK((recon - legs.a_normal.cast<cd>()).cwiseAbs().maxCoeff() < 1e-10);

  // Projections are consistent and the rank-1 factor is tied.
  CHECK((f.p_proj - f.v.adjoint() * legs.p.cast<cd>())
            .lpNorm<Eigen::Infinity>() < 1e-12);
  CHECK((f.q_proj - f.p_proj).lpNorm<Eigen::Infinity>() == 0.0);
  for (Eigen::Index a = 1; a <= n; ++a)
    CHECK(f.b_c_raw(a - 1, 0).real() ==
          doctest::Approx(std::sqrt(2.0 * a - 1.0)).epsilon(1e-15));
  CHECK((f.b_c - f.v.adjoint() * f.b_c_raw).cwiseAbs().maxCoeff() < 1e-12);

  // All real parts sit on -1/2 and imaginary parts ascend.
  for (Eigen::Index j = 0; j < n; ++j) {
    CHECK(f.lambda_c(j).real() == -0.5);
    if (j > 0) CHECK(f.lambda_c(j).imag() > f.lambda_c(j - 1).imag());
  }

  const HippoDiag diag = hippo_diag_init(n, 1);
  CHECK((diag.lambda_c - f.lambda_c).lpNorm<Eigen::Infinity>() == 0.0);
  CHECK((diag.b_c - f.b_c).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("legendre spectrum growth at twenty states") {
  const HippoFactors f = hippo_dplr_init(20, 1);
  double max_im = 0.0;
  for (Eigen::Index j = 0; j < 20; ++j)
    max_im = std::max(max_im, std::abs(f.lambda_c(j).imag()));
  CHECK(max_im == doctest::Approx(126.80186341127094).epsilon(1e-9));
}

TEST_CASE("xavier scaling") {
  Rng rng(5);
  const Eigen::Index rows = 200, cols = 40;
  const MatrixXd m = xavier_init(rows, cols, rng);
  const double var = m.array().square().mean();
  CHECK(std::abs(var - 1.0 / static_cast<double>(cols)) <
        0.15 / static_cast<double>(cols));

  const MatrixXcd mc = xavier_init_complex(rows, cols, rng);
  const double pow = mc.array().abs2().mean();
  CHECK(std::abs(pow - 1.0 / static_cast<double>(cols)) <
        0.15 / static_cast<double>(cols));
}

TEST_CASE("nyquist guard warns per offending eigenvalue") {
  const double tau = 0.0016384041943147375;
  const double limit = 0.95 * kPi / tau;
  VectorXcd lam(2);
  lam << cd(-0.5, 50.0), cd(-0.5, 126.80186341127094);  // 25*50 stays inside
  VectorXd gamma = VectorXd::Constant(2, 1.0);

  SUBCASE("inside the band") {
    const NyquistReport rep = nyquist_guard(lam, gamma, tau, NyquistMode::Warn);
    CHECK(rep.warnings.empty());
    CHECK((rep.gamma - gamma).lpNorm<Eigen::Infinity>() == 0.0);
  }
  SUBCASE("a large timescale pushes past the band") {
    gamma *= 25.0;  // 25 * 126.8 = 3170 rad/s > 1821.6 rad/s
    const NyquistReport rep = nyquist_guard(lam, gamma, tau, NyquistMode::Warn);
    REQUIRE(rep.warnings.size() == 1);
    CHECK(rep.warnings[0].find("eigenvalue 1") != std::string::npos);
    CHECK(rep.warnings[0].find("exceeds the guard band") != std::string::npos);
    CHECK((rep.gamma - gamma).lpNorm<Eigen::Infinity>() == 0.0);
  }
  SUBCASE("rescale mode shrinks gamma uniformly") {
    gamma *= 25.0;
    const NyquistReport rep =
        nyquist_guard(lam, gamma, tau, NyquistMode::RescaleGamma);
    REQUIRE(rep.warnings.size() == 1);
    const double worst = 25.0 * 126.80186341127094;
    const double scale = limit / worst;
    CHECK(rep.gamma(0) == doctest::Approx(25.0 * scale).epsilon(1e-12));
    CHECK(rep.gamma(1) == doctest::Approx(25.0 * scale).epsilon(1e-12));
    // After rescaling, the worst offender sits exactly on the guard band.
    CHECK(std::abs(rep.gamma(1) * lam(1).imag()) ==
          doctest::Approx(limit).epsilon(1e-12));
  }
}

TEST_CASE("nyquist guard validates dimensions") {
  VectorXcd lam(2);
  lam << cd(-0.5, 1.0), cd(-0.5, 2.0);
  CHECK_THROWS_AS(
      nyquist_guard(lam, VectorXd::Ones(3), 0.1, NyquistMode::Warn),
      ConfigError);
  CHECK_THROWS_AS(
      nyquist_guard(lam, VectorXd::Ones(2), 0.0, NyquistMode::Warn),
      ConfigError);
}

TEST_CASE("degenerate dimensions are rejected") {
  RingSpec s;
  s.r_min = 0.1;
  s.r_max = 0.9;
  s.theta_min = 0.0;
  s.theta_max = kPi;
  CHECK_THROWS_AS(init_lru_ring(0, s), ConfigError);
  CHECK_THROWS_AS(hippo_legs(0), ConfigError);
  CHECK_THROWS_AS(hippo_dplr_init(4, 0), ConfigError);
}

}  // TEST_SUITE
