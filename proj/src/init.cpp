#include "ssmkit/init.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "ssmkit/errors.hpp"

namespace ssm {

namespace {
using cd = std::complex<double>;
constexpr double kPi = 3.14159265358979323846;
}  // namespace

void RingSpec::validate_discrete() const {
  if (!(r_min > 0.0 && r_min < r_max && r_max < 1.0))
    throw ConfigError("discrete ring radii must satisfy 0 < r_min < r_max < 1");
  if (!(theta_min >= 0.0 && theta_min < theta_max &&
        theta_max <= 2.0 * kPi + 1e-12))
    throw ConfigError("discrete ring phases must satisfy 0 <= min < max <= 2*pi");
}

void RingSpec::validate_continuous(double tau) const {
  if (!(tau > 0.0)) throw ConfigError("ring: tau must be positive");
  if (!(r_min > 0.0 && r_min < r_max))
    throw ConfigError("continuous ring radii must satisfy 0 < r_min < r_max");
  if (r_max > kPi / tau + 1e-9)
    throw ConfigError("continuous ring radius exceeds the sampling band pi/tau");
  if (!(theta_min > kPi / 2.0 && theta_min < theta_max && theta_max < kPi))
    throw ConfigError(
        "continuous ring phases must lie strictly inside (pi/2, pi)");
}

LruRingInit init_lru_ring(Eigen::Index n_lambda, const RingSpec& spec) {
  spec.validate_discrete();
  if (n_lambda <= 0) throw ConfigError("ring: state dimension must be positive");
  Rng rng = Rng::stream(spec.seed, 0);
  LruRingInit out;
  out.mu.resize(n_lambda);
  out.theta.resize(n_lambda);
  const double lo2 = spec.r_min * spec.r_min;
  const double hi2 = spec.r_max * spec.r_max;
  for (Eigen::Index j = 0; j < n_lambda; ++j) {
    // |lambda|^2 uniform on [r_min^2, r_max^2] (area-uniform over the ring)
    const double m2 = lo2 + rng.uniform() * (hi2 - lo2);
    out.mu[j] = std::log(-0.5 * std::log(m2));
    const double phase = std::max(
        spec.theta_min + rng.uniform() * (spec.theta_max - spec.theta_min),
        1e-12);
    out.theta[j] = std::log(phase);
  }
  return out;
}

CtRingInit init_ct_ring(Eigen::Index n_lambda, const RingSpec& spec,
                        double tau) {
  spec.validate_continuous(tau);
  if (n_lambda <= 0) throw ConfigError("ring: state dimension must be positive");
  Rng rng = Rng::stream(spec.seed, 0);
  CtRingInit out;
  out.alpha_re.resize(n_lambda);
  out.alpha_im.resize(n_lambda);
  const double lo2 = spec.r_min * spec.r_min;
  const double hi2 = spec.r_max * spec.r_max;
  for (Eigen::Index j = 0; j < n_lambda; ++j) {
    const double r = std::sqrt(lo2 + rng.uniform() * (hi2 - lo2));
    const double phase =
        spec.theta_min + rng.uniform() * (spec.theta_max - spec.theta_min);
    const double re = r * std::cos(phase);  // negative in the valid sector
    const double im = r * std::sin(phase);  // positive in the valid sector
    out.alpha_re[j] = std::log(-re);
    out.alpha_im[j] = std::log(im);
  }
  return out;
}

HippoLegs hippo_legs(Eigen::Index n_lambda) {
  if (n_lambda <= 0) throw ConfigError("hippo: dimension must be positive");
  HippoLegs out;
  out.a_normal.resize(n_lambda, n_lambda);
  out.p.resize(n_lambda);
  for (Eigen::Index a = 1; a <= n_lambda; ++a) {
    out.p[a - 1] = std::sqrt(a - 0.5);
    for (Eigen::Index b = 1; b <= n_lambda; ++b) {
      if (a == b)
        out.a_normal(a - 1, b - 1) = -0.5;
      else {
        const double mag = std::sqrt((a - 0.5) * (b - 0.5));
        out.a_normal(a - 1, b - 1) = a < b ? mag : -mag;
      }
    }
  }
  return out;
}

HippoFactors hippo_dplr_init(Eigen::Index n_lambda, Eigen::Index n_u) {
  if (n_u <= 0) throw ConfigError("hippo: input width must be positive");
  const HippoLegs legs = hippo_legs(n_lambda);
  // a_normal = S - I/2 with S skew-symmetric, so i*S is Hermitian and a
  // self-adjoint solve yields an orthonormal eigenbasis with real spectrum.
  const MatrixXd skew = legs.a_normal + 0.5 * MatrixXd::Identity(n_lambda, n_lambda);
  const MatrixXcd herm = cd(0.0, 1.0) * skew.cast<cd>();
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(herm);
  if (es.info() != Eigen::Success)
    throw NumericError("hippo eigendecomposition failed");
  const VectorXd nu = es.eigenvalues();  // ascending
  const MatrixXcd& vraw = es.eigenvectors();

  // lambda = -1/2 - i*nu, reordered to ascending imaginary part.
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n_lambda));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](Eigen::Index i, Eigen::Index j) {
    return -nu[i] < -nu[j];
  });

  HippoFactors out;
  out.lambda_c.resize(n_lambda);
  out.v.resize(n_lambda, n_lambda);
  for (Eigen::Index j = 0; j < n_lambda; ++j) {
    out.lambda_c[j] = cd(-0.5, -nu[order[static_cast<std::size_t>(j)]]);
    out.v.col(j) = vraw.col(order[static_cast<std::size_t>(j)]);
  }
  out.p_proj = out.v.adjoint() * legs.p.cast<cd>();
  out.q_proj = out.p_proj;
  out.b_c_raw.resize(n_lambda, n_u);
  for (Eigen::Index a = 1; a <= n_lambda; ++a)
    out.b_c_raw.row(a - 1).setConstant(cd(std::sqrt(2.0 * a - 1.0), 0.0));
  out.b_c = out.v.adjoint() * out.b_c_raw;
  return out;
}

HippoDiag hippo_diag_init(Eigen::Index n_lambda, Eigen::Index n_u) {
  const HippoFactors f = hippo_dplr_init(n_lambda, n_u);
  return HippoDiag{f.lambda_c, f.b_c};
}

MatrixXd xavier_init(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  const double std = 1.0 / std::sqrt(static_cast<double>(cols));
  MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = rng.normal(0.0, std);
  return m;
}

MatrixXcd xavier_init_complex(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  const double std = 1.0 / std::sqrt(2.0 * static_cast<double>(cols));
  MatrixXcd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j)
      m(i, j) = cd(rng.normal(0.0, std), rng.normal(0.0, std));
  return m;
}

NyquistReport nyquist_guard(const VectorXcd& lambda_c, const VectorXd& gamma,
                            double tau, NyquistMode mode) {
  if (gamma.size() != lambda_c.size())
    throw ConfigError("nyquist guard: timescale size must match the spectrum");
  if (!(tau > 0.0)) throw ConfigError("nyquist guard: tau must be positive");
  const double limit = 0.95 * kPi / tau;
  NyquistReport rep;
  rep.gamma = gamma;
  double worst = 0.0;
  for (Eigen::Index j = 0; j < lambda_c.size(); ++j) {
    const double v = std::abs(gamma[j] * lambda_c[j].imag());
    worst = std::max(worst, v);
    if (v > limit && mode == NyquistMode::Warn) {
      std::ostringstream os;
      os << "eigenvalue " << j << ": |Im| = " << v
         << " rad/s exceeds the guard band " << limit << " (0.95*pi/tau)";
      rep.warnings.push_back(os.str());
    }
  }
  if (mode == NyquistMode::RescaleGamma && worst > limit) {
    const double scale = limit / worst;
    rep.gamma *= scale;
    std::ostringstream os;
    os << "timescales rescaled by " << scale
       << " to keep every |Im(gamma*lambda)| within 0.95*pi/tau";
    rep.warnings.push_back(os.str());
  }
  return rep;
}

}  // namespace ssm
