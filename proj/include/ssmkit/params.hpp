#pragma once

#include <optional>
#include <variant>
#include <vector>

#include "ssmkit/lti.hpp"

namespace ssm {

enum class DiscretizationMethod { Zoh, Bilinear, ForwardEuler };

/// Discrete-time diagonal parametrization: lambda_j = exp(-exp(mu_j) + i exp(theta_j)),
/// B = diag(gamma) * b_check with gamma_j = sqrt(1 - |lambda_j|^2).
/// Schur-stable for any finite (mu, theta).
struct LruParams {
  VectorXd mu;       // log of log-modulus
  VectorXd theta;    // log of phase
  MatrixXcd b_check;
  MatrixXcd c_tilde;
  MatrixXd d;
  MatrixXd f;              // ignored when skip_identity
  bool skip_identity = false;

  Eigen::Index n_lambda() const { return mu.size(); }
  Eigen::Index n_u() const { return b_check.cols(); }
  Eigen::Index n_y() const { return c_tilde.rows(); }
};

/// Continuous-time diagonal parametrization with per-state timescale Gamma
/// stored in log-space: lambda_j = -exp(alpha_re_j) + i exp(alpha_im_j),
/// structurally Hurwitz. No D term.
struct CtDiagParams {
  VectorXd alpha_re;
  VectorXd alpha_im;
  MatrixXcd b_c;
  MatrixXcd c_c;
  MatrixXd f;
  bool skip_identity = false;
  VectorXd log_gamma;  // diagonal timescale, exponentiated on realization
  double tau = 1.0;    // sampling time, not learnable

  Eigen::Index n_lambda() const { return alpha_re.size(); }
  Eigen::Index n_u() const { return b_c.cols(); }
  Eigen::Index n_y() const { return c_c.rows(); }
};

/// Continuous-time DPLR parametrization: A_c = Lambda_c - P Q* with
/// lambda_j = -phi(alpha_re_j) + i alpha_im_j, phi(a) = max(0, a) + epsilon.
/// With q_equals_p the Hermitian part of A_c is negative definite.
struct DplrParams {
  VectorXd alpha_re;
  VectorXd alpha_im;
  MatrixXcd p;             // n_lambda x n_r
  MatrixXcd q;             // ignored when q_equals_p
  bool q_equals_p = true;
  MatrixXcd b_c;
  MatrixXcd c_c;
  MatrixXd f;
  bool skip_identity = false;
  double log_gamma = 0.0;  // scalar timescale, log-space
  double tau = 1.0;
  double epsilon = 1e-3;

  Eigen::Index n_lambda() const { return alpha_re.size(); }
  Eigen::Index n_r() const { return p.cols(); }
  Eigen::Index n_u() const { return b_c.cols(); }
  Eigen::Index n_y() const { return c_c.rows(); }
};

using SslParams = std::variant<LruParams, CtDiagParams, DplrParams>;

/// Scalar discretization of a diagonal system. With lambda' = gamma*lambda_c
/// and B'_row = gamma*B_row:
///   Zoh:      lambda_d = exp(tau lambda'),        b_d = ((lambda_d-1)/lambda') B'
///   Bilinear: lambda_d = (1+tau l'/2)/(1-tau l'/2), b_d = tau/(1-tau l'/2) B'
///   Euler:    lambda_d = 1 + tau lambda',          b_d = tau B'
/// Zoh/Bilinear map Hurwitz to Schur; ForwardEuler does not and is gated
/// behind allow_unstable.
struct DiagDiscretization {
  VectorXcd lambda_d;
  MatrixXcd b_d;
};
DiagDiscretization discretize(const VectorXcd& lambda_c, const MatrixXcd& b_c,
                              const VectorXd& gamma, double tau,
                              DiscretizationMethod method,
                              bool allow_unstable = false);

DiscreteLti lru_realize(const LruParams& p);
DiscreteLti ct_diag_realize(const CtDiagParams& p, DiscretizationMethod method,
                            bool allow_unstable = false);

struct DplrRealization {
  DiscreteLti dense;
  std::optional<TransferHandle> transfer;  // present when method == Bilinear
};
DplrRealization dplr_realize(const DplrParams& p, DiscretizationMethod method,
                             bool allow_unstable = false);

/// Per-eigenvalue summary for the inspect surface. beyond_nyquist is the
/// continuous-domain aliasing flag |Im(gamma*lambda_c)| > pi/tau; always false
/// for the discrete LRU parametrization.
struct SpectrumEntry {
  std::optional<std::complex<double>> lambda_c;
  std::complex<double> lambda_d;
  double modulus = 0.0;
  double arg = 0.0;
  bool beyond_nyquist = false;
};
std::vector<SpectrumEntry> spectrum_report(const SslParams& params,
                                           DiscretizationMethod method);

const char* parametrization_name(const SslParams& params);

}  // namespace ssm
