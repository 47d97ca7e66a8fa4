#pragma once

#include <string>
#include <vector>

#include "ssmkit/lti.hpp"
#include "ssmkit/rng.hpp"

namespace ssm {

/// Crown sector for eigenvalue sampling. Discrete rings live inside the unit
/// circle with phases in [0, 2pi]; continuous rings live in the left
/// half-plane with moduli below pi/tau and phases in (pi/2, pi].
struct RingSpec {
  double r_min = 0.0;
  double r_max = 0.0;
  double theta_min = 0.0;
  double theta_max = 0.0;
  std::uint64_t seed = 0;

  void validate_discrete() const;
  void validate_continuous(double tau) const;
};

struct HippoFactors {
  VectorXcd lambda_c;  // eigenvalues of the normal part, Re = -1/2
  VectorXcd p_proj;    // V* p
  VectorXcd q_proj;    // equals p_proj (Q* = p'V = (V*p)*)
  MatrixXcd b_c;       // projected input matrix V* b
  MatrixXcd b_c_raw;   // unprojected sqrt(2a-1) columns
  MatrixXcd v;         // unitary eigenbasis, kept for tests
};

struct LruRingInit {
  VectorXd mu;
  VectorXd theta;
};
/// Samples moduli via mu ~ U[log(-log r_max), log(-log r_min)] and phases
/// uniformly in the sector (theta stored as log of the realized phase).
LruRingInit init_lru_ring(Eigen::Index n_lambda, const RingSpec& spec);

struct CtRingInit {
  VectorXd alpha_re;
  VectorXd alpha_im;
};
/// Samples lambda = r exp(i theta) in the continuous sector and stores
/// alpha_re = log(-Re lambda), alpha_im = log(Im lambda).
CtRingInit init_ct_ring(Eigen::Index n_lambda, const RingSpec& spec, double tau);

/// Normal part of the scaled-Legendre matrix and its rank-1 component:
/// a_normal + I/2 is exactly antisymmetric, p[a] = sqrt(a - 1/2).
struct HippoLegs {
  MatrixXd a_normal;
  VectorXd p;
};
HippoLegs hippo_legs(Eigen::Index n_lambda);

/// Eigendecomposes the normal part (unitary V by construction), projects the
/// rank-1 and input terms, and orders eigenvalues by ascending imaginary part.
HippoFactors hippo_dplr_init(Eigen::Index n_lambda, Eigen::Index n_u);

struct HippoDiag {
  VectorXcd lambda_c;
  MatrixXcd b_c;
};
/// Same decomposition with the low-rank factors discarded.
HippoDiag hippo_diag_init(Eigen::Index n_lambda, Eigen::Index n_u);

/// Entries ~ N(0, 1/cols); complex entries split the variance over the real
/// and imaginary parts.
MatrixXd xavier_init(Eigen::Index rows, Eigen::Index cols, Rng& rng);
MatrixXcd xavier_init_complex(Eigen::Index rows, Eigen::Index cols, Rng& rng);

enum class NyquistMode { Warn, RescaleGamma };

struct NyquistReport {
  VectorXd gamma;  // possibly rescaled
  std::vector<std::string> warnings;
};
/// Guards |Im(gamma_j lambda_j)| <= 0.95 pi/tau, either by warning per
/// offending eigenvalue or by uniformly shrinking gamma.
NyquistReport nyquist_guard(const VectorXcd& lambda_c, const VectorXd& gamma,
                            double tau, NyquistMode mode);

}  // namespace ssm
