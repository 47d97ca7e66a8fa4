#pragma once

#include <Eigen/Core>
#include <optional>
#include <utility>
#include <vector>

#include "ssmkit/activation.hpp"

namespace ssm {

using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

enum class LtiStructure { Diagonal, Dense };

/// Realized discrete-time half-system. Stores only the upper conjugate block;
/// the implied full system is blockdiag(A, conj(A)) etc., so n_x = 2*n_lambda
/// and all real outputs go through 2*Re(.).
struct DiscreteLti {
  MatrixXcd a;      // n_lambda x n_lambda (off-diagonal zero when Diagonal)
  MatrixXcd b;      // n_lambda x n_u
  MatrixXcd c;      // n_y x n_lambda
  MatrixXd d;       // n_y x n_u, real, applied outside the 2*Re(.)
  MatrixXd f;       // n_y x n_u skip connection
  LtiStructure structure = LtiStructure::Diagonal;

  Eigen::Index n_lambda() const { return a.rows(); }
  Eigen::Index n_u() const { return b.cols(); }
  Eigen::Index n_y() const { return c.rows(); }

  VectorXcd eigenvalues() const;  // diagonal entries or dense eigensolve
  double spectral_radius() const;
  void validate() const;  // dimension and Schur-stability checks
};

/// Half-state; the implied full state is [x; conj(x)].
struct ComplexState {
  VectorXcd x;
};

/// Frequency-domain handle for a continuous-time DPLR layer discretized via
/// the bilinear transform. Evaluable anywhere on the unit circle except the
/// bilinear singularity z = -1 (which the FFT engine special-cases).
struct TransferHandle {
  VectorXcd lambda_c;  // diagonal part, before the timescale
  MatrixXcd p, q;      // low-rank factors, n_lambda x n_r
  MatrixXcd b_c, c_c;
  double gamma = 1.0;  // scalar timescale
  double tau = 1.0;
  Eigen::Index n_r() const { return p.cols(); }
};

struct SsLayer {
  DiscreteLti lti;
  Activation activation;
  bool skip_identity = false;  // implies n_u == n_y and f == I
  std::optional<TransferHandle> transfer;  // present for bilinear DPLR layers

  void validate() const;
};

/// Series stack of layers: a deep Wiener model. Layer l feeds layer l+1.
struct SsModel {
  std::vector<SsLayer> layers;

  void validate() const;  // per-layer checks plus dimension chaining
  Eigen::Index n_u() const { return layers.front().lti.n_u(); }
  Eigen::Index n_y() const { return layers.back().lti.n_y(); }
};

enum class Engine { Sequential, Scan, Conv, Fft };

struct FullSystem {
  MatrixXcd a;  // 2n x 2n
  MatrixXcd b;  // 2n x n_u
  MatrixXcd c;  // n_y x 2n
};

/// Expands the half-system into its real-equivalent conjugate form
/// A = blockdiag(A, conj A), B = [B; conj B], C = [C, conj C].
FullSystem assemble_conjugate(const DiscreteLti& half);

/// One step of the layer recurrence from half-state x:
///   x_next = A x + B u,  eta = 2 Re(C x) + D u,  y = act(eta) + F u.
std::pair<ComplexState, VectorXd> ssl_step(const SsLayer& layer,
                                           const ComplexState& x,
                                           const VectorXd& u);

/// Free-run simulation of the whole stack from zero initial states.
/// Sequences are stored time-major: T rows, channel columns.
MatrixXd ssm_forward(const SsModel& model, const MatrixXd& u_seq, Engine engine);

}  // namespace ssm
