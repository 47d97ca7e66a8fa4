#pragma once

#include <complex>
#include <vector>

#include "ssmkit/lti.hpp"

namespace ssm {

/// Truncated impulse-response filter [A^{r-1}B, ..., AB, B] stored as
/// blocks[m] = A^m B for m = 0..r-1.
struct ConvFilter {
  std::vector<MatrixXcd> blocks;
  int r = 0;
  double tail_radius = 0.0;  // rho(A)^r estimate of what was dropped
};

/// Affine state-update element for the associative scan:
/// combine((a1,b1),(a2,b2)) = (a2*a1, a2*b1 + b2), element-wise diagonal.
struct ScanElement {
  VectorXcd a;
  VectorXcd b;
};

ScanElement scan_combine(const ScanElement& first, const ScanElement& second);

/// Engine outputs; eta is the pre-activation path (kept for linearity and
/// cross-engine checks).
struct SimResult {
  MatrixXd eta;  // T x n_y
  MatrixXd y;    // T x n_y
};

/// Reference semantics: iterates ssl_step from x0 = 0.
SimResult simulate_sequential(const SsLayer& layer, const MatrixXd& u_seq);

/// Like simulate_sequential but from a caller-provided initial half-state
/// (used by the incremental-stability checks).
SimResult simulate_sequential_from(const SsLayer& layer, const MatrixXd& u_seq,
                                   const VectorXcd& x0);

/// Chooses r = min R <= r_max with rho(A)^R < tol (else r_max) and
/// materializes the blocks. tol = 0 disables truncation: r = r_max exactly.
ConvFilter build_filter(const DiscreteLti& lti, int r_max, double tol = 1e-8);

SimResult simulate_convolutional(const SsLayer& layer, const MatrixXd& u_seq,
                                 const ConvFilter& filter);

/// Blocked inclusive associative scan over the per-step affine maps.
/// Diagonal layers only; Dense raises (the combine would cost O(n^3)).
SimResult simulate_scan(const SsLayer& layer, const MatrixXd& u_seq);

// Inference-only variant: same recurrence, skips materializing eta.
MatrixXd scan_forward(const SsLayer& layer, const MatrixXd& u_seq);

/// H(z) = C (s(z) I - A_eff)^{-1} B_eff with s(z) = (2/tau)(z-1)/(z+1) and
/// A_eff = Gamma (Lambda - P Q*), evaluated through the matrix-inversion-lemma
/// form: diagonal Cauchy sums plus an n_r x n_r solve. Never materializes an
/// n_lambda x n_lambda inverse.
MatrixXcd transfer_response_at_z(const TransferHandle& h, std::complex<double> z);

/// Continuous-axis frequency response H(s(z)) at z = exp(i w tau) for each
/// requested angular frequency w.
std::vector<MatrixXcd> dplr_frequency_response(const TransferHandle& h,
                                               const VectorXd& omegas);

/// FFT simulation of a bilinear DPLR layer: pads the input to the next power
/// of two >= 2T-1 (linear convolution, no wrap-around), multiplies by the
/// discrete-equivalent response (2/(1+z)) * H(s(z)) per bin, inverse
/// transforms, then applies 2*Re, the activation, and the skip.
SimResult simulate_fft(const SsLayer& layer, const MatrixXd& u_seq);

SimResult simulate(const SsLayer& layer, const MatrixXd& u_seq, Engine engine);

}  // namespace ssm
