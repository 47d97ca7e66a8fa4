#include "ssmkit/engines.hpp"

#include <fftw3.h>

#include <Eigen/LU>
#include <cmath>
#include <mutex>
#include <sstream>

#include "ssmkit/errors.hpp"
#include "ssmkit/parallel.hpp"

namespace ssm {

namespace {

using cd = std::complex<double>;

Eigen::Index next_pow2(Eigen::Index n) {
  Eigen::Index p = 1;
  while (p < n) p <<= 1;
  return p;
}

// H(s) = C W B - (C W P)(I_r + Q^H W P)^{-1}(Q^H W B) with W = diag 1/(s - g*lambda)
// and B, P carrying the timescale g. Cost is O(n*(n_u+n_r+n_y) + n_r^3).
MatrixXcd mil_at_s(const VectorXcd& lambda, const MatrixXcd& p,
                   const MatrixXcd& q, const MatrixXcd& b, const MatrixXcd& c,
                   double gamma, cd s) {
  const Eigen::Index n = lambda.size();
  VectorXcd w =
      (VectorXcd::Constant(n, s) - gamma * lambda).cwiseInverse();
  MatrixXcd wb = w.asDiagonal() * (gamma * b);
  MatrixXcd wp = w.asDiagonal() * (gamma * p);
  MatrixXcd gram =
      MatrixXcd::Identity(p.cols(), p.cols()) + q.adjoint() * wp;
  return c * wb - (c * wp) * gram.lu().solve(q.adjoint() * wb);
}

std::mutex& fftw_mutex() {
  static std::mutex m;
  return m;
}

struct FftwPlan {
  fftw_plan plan = nullptr;
  ~FftwPlan() {
    if (plan) {
      std::lock_guard<std::mutex> lk(fftw_mutex());
      fftw_destroy_plan(plan);
    }
  }
};

}  // namespace

ScanElement scan_combine(const ScanElement& first, const ScanElement& second) {
  ScanElement out;
  out.a = second.a.cwiseProduct(first.a);
  out.b = second.a.cwiseProduct(first.b) + second.b;
  return out;
}

SimResult simulate_sequential_from(const SsLayer& layer, const MatrixXd& u_seq,
                                   const VectorXcd& x0) {
  const DiscreteLti& s = layer.lti;
  const Eigen::Index T = u_seq.rows();
  if (u_seq.cols() != s.n_u())
    throw DataError("input channel count does not match the layer");
  if (x0.size() != s.n_lambda())
    throw DataError("initial state size does not match the layer");
  SimResult res;
  res.eta.resize(T, s.n_y());
  res.y.resize(T, s.n_y());
  const bool diag = s.structure == LtiStructure::Diagonal;
  const VectorXcd lam = diag ? VectorXcd(s.a.diagonal()) : VectorXcd();
  VectorXcd x = x0;
  VectorXd eta(s.n_y());
  for (Eigen::Index k = 0; k < T; ++k) {
    const auto u = u_seq.row(k).transpose();
    eta.noalias() = s.d * u;
    eta.noalias() += 2.0 * (s.c * x).real();
    res.eta.row(k) = eta.transpose();
    res.y.row(k) =
        (layer.activation.apply(eta) + s.f * u).transpose();
    if (diag)
      x = lam.cwiseProduct(x) + s.b * u;
    else
      x = s.a * x + s.b * u;
  }
  return res;
}

SimResult simulate_sequential(const SsLayer& layer, const MatrixXd& u_seq) {
  return simulate_sequential_from(layer, u_seq,
                                  VectorXcd::Zero(layer.lti.n_lambda()));
}

ConvFilter build_filter(const DiscreteLti& lti, int r_max, double tol) {
  if (r_max < 1) throw ConfigError("filter length cap must be >= 1");
  if (tol < 0.0 || std::isnan(tol))
    throw ConfigError("filter tolerance must be nonnegative");
  const double rho = lti.spectral_radius();
  int r = 1;
  if (tol == 0.0) {
    r = r_max;  // rho^r can never go below zero: keep the full window
  } else if (rho > 0.0 && rho < 1.0 && std::pow(rho, 1) >= tol) {
    r = static_cast<int>(std::ceil(std::log(tol) / std::log(rho)));
    // exact minimality despite rounding in the log quotient
    while (r > 1 && std::pow(rho, r - 1) < tol) --r;
    while (r < r_max && std::pow(rho, r) >= tol) ++r;
  } else if (rho >= 1.0) {
    r = r_max;
  }
  r = std::min(r, r_max);
  ConvFilter f;
  f.r = r;
  f.tail_radius = std::pow(rho, r);
  f.blocks.reserve(static_cast<std::size_t>(r));
  if (lti.structure == LtiStructure::Diagonal) {
    const VectorXcd lam = lti.a.diagonal();
    MatrixXcd cur = lti.b;
    for (int m = 0; m < r; ++m) {
      f.blocks.push_back(cur);
      cur = lam.asDiagonal() * cur;
    }
  } else {
    MatrixXcd cur = lti.b;
    for (int m = 0; m < r; ++m) {
      f.blocks.push_back(cur);
      cur = lti.a * cur;
    }
  }
  return f;
}

SimResult simulate_convolutional(const SsLayer& layer, const MatrixXd& u_seq,
                                 const ConvFilter& filter) {
  const DiscreteLti& s = layer.lti;
  const Eigen::Index T = u_seq.rows();
  if (u_seq.cols() != s.n_u())
    throw DataError("input channel count does not match the layer");
  if (filter.blocks.empty() || filter.blocks.front().rows() != s.n_lambda() ||
      filter.blocks.front().cols() != s.n_u())
    throw ConfigError("filter does not match the layer");
  SimResult res;
  res.eta = u_seq * s.d.transpose();
  // Only Re(C A^m B) can reach eta for real inputs, so the tap matrices are
  // real and each tap is one dense (T-1-m) x n_u by n_u x n_y product.
  const int taps = std::min<Eigen::Index>(filter.r, T - 1);
  for (int m = 0; m < taps; ++m) {
    const Eigen::Index rows = T - 1 - m;
    const MatrixXd hm = 2.0 * (s.c * filter.blocks[static_cast<std::size_t>(m)]).real();
    res.eta.middleRows(m + 1, rows).noalias() +=
        u_seq.topRows(rows) * hm.transpose();
  }
  res.y = layer.activation.apply(res.eta) + u_seq * s.f.transpose();
  return res;
}

namespace {

// Streaming scan for a single-thread budget: one cache-resident panel per
// block instead of an O(n*T) trajectory, same recurrence order as the
// sequential engine. The block grows with T (capped so the panel stays within
// a fraction of a typical L2) to amortize block-boundary overhead, and the
// activation plus skip are fused per block so every row is finished while
// still hot. With `WantEta` off the full-length pre-activation buffer is
// never materialized, which saves two sweeps of memory traffic on the
// inference path where only y is consumed.
template <bool WantEta>
SimResult scan_stream(const SsLayer& layer, const MatrixXd& u_seq,
                      const VectorXcd& lam) {
  const DiscreteLti& s = layer.lti;
  const Eigen::Index T = u_seq.rows();
  const Eigen::Index n = s.n_lambda();
  Eigen::Index wide = std::max<Eigen::Index>(1024, T / 16);
  const Eigen::Index cap = std::max<Eigen::Index>(
      1024, (Eigen::Index{1} << 15) / std::max<Eigen::Index>(n, 1));
  wide = std::min(wide, cap);
  SimResult res;
  if constexpr (WantEta) res.eta.resize(T, s.n_y());
  res.y.resize(T, s.n_y());
  MatrixXcd panel(n, std::min(wide, T));
  VectorXcd carry = VectorXcd::Zero(n);
  MatrixXd eta_rows;
  // Row 0 has no state contribution; every later row is produced exactly once
  // by the block that computed its state.
  {
    const MatrixXd eta0 = u_seq.row(0) * s.d.transpose();
    if constexpr (WantEta) res.eta.row(0) = eta0;
    res.y.row(0) =
        layer.activation.apply(eta0) + u_seq.row(0) * s.f.transpose();
  }
  for (Eigen::Index o = 0; o < T; o += wide) {
    const Eigen::Index len = std::min(wide, T - o);
    auto P = panel.leftCols(len);
    const MatrixXd ut = u_seq.middleRows(o, len).transpose();
    P.real() = s.b.real() * ut;
    P.imag() = s.b.imag() * ut;
    P.col(0) += lam.cwiseProduct(carry);
    for (Eigen::Index j = 1; j < len; ++j)
      P.col(j) += lam.cwiseProduct(P.col(j - 1));
    carry = P.col(len - 1);
    // P.col(j) holds x_{o+j+1}; eta at step k reads x_k, so the panel feeds
    // rows o+1 .. min(o+len, T-1).
    const Eigen::Index out_rows = std::min(len, T - 1 - o);
    if (out_rows > 0) {
      const MatrixXcd cx = s.c * P.leftCols(out_rows);
      const auto u_rows = u_seq.middleRows(o + 1, out_rows);
      eta_rows.noalias() = u_rows * s.d.transpose();
      eta_rows += 2.0 * cx.real().transpose();
      if constexpr (WantEta) res.eta.middleRows(o + 1, out_rows) = eta_rows;
      res.y.middleRows(o + 1, out_rows) =
          layer.activation.apply(eta_rows) + u_rows * s.f.transpose();
    }
  }
  return res;
}

void check_scan_layer(const SsLayer& layer, const MatrixXd& u_seq) {
  if (layer.lti.structure != LtiStructure::Diagonal)
    throw ConfigError("scan engine requires a diagonal layer");
  if (u_seq.cols() != layer.lti.n_u())
    throw DataError("input channel count does not match the layer");
}

}  // namespace

MatrixXd scan_forward(const SsLayer& layer, const MatrixXd& u_seq) {
  check_scan_layer(layer, u_seq);
  if (num_threads() == 1) {
    const VectorXcd lam = layer.lti.a.diagonal();
    return scan_stream<false>(layer, u_seq, lam).y;
  }
  return simulate_scan(layer, u_seq).y;
}

SimResult simulate_scan(const SsLayer& layer, const MatrixXd& u_seq) {
  check_scan_layer(layer, u_seq);
  const DiscreteLti& s = layer.lti;
  const Eigen::Index T = u_seq.rows();
  const Eigen::Index n = s.n_lambda();
  const VectorXcd lam = s.a.diagonal();
  const Eigen::Index block = 1024;

  if (num_threads() == 1) return scan_stream<true>(layer, u_seq, lam);

  // Forcing terms as columns: V.col(k) = B u_k.
  MatrixXcd V(n, T);
  {
    const MatrixXd ut = u_seq.transpose();
    V.real() = s.b.real() * ut;
    V.imag() = s.b.imag() * ut;
  }

  const Eigen::Index nb = (T + block - 1) / block;
  const Eigen::Index pow_len = std::min(block, T);
  // lampow.col(j) = lam^(j+1); shared across blocks since the transition is
  // time-invariant.
  MatrixXcd lampow(n, pow_len);
  lampow.col(0) = lam;
  for (Eigen::Index j = 1; j < pow_len; ++j)
    lampow.col(j) = lampow.col(j - 1).cwiseProduct(lam);

  // Local inclusive scans inside every block.
  parallel_for(0, nb, [&](std::ptrdiff_t bi) {
    const Eigen::Index o = bi * block;
    const Eigen::Index len = std::min(block, T - o);
    for (Eigen::Index j = 1; j < len; ++j)
      V.col(o + j) += lam.cwiseProduct(V.col(o + j - 1));
  });

  // Exclusive carry across blocks, then broadcast into each block.
  if (nb > 1) {
    MatrixXcd carry(n, nb);
    carry.col(0).setZero();
    for (Eigen::Index bi = 1; bi < nb; ++bi) {
      const Eigen::Index o = (bi - 1) * block;
      const Eigen::Index len = std::min(block, T - o);
      carry.col(bi) =
          lampow.col(len - 1).cwiseProduct(carry.col(bi - 1)) + V.col(o + len - 1);
    }
    parallel_for(1, nb, [&](std::ptrdiff_t bi) {
      const Eigen::Index o = bi * block;
      const Eigen::Index len = std::min(block, T - o);
      for (Eigen::Index j = 0; j < len; ++j)
        V.col(o + j) += lampow.col(j).cwiseProduct(carry.col(bi));
    });
  }

  // After the scan V.col(k) = x_{k+1}; eta at step k reads x_k.
  SimResult res;
  res.eta = u_seq * s.d.transpose();
  if (T > 1) {
    const MatrixXcd cx = s.c * V.leftCols(T - 1);
    res.eta.bottomRows(T - 1) += 2.0 * cx.real().transpose();
  }
  res.y = layer.activation.apply(res.eta) + u_seq * s.f.transpose();
  return res;
}

MatrixXcd transfer_response_at_z(const TransferHandle& h,
                                 std::complex<double> z) {
  if (std::abs(z + 1.0) < 1e-12)
    throw NumericError("bilinear response is singular at z = -1");
  const cd s = (2.0 / h.tau) * (z - 1.0) / (z + 1.0);
  return mil_at_s(h.lambda_c, h.p, h.q, h.b_c, h.c_c, h.gamma, s);
}

std::vector<MatrixXcd> dplr_frequency_response(const TransferHandle& h,
                                               const VectorXd& omegas) {
  std::vector<MatrixXcd> out(static_cast<std::size_t>(omegas.size()));
  parallel_for(0, omegas.size(), [&](std::ptrdiff_t i) {
    const cd z = std::exp(cd(0.0, omegas[i] * h.tau));
    out[static_cast<std::size_t>(i)] = transfer_response_at_z(h, z);
  });
  return out;
}

SimResult simulate_fft(const SsLayer& layer, const MatrixXd& u_seq) {
  if (!layer.transfer)
    throw ConfigError(
        "fft engine requires a layer with a frequency-domain handle");
  const TransferHandle& h = *layer.transfer;
  const DiscreteLti& s = layer.lti;
  const Eigen::Index T = u_seq.rows();
  const Eigen::Index n_u = s.n_u();
  const Eigen::Index n_y = s.n_y();
  if (u_seq.cols() != n_u)
    throw DataError("input channel count does not match the layer");
  if (T == 0) return SimResult{MatrixXd(0, n_y), MatrixXd(0, n_y)};

  // Pad so the circular convolution is linear and the wrapped impulse tail
  // decays below ~1e-12 of the response scale.
  const double rho = s.spectral_radius();
  Eigen::Index extra = 0;
  if (rho > 0.0 && rho < 1.0) {
    const double need =
        std::log(1e-12 * (1.0 - rho)) / std::log(rho);
    extra = static_cast<Eigen::Index>(std::min(need, 4.0e6)) + 1;
  } else if (rho >= 1.0) {
    throw NumericError("fft engine requires a Schur-stable layer");
  }
  const Eigen::Index N =
      std::min<Eigen::Index>(next_pow2(std::max(2 * T - 1, T + extra)),
                             Eigen::Index(1) << 22);

  // Real-equivalent response per bin: the half-system response plus its
  // conjugate twin, with the bilinear output factor 2/(1+z). The z = -1 bin
  // collapses to -tau*gamma*Re(C B) because the resolvent term cancels there.
  const Eigen::Index half = N / 2;
  std::vector<MatrixXcd> g(static_cast<std::size_t>(half) + 1);
  const VectorXcd lam_conj = h.lambda_c.conjugate();
  const MatrixXcd p_conj = h.p.conjugate();
  const MatrixXcd q_conj = h.q.conjugate();
  const MatrixXcd b_conj = h.b_c.conjugate();
  const MatrixXcd c_conj = h.c_c.conjugate();
  parallel_for(0, half + 1, [&](std::ptrdiff_t j) {
    if (j == half) {
      g[static_cast<std::size_t>(j)] =
          (-h.tau * h.gamma) * (h.c_c * h.b_c).real().cast<cd>();
      return;
    }
    const double ang = 2.0 * M_PI * static_cast<double>(j) / static_cast<double>(N);
    const cd z(std::cos(ang), std::sin(ang));
    const cd sz = (2.0 / h.tau) * (z - 1.0) / (z + 1.0);
    const cd fac = 2.0 / (1.0 + z);
    g[static_cast<std::size_t>(j)] =
        fac * (mil_at_s(h.lambda_c, h.p, h.q, h.b_c, h.c_c, h.gamma, sz) +
               mil_at_s(lam_conj, p_conj, q_conj, b_conj, c_conj, h.gamma, sz));
  }, 64);

  // Forward transforms of each input channel.
  std::vector<std::vector<cd>> uhat(static_cast<std::size_t>(n_u));
  {
    std::vector<cd> buf(static_cast<std::size_t>(N));
    for (Eigen::Index ch = 0; ch < n_u; ++ch) {
      std::fill(buf.begin(), buf.end(), cd(0.0, 0.0));
      for (Eigen::Index k = 0; k < T; ++k)
        buf[static_cast<std::size_t>(k)] = cd(u_seq(k, ch), 0.0);
      uhat[static_cast<std::size_t>(ch)].assign(static_cast<std::size_t>(N),
                                                cd(0.0, 0.0));
      FftwPlan plan;
      {
        std::lock_guard<std::mutex> lk(fftw_mutex());
        plan.plan = fftw_plan_dft_1d(
            static_cast<int>(N), reinterpret_cast<fftw_complex*>(buf.data()),
            reinterpret_cast<fftw_complex*>(
                uhat[static_cast<std::size_t>(ch)].data()),
            FFTW_FORWARD, FFTW_ESTIMATE);
      }
      fftw_execute(plan.plan);
    }
  }

  // Per-bin multiply and inverse transform of each output channel.
  SimResult res;
  res.eta = u_seq * s.d.transpose();
  {
    std::vector<std::vector<cd>> yhat(
        static_cast<std::size_t>(n_y),
        std::vector<cd>(static_cast<std::size_t>(N), cd(0.0, 0.0)));
    for (Eigen::Index j = 0; j < N; ++j) {
      const std::size_t jm = static_cast<std::size_t>(j <= half ? j : N - j);
      const bool mirror = j > half;
      for (Eigen::Index oy = 0; oy < n_y; ++oy) {
        cd acc(0.0, 0.0);
        for (Eigen::Index iu = 0; iu < n_u; ++iu) {
          const cd gij = mirror ? std::conj(g[jm](oy, iu)) : g[jm](oy, iu);
          acc += gij * uhat[static_cast<std::size_t>(iu)][static_cast<std::size_t>(j)];
        }
        yhat[static_cast<std::size_t>(oy)][static_cast<std::size_t>(j)] = acc;
      }
    }
    std::vector<cd> out(static_cast<std::size_t>(N));
    for (Eigen::Index oy = 0; oy < n_y; ++oy) {
      FftwPlan plan;
      {
        std::lock_guard<std::mutex> lk(fftw_mutex());
        plan.plan = fftw_plan_dft_1d(
            static_cast<int>(N),
            reinterpret_cast<fftw_complex*>(
                yhat[static_cast<std::size_t>(oy)].data()),
            reinterpret_cast<fftw_complex*>(out.data()), FFTW_BACKWARD,
            FFTW_ESTIMATE);
      }
      fftw_execute(plan.plan);
      const double scale = 1.0 / static_cast<double>(N);
      for (Eigen::Index k = 0; k < T; ++k)
        res.eta(k, oy) += out[static_cast<std::size_t>(k)].real() * scale;
    }
  }
  res.y = layer.activation.apply(res.eta) + u_seq * s.f.transpose();
  return res;
}

SimResult simulate(const SsLayer& layer, const MatrixXd& u_seq, Engine engine) {
  switch (engine) {
    case Engine::Sequential:
      return simulate_sequential(layer, u_seq);
    case Engine::Scan:
      return simulate_scan(layer, u_seq);
    case Engine::Conv: {
      const int r_max = static_cast<int>(std::max<Eigen::Index>(u_seq.rows(), 1));
      return simulate_convolutional(layer, u_seq,
                                    build_filter(layer.lti, r_max));
    }
    case Engine::Fft:
      return simulate_fft(layer, u_seq);
  }
  throw ConfigError("unknown simulation engine");
}

}  // namespace ssm
