#include "ssmkit/train.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "ssmkit/errors.hpp"
#include "ssmkit/parallel.hpp"
#include "ssmkit/rng.hpp"

namespace ssm {

namespace {

using cd = std::complex<double>;

// Realized layer plus every intermediate needed to chain gradients back to
// the raw parameters. Computed once per batch and shared across sequences.
struct LayerCache {
  LtiStructure structure = LtiStructure::Diagonal;
  Activation act;
  MatrixXcd a_dense;
  VectorXcd lam_d;
  MatrixXcd b_d;
  MatrixXcd c;
  MatrixXd d;
  MatrixXd f;
  Eigen::Index n_in = 0, n_out = 0, n = 0;

  // lru chain
  VectorXd nu, phase, gam;
  // ct_diag chain
  VectorXcd lam_c, lp, coef, dld, dcoef;
  VectorXd gamma_vec;
  // dplr chain
  MatrixXcd s_inv, n_mat, a_c, b_eff;
  VectorXcd lam_dplr;
  VectorXd phi_grad;
  double gamma_scalar = 1.0;
  double tau = 1.0;
};

// Carrier-convention accumulators at the realized-system level: for complex z
// the carrier is dL/dRe(z) + i dL/dIm(z).
struct LayerGrads {
  MatrixXcd g_a;    // dense state matrix
  VectorXcd g_lam;  // diagonal state entries
  MatrixXcd g_b;
  MatrixXcd g_c;
  MatrixXd g_d;
  MatrixXd g_f;

  void init(const LayerCache& c) {
    if (c.structure == LtiStructure::Dense)
      g_a = MatrixXcd::Zero(c.n, c.n);
    else
      g_lam = VectorXcd::Zero(c.n);
    g_b = MatrixXcd::Zero(c.n, c.n_in);
    g_c = MatrixXcd::Zero(c.n_out, c.n);
    g_d = MatrixXd::Zero(c.n_out, c.n_in);
    g_f = MatrixXd::Zero(c.n_out, c.n_in);
  }

  void add(const LayerGrads& o) {
    if (g_a.size()) g_a += o.g_a;
    if (g_lam.size()) g_lam += o.g_lam;
    g_b += o.g_b;
    g_c += o.g_c;
    g_d += o.g_d;
    g_f += o.g_f;
  }
};

LayerCache realize_cached(const SslParams& params, const Activation& act,
                          DiscretizationMethod method, bool allow_fe) {
  LayerCache c;
  c.act = act;
  if (const auto* lru = std::get_if<LruParams>(&params)) {
    const Eigen::Index n = lru->n_lambda();
    c.structure = LtiStructure::Diagonal;
    c.n = n;
    c.n_in = lru->n_u();
    c.n_out = lru->n_y();
    c.nu = lru->mu.array().exp();
    c.phase = lru->theta.array().exp();
    c.lam_d.resize(n);
    c.gam.resize(n);
    for (Eigen::Index j = 0; j < n; ++j) {
      c.lam_d[j] = std::exp(cd(-c.nu[j], c.phase[j]));
      c.gam[j] = std::sqrt(1.0 - std::exp(-2.0 * c.nu[j]));
    }
    c.b_d = c.gam.cast<cd>().asDiagonal() * lru->b_check;
    c.c = lru->c_tilde;
    c.d = lru->d;
    c.f = lru->skip_identity ? MatrixXd::Identity(c.n_out, c.n_in) : lru->f;
    return c;
  }
  if (const auto* ctd = std::get_if<CtDiagParams>(&params)) {
    const Eigen::Index n = ctd->n_lambda();
    c.structure = LtiStructure::Diagonal;
    c.n = n;
    c.n_in = ctd->n_u();
    c.n_out = ctd->n_y();
    c.tau = ctd->tau;
    if (method == DiscretizationMethod::ForwardEuler && !allow_fe)
      throw ConfigError(
          "forward Euler does not preserve stability; pass the unstable "
          "override to use it anyway");
    c.lam_c.resize(n);
    for (Eigen::Index j = 0; j < n; ++j)
      c.lam_c[j] = cd(-std::exp(ctd->alpha_re[j]), std::exp(ctd->alpha_im[j]));
    c.gamma_vec = ctd->log_gamma.array().exp();
    c.lp = c.gamma_vec.cast<cd>().cwiseProduct(c.lam_c);
    c.lam_d.resize(n);
    c.coef.resize(n);
    c.dld.resize(n);
    c.dcoef.resize(n);
    const double tau = c.tau;
    for (Eigen::Index j = 0; j < n; ++j) {
      const cd lp = c.lp[j];
      switch (method) {
        case DiscretizationMethod::Zoh: {
          const cd w = tau * lp;
          const cd ld = std::exp(w);
          c.lam_d[j] = ld;
          c.dld[j] = tau * ld;
          if (std::abs(w) < 1e-6) {
            c.coef[j] = tau * (1.0 + w / 2.0 + w * w / 6.0);
            c.dcoef[j] = tau * tau * (0.5 + w / 3.0);
          } else {
            c.coef[j] = (ld - 1.0) / lp;
            c.dcoef[j] = (tau * ld * lp - (ld - 1.0)) / (lp * lp);
          }
          break;
        }
        case DiscretizationMethod::Bilinear: {
          const cd den = 1.0 - (tau / 2.0) * lp;
          c.lam_d[j] = (1.0 + (tau / 2.0) * lp) / den;
          c.coef[j] = tau / den;
          c.dld[j] = tau / (den * den);
          c.dcoef[j] = tau * tau / (2.0 * den * den);
          break;
        }
        case DiscretizationMethod::ForwardEuler: {
          c.lam_d[j] = 1.0 + tau * lp;
          c.coef[j] = tau;
          c.dld[j] = tau;
          c.dcoef[j] = 0.0;
          break;
        }
      }
    }
    c.b_d.resize(n, c.n_in);
    for (Eigen::Index j = 0; j < n; ++j)
      c.b_d.row(j) = (c.coef[j] * c.gamma_vec[j]) * ctd->b_c.row(j);
    c.c = ctd->c_c;
    c.d = MatrixXd::Zero(c.n_out, c.n_in);
    c.f = ctd->skip_identity ? MatrixXd::Identity(c.n_out, c.n_in) : ctd->f;
    if (!allow_fe && c.lam_d.cwiseAbs().maxCoeff() >= 1.0)
      throw NumericError("training left the unit disk on a diagonal layer");
    return c;
  }

  const auto& dplr = std::get<DplrParams>(params);
  if (method != DiscretizationMethod::Bilinear)
    throw NumericError(
        "low-rank layers train only with the bilinear method; other "
        "discretizations are simulation-only");
  const Eigen::Index n = dplr.n_lambda();
  c.structure = LtiStructure::Dense;
  c.n = n;
  c.n_in = dplr.n_u();
  c.n_out = dplr.n_y();
  c.tau = dplr.tau;
  c.lam_dplr.resize(n);
  c.phi_grad.resize(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    c.phi_grad[j] = dplr.alpha_re[j] > 0.0 ? 1.0 : 0.0;
    c.lam_dplr[j] =
        cd(-(std::max(0.0, dplr.alpha_re[j]) + dplr.epsilon), dplr.alpha_im[j]);
  }
  const MatrixXcd& q = dplr.q_equals_p ? dplr.p : dplr.q;
  c.gamma_scalar = std::exp(dplr.log_gamma);
  c.a_c = MatrixXcd(c.lam_dplr.asDiagonal()) - dplr.p * q.adjoint();
  c.b_eff = c.gamma_scalar * dplr.b_c;
  const MatrixXcd eye = MatrixXcd::Identity(n, n);
  const MatrixXcd m = eye - (c.tau / 2.0) * (c.gamma_scalar * c.a_c);
  c.s_inv = m.lu().solve(eye);
  c.n_mat = eye + (c.tau / 2.0) * (c.gamma_scalar * c.a_c);
  c.a_dense = c.s_inv * c.n_mat;
  c.b_d = c.tau * (c.s_inv * c.b_eff);
  c.c = dplr.c_c;
  c.d = MatrixXd::Zero(c.n_out, c.n_in);
  c.f = dplr.skip_identity ? MatrixXd::Identity(c.n_out, c.n_in) : dplr.f;
  {
    const VectorXcd ev =
        Eigen::ComplexEigenSolver<MatrixXcd>(c.a_dense, false).eigenvalues();
    if (ev.cwiseAbs().maxCoeff() >= 1.0)
      throw NumericError("training left the unit disk on a low-rank layer");
  }
  return c;
}

// Maps realized-level gradients back to raw parameter space into `out`, a
// same-shaped parameter struct whose fields then hold dL/d(param).
void chain_to_params(const LayerCache& c, const LayerGrads& g,
                     const SslParams& params, SslParams& out) {
  if (const auto* lru = std::get_if<LruParams>(&params)) {
    auto& o = std::get<LruParams>(out);
    const Eigen::Index n = c.n;
    o.b_check = c.gam.cast<cd>().asDiagonal() * g.g_b;
    o.c_tilde = g.g_c;
    o.d = g.g_d;
    if (!lru->skip_identity) o.f = g.g_f;
    o.mu.resize(n);
    o.theta.resize(n);
    for (Eigen::Index j = 0; j < n; ++j) {
      const double g_gam =
          lru->b_check.row(j).conjugate().cwiseProduct(g.g_b.row(j)).sum().real();
      const cd lam = c.lam_d[j];
      const cd g_lam = g.g_lam[j] - (g_gam / c.gam[j]) * lam;
      const cd gw = std::conj(lam) * g_lam;
      o.mu[j] = -c.nu[j] * gw.real();
      o.theta[j] = c.phase[j] * gw.imag();
    }
    return;
  }
  if (const auto* ctd = std::get_if<CtDiagParams>(&params)) {
    auto& o = std::get<CtDiagParams>(out);
    const Eigen::Index n = c.n;
    o.alpha_re.resize(n);
    o.alpha_im.resize(n);
    o.log_gamma.resize(n);
    o.b_c.resize(n, c.n_in);
    o.c_c = g.g_c;
    if (!ctd->skip_identity) o.f = g.g_f;
    for (Eigen::Index j = 0; j < n; ++j) {
      const double gamma = c.gamma_vec[j];
      const cd coef = c.coef[j];
      // realized row: b_d = coef * gamma * b_c
      const auto gb = g.g_b.row(j);
      const auto bc = ctd->b_c.row(j);
      const cd g_coef = gamma * bc.conjugate().cwiseProduct(gb).sum();
      o.b_c.row(j) = (std::conj(coef) * gamma) * gb;
      double g_gamma = (coef * bc).conjugate().cwiseProduct(gb).sum().real();
      const cd g_lp =
          std::conj(c.dld[j]) * g.g_lam[j] + std::conj(c.dcoef[j]) * g_coef;
      g_gamma += (std::conj(c.lam_c[j]) * g_lp).real();
      const cd g_lamc = gamma * g_lp;
      o.alpha_re[j] = -std::exp(ctd->alpha_re[j]) * g_lamc.real();
      o.alpha_im[j] = std::exp(ctd->alpha_im[j]) * g_lamc.imag();
      o.log_gamma[j] = gamma * g_gamma;
    }
    return;
  }

  const auto& dplr = std::get<DplrParams>(params);
  auto& o = std::get<DplrParams>(out);
  const double tau = c.tau;
  const double gamma = c.gamma_scalar;
  // a_d = S n_mat, b_d = tau S b_eff, S = m^{-1}, m = I - (tau/2) a_eff,
  // n_mat = I + (tau/2) a_eff, a_eff = gamma a_c.
  const MatrixXcd g_s =
      g.g_a * c.n_mat.adjoint() + tau * (g.g_b * c.b_eff.adjoint());
  const MatrixXcd g_n = c.s_inv.adjoint() * g.g_a;
  const MatrixXcd g_beff = tau * (c.s_inv.adjoint() * g.g_b);
  const MatrixXcd g_m = -(c.s_inv.adjoint() * g_s * c.s_inv.adjoint());
  const MatrixXcd g_aeff = (tau / 2.0) * (g_n - g_m);
  const MatrixXcd g_ac = gamma * g_aeff;
  double g_gamma = c.a_c.conjugate().cwiseProduct(g_aeff).sum().real();
  o.b_c = gamma * g_beff;
  g_gamma += dplr.b_c.conjugate().cwiseProduct(g_beff).sum().real();
  const MatrixXcd g_w = -g_ac;  // a_c = diag(lam) - p q^H
  const MatrixXcd& q = dplr.q_equals_p ? dplr.p : dplr.q;
  if (dplr.q_equals_p) {
    o.p = g_w * dplr.p + g_w.adjoint() * dplr.p;
    o.q.setZero();
  } else {
    o.p = g_w * q;
    o.q = g_w.adjoint() * dplr.p;
  }
  const Eigen::Index n = c.n;
  o.alpha_re.resize(n);
  o.alpha_im.resize(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const cd g_lam = g_ac(j, j);
    o.alpha_re[j] = -c.phi_grad[j] * g_lam.real();
    o.alpha_im[j] = g_lam.imag();
  }
  o.log_gamma = gamma * g_gamma;
  o.c_c = g.g_c;
  if (!dplr.skip_identity) o.f = g.g_f;
}

MatrixXd act_deriv(const Activation& act, const MatrixXd& eta) {
  return eta.unaryExpr([&act](double x) { return act.derivative(x); });
}

struct ForwardTrace {
  std::vector<MatrixXd> inputs;   // n_in x T per layer
  std::vector<MatrixXcd> states;  // n x T, col k = x_k
  std::vector<MatrixXd> etas;     // n_out x T
  MatrixXd out;                   // n_y x T
};

ForwardTrace forward_trace(const std::vector<LayerCache>& caches,
                           const MatrixXd& u_seq, bool keep) {
  const Eigen::Index T = u_seq.rows();
  ForwardTrace tr;
  MatrixXd cur = u_seq.transpose();
  for (const LayerCache& c : caches) {
    if (cur.rows() != c.n_in)
      throw DataError("sequence width does not match the model");
    const MatrixXcd bu = c.b_d * cur.cast<cd>();
    MatrixXcd x(c.n, T);
    x.col(0).setZero();
    if (c.structure == LtiStructure::Diagonal) {
      for (Eigen::Index k = 0; k + 1 < T; ++k)
        x.col(k + 1) = c.lam_d.cwiseProduct(x.col(k)) + bu.col(k);
    } else {
      for (Eigen::Index k = 0; k + 1 < T; ++k)
        x.col(k + 1) = c.a_dense * x.col(k) + bu.col(k);
    }
    MatrixXd eta = 2.0 * (c.c * x).real();
    eta.noalias() += c.d * cur;
    MatrixXd next = c.act.apply(eta);
    next.noalias() += c.f * cur;
    if (keep) {
      tr.inputs.push_back(std::move(cur));
      tr.states.push_back(std::move(x));
      tr.etas.push_back(std::move(eta));
    }
    cur = std::move(next);
  }
  tr.out = std::move(cur);
  return tr;
}

std::vector<LayerCache> build_caches(const ParamModel& model) {
  std::vector<LayerCache> caches;
  caches.reserve(model.layers.size());
  for (const SslParams& p : model.layers)
    caches.push_back(realize_cached(p, model.activation, model.method,
                                    model.allow_forward_euler));
  for (std::size_t l = 1; l < caches.size(); ++l)
    if (caches[l].n_in != caches[l - 1].n_out)
      throw ConfigError("layer widths do not chain");
  return caches;
}

double total_elements(const std::vector<const Sequence*>& batch,
                      Eigen::Index n_y) {
  double n = 0.0;
  for (const Sequence* s : batch) n += static_cast<double>(s->y.rows() * n_y);
  return n;
}

// Zero-gradient holder with the same shapes as the model.
ParamModel make_grad_holder(const ParamModel& model) {
  ParamModel holder = model;
  const VectorXd zeros = VectorXd::Zero(pack(model).size());
  return unpack(holder, zeros);
}

}  // namespace

double mse_loss(const std::vector<const Sequence*>& batch, const SsModel& model,
                Engine engine) {
  if (batch.empty()) throw DataError("empty batch");
  double acc = 0.0;
  double count = 0.0;
  for (const Sequence* s : batch) {
    const MatrixXd pred = ssm_forward(model, s->u, engine);
    if (pred.rows() != s->y.rows() || pred.cols() != s->y.cols())
      throw DataError("prediction shape does not match the targets");
    acc += (pred - s->y).squaredNorm();
    count += static_cast<double>(s->y.size());
  }
  return acc / count;
}

double loss_and_gradient(const ParamModel& model,
                         const std::vector<const Sequence*>& batch,
                         VectorXd& grad) {
  if (batch.empty()) throw DataError("empty batch");
  const std::vector<LayerCache> caches = build_caches(model);
  const std::size_t L = caches.size();
  const Eigen::Index n_y = caches.back().n_out;
  const double n_tot = total_elements(batch, n_y);

  std::vector<double> seq_loss(batch.size(), 0.0);
  std::vector<std::vector<LayerGrads>> seq_grads(batch.size());

  parallel_for(0, static_cast<std::ptrdiff_t>(batch.size()),
               [&](std::ptrdiff_t si) {
    const Sequence& seq = *batch[static_cast<std::size_t>(si)];
    if (seq.y.cols() != n_y)
      throw DataError("target channel count does not match the model");
    const Eigen::Index T = seq.u.rows();
    ForwardTrace tr = forward_trace(caches, seq.u, /*keep=*/true);

    const MatrixXd err = tr.out - seq.y.transpose();
    seq_loss[static_cast<std::size_t>(si)] = err.squaredNorm();

    auto& grads = seq_grads[static_cast<std::size_t>(si)];
    grads.resize(L);
    MatrixXd gy = (2.0 / n_tot) * err;  // carrier for the layer output
    for (std::size_t li = L; li-- > 0;) {
      const LayerCache& c = caches[li];
      LayerGrads& g = grads[li];
      g.init(c);
      const MatrixXd& u = tr.inputs[li];
      const MatrixXcd& x = tr.states[li];
      const MatrixXd geta = act_deriv(c.act, tr.etas[li]).cwiseProduct(gy);
      const MatrixXcd getac = geta.cast<cd>();

      g.g_d.noalias() = geta * u.transpose();
      g.g_f.noalias() = gy * u.transpose();
      g.g_c.noalias() = 2.0 * (getac * x.adjoint());

      MatrixXd gu = c.d.transpose() * geta;
      gu.noalias() += c.f.transpose() * gy;

      // adjoint sweep: amat.col(k) = a_{k+1}, a_k = A^H a_{k+1} + 2 C^H geta_k
      const MatrixXcd chg = c.c.adjoint() * getac;
      MatrixXcd amat(c.n, T);
      VectorXcd a = VectorXcd::Zero(c.n);
      if (c.structure == LtiStructure::Diagonal) {
        const VectorXcd lamc = c.lam_d.conjugate();
        for (Eigen::Index k = T; k-- > 0;) {
          amat.col(k) = a;
          a = lamc.cwiseProduct(a) + 2.0 * chg.col(k);
        }
      } else {
        const MatrixXcd ah = c.a_dense.adjoint();
        for (Eigen::Index k = T; k-- > 0;) {
          amat.col(k) = a;
          a = ah * a + 2.0 * chg.col(k);
        }
      }

      if (c.structure == LtiStructure::Diagonal)
        g.g_lam = amat.cwiseProduct(x.conjugate()).rowwise().sum();
      else
        g.g_a.noalias() = amat * x.adjoint();
      g.g_b.noalias() = amat * u.transpose().cast<cd>();
      gu.noalias() += (c.b_d.adjoint() * amat).real();
      gy = std::move(gu);
    }
  });

  // Fixed-order reduction keeps results independent of the thread count.
  double loss = 0.0;
  std::vector<LayerGrads> total(L);
  for (std::size_t li = 0; li < L; ++li) total[li].init(caches[li]);
  for (std::size_t si = 0; si < batch.size(); ++si) {
    loss += seq_loss[si];
    for (std::size_t li = 0; li < L; ++li) total[li].add(seq_grads[si][li]);
  }
  loss /= n_tot;

  ParamModel holder = make_grad_holder(model);
  for (std::size_t li = 0; li < L; ++li)
    chain_to_params(caches[li], total[li], model.layers[li], holder.layers[li]);
  grad = pack(holder);
  return loss;
}

namespace {

double loss_only(const ParamModel& model,
                 const std::vector<const Sequence*>& batch) {
  const std::vector<LayerCache> caches = build_caches(model);
  const Eigen::Index n_y = caches.back().n_out;
  const double n_tot = total_elements(batch, n_y);
  double acc = 0.0;
  for (const Sequence* s : batch) {
    ForwardTrace tr = forward_trace(caches, s->u, /*keep=*/false);
    acc += (tr.out - s->y.transpose()).squaredNorm();
  }
  return acc / n_tot;
}

}  // namespace

FiniteDiffReport finite_diff_check(const ParamModel& model,
                                   const std::vector<const Sequence*>& batch,
                                   double step, Eigen::Index n_coords,
                                   std::uint64_t seed) {
  VectorXd analytic;
  loss_and_gradient(model, batch, analytic);
  const FlatLayout layout = flat_layout(model);
  VectorXd theta = pack(model);

  std::vector<Eigen::Index> coords;
  if (n_coords <= 0 || n_coords >= theta.size()) {
    coords.resize(static_cast<std::size_t>(theta.size()));
    std::iota(coords.begin(), coords.end(), 0);
  } else {
    std::vector<Eigen::Index> all(static_cast<std::size_t>(theta.size()));
    std::iota(all.begin(), all.end(), 0);
    Rng rng = Rng::stream(seed, 41);
    for (Eigen::Index i = 0; i < n_coords; ++i) {
      const Eigen::Index j =
          i + static_cast<Eigen::Index>(
                  rng.next_u64() %
                  static_cast<std::uint64_t>(theta.size() - i));
      std::swap(all[static_cast<std::size_t>(i)],
                all[static_cast<std::size_t>(j)]);
    }
    coords.assign(all.begin(), all.begin() + n_coords);
  }

  FiniteDiffReport rep;
  rep.rel_errs.reserve(coords.size());
  for (const Eigen::Index i : coords) {
    const double saved = theta[i];
    theta[i] = saved + step;
    const double lp = loss_only(unpack(model, theta), batch);
    theta[i] = saved - step;
    const double lm = loss_only(unpack(model, theta), batch);
    theta[i] = saved;
    const double fd = (lp - lm) / (2.0 * step);
    const double an = analytic[i];
    const double denom = std::max({std::abs(fd), std::abs(an), 1e-6});
    const double rel = std::abs(fd - an) / denom;
    rep.rel_errs.push_back(rel);
    if (rel > rep.max_rel_err) {
      rep.max_rel_err = rel;
      rep.worst_index = i;
      rep.worst_block = layout.block_of(i).name;
    }
  }
  std::vector<double> sorted = rep.rel_errs;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t idx = static_cast<std::size_t>(
      std::ceil(0.95 * static_cast<double>(sorted.size())));
  rep.p95_rel_err = sorted[std::min(sorted.size() - 1, idx == 0 ? 0 : idx - 1)];
  return rep;
}

void AdamState::reset(Eigen::Index n) {
  m = VectorXd::Zero(n);
  v = VectorXd::Zero(n);
  t = 0;
}

void adam_update(VectorXd& theta, const VectorXd& grad, AdamState& state,
                 const AdamConfig& cfg) {
  if (state.m.size() != theta.size()) state.reset(theta.size());
  if (grad.size() != theta.size())
    throw ConfigError("gradient size does not match the parameter vector");
  state.t += 1;
  state.m = cfg.beta1 * state.m + (1.0 - cfg.beta1) * grad;
  state.v = cfg.beta2 * state.v.array().matrix() +
            (1.0 - cfg.beta2) * grad.cwiseProduct(grad);
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.t));
  const VectorXd mhat = state.m / bc1;
  const VectorXd vhat = state.v / bc2;
  theta -= cfg.lr * (mhat.array() / (vhat.array().sqrt() + cfg.eps)).matrix();
}

bool PlateauScheduler::step(double train_loss) {
  if (!(train_loss == train_loss))
    throw NumericError("training loss became NaN");
  const double margin =
      std::isinf(best) ? 0.0 : min_rel_improvement * std::abs(best);
  const bool improved = train_loss < best - margin;
  if (improved) {
    best = train_loss;
    stall = 0;
    return false;
  }
  if (++stall >= patience) {
    stall = 0;
    return true;
  }
  return false;
}

bool EarlyStopper::step(double val_loss) {
  if (!(val_loss == val_loss))
    throw NumericError("validation loss became NaN");
  const double margin =
      std::isinf(best) ? 0.0 : min_rel_improvement * std::abs(best);
  const bool improved = val_loss < best - margin;
  improved_last = improved;
  if (improved) {
    best = val_loss;
    stall = 0;
    return false;
  }
  return ++stall >= patience;
}

namespace {

Engine compatible_engine(const SsModel& model, Engine requested) {
  for (const SsLayer& l : model.layers) {
    if (requested == Engine::Scan && l.lti.structure != LtiStructure::Diagonal)
      return Engine::Sequential;
    if (requested == Engine::Fft && !l.transfer) return Engine::Sequential;
  }
  return requested;
}

}  // namespace

TrainResult train(const ParamModel& init, const Dataset& data,
                  const TrainConfig& cfg, const EpochCallback& on_epoch) {
  const auto train_seqs = data.with_role(Role::Train);
  const auto val_seqs = data.with_role(Role::Val);
  if (train_seqs.empty()) throw DataError("no training sequences");
  if (val_seqs.empty()) throw DataError("no validation sequences");
  if (cfg.batch_size <= 0) throw ConfigError("batch size must be positive");
  if (cfg.max_epochs <= 0) throw ConfigError("epoch budget must be positive");

  const ParamModel proto = init;
  VectorXd theta = pack(proto);
  AdamState adam;
  adam.reset(theta.size());
  AdamConfig adam_cfg = cfg.adam;
  PlateauScheduler sched = cfg.scheduler;
  EarlyStopper stop = cfg.stopper;

  TrainResult result;
  result.best_model = proto;
  VectorXd best_theta = theta;

  std::vector<std::size_t> order(train_seqs.size());
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    // seeded in-place shuffle, refreshed every epoch
    {
      Rng rng = Rng::stream(cfg.shuffle_seed,
                            static_cast<std::uint64_t>(epoch));
      for (std::size_t i = 0; i + 1 < order.size(); ++i) {
        const std::size_t j =
            i + static_cast<std::size_t>(
                    rng.next_u64() % (order.size() - i));
        std::swap(order[i], order[j]);
      }
    }

    double epoch_loss_num = 0.0;
    double epoch_elems = 0.0;
    double last_grad_norm = 0.0;
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t stop_i = std::min(
          order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      std::vector<const Sequence*> batch;
      batch.reserve(stop_i - start);
      for (std::size_t i = start; i < stop_i; ++i)
        batch.push_back(train_seqs[order[i]]);
      const ParamModel cur = unpack(proto, theta);
      VectorXd grad;
      const double batch_loss = loss_and_gradient(cur, batch, grad);
      const double elems = total_elements(batch, cur.n_y());
      epoch_loss_num += batch_loss * elems;
      epoch_elems += elems;
      last_grad_norm = grad.norm();
      adam_update(theta, grad, adam, adam_cfg);
    }
    const double train_loss = epoch_loss_num / epoch_elems;

    const ParamModel cur = unpack(proto, theta);
    const SsModel realized = realize_model(cur);
    if (cfg.check_stability_each_epoch) realized.validate();
    const double val_loss = mse_loss(
        val_seqs, realized, compatible_engine(realized, cfg.forward_engine));

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = train_loss;
    rec.val_loss = val_loss;
    rec.grad_norm = last_grad_norm;
    rec.lr_cut = sched.step(train_loss);
    if (rec.lr_cut) adam_cfg.lr *= sched.factor;
    rec.lr = adam_cfg.lr;

    const bool stop_now = stop.step(val_loss);
    rec.new_best = stop.improved_last;
    if (stop.improved_last) {
      best_theta = theta;
      result.best_val_loss = val_loss;
      result.best_epoch = epoch;
    }
    result.history.push_back(rec);
    result.epochs_run = epoch;
    if (on_epoch) on_epoch(rec);
    if (stop_now) {
      result.early_stopped = true;
      break;
    }
  }

  result.best_model = unpack(proto, best_theta);
  return result;
}

}  // namespace ssm
