#include "ssmkit/params.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <cmath>
#include <sstream>
#include <unsupported/Eigen/MatrixFunctions>

#include "ssmkit/errors.hpp"

namespace ssm {

namespace {

using cd = std::complex<double>;

void check_layer_dims(Eigen::Index n, const MatrixXcd& b, const MatrixXcd& c,
                      const MatrixXd& f, bool skip_identity, const char* who) {
  std::ostringstream os;
  if (n <= 0) {
    os << who << ": state dimension must be positive";
    throw ConfigError(os.str());
  }
  if (b.rows() != n) {
    os << who << ": input matrix has " << b.rows() << " rows, expected " << n;
    throw ConfigError(os.str());
  }
  if (c.cols() != n) {
    os << who << ": output matrix has " << c.cols() << " cols, expected " << n;
    throw ConfigError(os.str());
  }
  if (skip_identity) {
    if (b.cols() != c.rows()) {
      os << who << ": identity skip requires matching input/output widths, got "
         << b.cols() << " and " << c.rows();
      throw ConfigError(os.str());
    }
  } else if (f.rows() != c.rows() || f.cols() != b.cols()) {
    os << who << ": skip matrix is " << f.rows() << "x" << f.cols()
       << ", expected " << c.rows() << "x" << b.cols();
    throw ConfigError(os.str());
  }
}

MatrixXd resolve_skip(const MatrixXd& f, bool skip_identity, Eigen::Index n_y,
                      Eigen::Index n_u) {
  if (skip_identity) return MatrixXd::Identity(n_y, n_u);
  return f;
}

}  // namespace

DiagDiscretization discretize(const VectorXcd& lambda_c, const MatrixXcd& b_c,
                              const VectorXd& gamma, double tau,
                              DiscretizationMethod method,
                              bool allow_unstable) {
  const Eigen::Index n = lambda_c.size();
  if (b_c.rows() != n)
    throw ConfigError("discretize: input matrix rows must match the spectrum");
  if (gamma.size() != n)
    throw ConfigError("discretize: timescale size must match the spectrum");
  if (!(tau > 0.0)) throw ConfigError("discretize: tau must be positive");
  if ((gamma.array() <= 0.0).any())
    throw ConfigError("discretize: timescales must be positive");
  if (method == DiscretizationMethod::ForwardEuler && !allow_unstable)
    throw ConfigError(
        "forward Euler does not preserve stability; pass the unstable "
        "override to use it anyway");

  DiagDiscretization out;
  out.lambda_d.resize(n);
  out.b_d.resize(n, b_c.cols());
  for (Eigen::Index j = 0; j < n; ++j) {
    const cd lp = gamma[j] * lambda_c[j];
    const auto bp = gamma[j] * b_c.row(j);
    switch (method) {
      case DiscretizationMethod::Zoh: {
        const cd w = tau * lp;
        const cd ld = std::exp(w);
        cd coef;
        if (std::abs(w) < 1e-6) {
          // series of (exp(w)-1)/lp = tau*(1 + w/2 + w^2/6 + ...)
          coef = tau * (1.0 + w / 2.0 + w * w / 6.0);
        } else {
          coef = (ld - 1.0) / lp;
        }
        out.lambda_d[j] = ld;
        out.b_d.row(j) = coef * bp;
        break;
      }
      case DiscretizationMethod::Bilinear: {
        const cd den = 1.0 - (tau / 2.0) * lp;
        if (std::abs(den) < 1e-300)
          throw NumericError("bilinear discretization hit its pole");
        out.lambda_d[j] = (1.0 + (tau / 2.0) * lp) / den;
        out.b_d.row(j) = (tau / den) * bp;
        break;
      }
      case DiscretizationMethod::ForwardEuler: {
        out.lambda_d[j] = 1.0 + tau * lp;
        out.b_d.row(j) = tau * bp;
        break;
      }
    }
  }
  if (!allow_unstable) {
    const double rho = out.lambda_d.cwiseAbs().maxCoeff();
    if (rho >= 1.0) {
      std::ostringstream os;
      os << "discretization left the unit disk (spectral radius " << rho << ")";
      throw NumericError(os.str());
    }
  }
  return out;
}

DiscreteLti lru_realize(const LruParams& p) {
  const Eigen::Index n = p.n_lambda();
  if (p.theta.size() != n)
    throw ConfigError("lru: phase vector size must match the modulus vector");
  check_layer_dims(n, p.b_check, p.c_tilde, p.f, p.skip_identity, "lru");
  if (p.d.rows() != p.n_y() || p.d.cols() != p.n_u())
    throw ConfigError("lru: feedthrough matrix dimensions do not match");

  DiscreteLti out;
  out.structure = LtiStructure::Diagonal;
  VectorXcd lam(n);
  VectorXd gam(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double nu = std::exp(p.mu[j]);
    const double phase = std::exp(p.theta[j]);
    lam[j] = std::exp(cd(-nu, phase));
    const double mod2 = std::exp(-2.0 * nu);
    gam[j] = std::sqrt(1.0 - mod2);
  }
  out.a = lam.asDiagonal();
  out.b = gam.asDiagonal() * p.b_check;
  out.c = p.c_tilde;
  out.d = p.d;
  out.f = resolve_skip(p.f, p.skip_identity, p.n_y(), p.n_u());
  return out;
}

DiscreteLti ct_diag_realize(const CtDiagParams& p, DiscretizationMethod method,
                            bool allow_unstable) {
  const Eigen::Index n = p.n_lambda();
  if (p.alpha_im.size() != n)
    throw ConfigError("ct_diag: imaginary exponent size must match");
  if (p.log_gamma.size() != n)
    throw ConfigError("ct_diag: timescale size must match the spectrum");
  check_layer_dims(n, p.b_c, p.c_c, p.f, p.skip_identity, "ct_diag");

  VectorXcd lam_c(n);
  for (Eigen::Index j = 0; j < n; ++j)
    lam_c[j] = cd(-std::exp(p.alpha_re[j]), std::exp(p.alpha_im[j]));
  const VectorXd gamma = p.log_gamma.array().exp();
  DiagDiscretization dd = discretize(lam_c, p.b_c, gamma, p.tau, method,
                                     allow_unstable);

  DiscreteLti out;
  out.structure = LtiStructure::Diagonal;
  out.a = dd.lambda_d.asDiagonal();
  out.b = dd.b_d;
  out.c = p.c_c;
  out.d = MatrixXd::Zero(p.n_y(), p.n_u());
  out.f = resolve_skip(p.f, p.skip_identity, p.n_y(), p.n_u());
  return out;
}

DplrRealization dplr_realize(const DplrParams& p, DiscretizationMethod method,
                             bool allow_unstable) {
  const Eigen::Index n = p.n_lambda();
  if (p.alpha_im.size() != n)
    throw ConfigError("dplr: imaginary part size must match");
  if (p.p.rows() != n)
    throw ConfigError("dplr: low-rank factor rows must match the spectrum");
  check_layer_dims(n, p.b_c, p.c_c, p.f, p.skip_identity, "dplr");
  const MatrixXcd& q = p.q_equals_p ? p.p : p.q;
  if (q.rows() != n || q.cols() != p.p.cols())
    throw ConfigError("dplr: low-rank factors must have equal shapes");
  if (!(p.epsilon > 0.0)) throw ConfigError("dplr: epsilon must be positive");
  if (!(p.tau > 0.0)) throw ConfigError("dplr: tau must be positive");
  if (method == DiscretizationMethod::ForwardEuler && !allow_unstable)
    throw ConfigError(
        "forward Euler does not preserve stability; pass the unstable "
        "override to use it anyway");

  VectorXcd lam_c(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double re = std::max(0.0, p.alpha_re[j]) + p.epsilon;
    lam_c[j] = cd(-re, p.alpha_im[j]);
  }
  const double gamma = std::exp(p.log_gamma);
  const MatrixXcd a_eff =
      gamma * (MatrixXcd(lam_c.asDiagonal()) - p.p * q.adjoint());
  const MatrixXcd b_eff = gamma * p.b_c;
  const MatrixXcd eye = MatrixXcd::Identity(n, n);

  DplrRealization out;
  out.dense.structure = LtiStructure::Dense;
  out.dense.c = p.c_c;
  out.dense.d = MatrixXd::Zero(p.n_y(), p.n_u());
  out.dense.f = resolve_skip(p.f, p.skip_identity, p.n_y(), p.n_u());

  switch (method) {
    case DiscretizationMethod::Zoh: {
      out.dense.a = (p.tau * a_eff).exp();
      out.dense.b = a_eff.lu().solve((out.dense.a - eye) * b_eff);
      break;
    }
    case DiscretizationMethod::Bilinear: {
      const MatrixXcd m = eye - (p.tau / 2.0) * a_eff;
      Eigen::PartialPivLU<MatrixXcd> lu(m);
      out.dense.a = lu.solve(eye + (p.tau / 2.0) * a_eff);
      out.dense.b = p.tau * lu.solve(b_eff);
      TransferHandle h;
      h.lambda_c = lam_c;
      h.p = p.p;
      h.q = q;
      h.b_c = p.b_c;
      h.c_c = p.c_c;
      h.gamma = gamma;
      h.tau = p.tau;
      out.transfer = std::move(h);
      break;
    }
    case DiscretizationMethod::ForwardEuler: {
      out.dense.a = eye + p.tau * a_eff;
      out.dense.b = p.tau * b_eff;
      break;
    }
  }
  if (!allow_unstable) {
    const double rho = out.dense.spectral_radius();
    if (rho >= 1.0) {
      std::ostringstream os;
      os << "dplr discretization left the unit disk (spectral radius " << rho
         << ")";
      throw NumericError(os.str());
    }
  }
  return out;
}

namespace {

cd map_eigenvalue(cd lam_eff, double tau, DiscretizationMethod method) {
  switch (method) {
    case DiscretizationMethod::Zoh:
      return std::exp(tau * lam_eff);
    case DiscretizationMethod::Bilinear:
      return (1.0 + (tau / 2.0) * lam_eff) / (1.0 - (tau / 2.0) * lam_eff);
    case DiscretizationMethod::ForwardEuler:
      return 1.0 + tau * lam_eff;
  }
  return cd(0.0, 0.0);
}

SpectrumEntry make_ct_entry(cd lam_eff, double tau,
                            DiscretizationMethod method) {
  SpectrumEntry e;
  e.lambda_c = lam_eff;
  e.lambda_d = map_eigenvalue(lam_eff, tau, method);
  e.modulus = std::abs(e.lambda_d);
  e.arg = std::arg(e.lambda_d);
  e.beyond_nyquist = std::abs(lam_eff.imag()) > M_PI / tau;
  return e;
}

}  // namespace

std::vector<SpectrumEntry> spectrum_report(const SslParams& params,
                                           DiscretizationMethod method) {
  std::vector<SpectrumEntry> out;
  if (const auto* lru = std::get_if<LruParams>(&params)) {
    const DiscreteLti lti = lru_realize(*lru);
    const VectorXcd lam = lti.a.diagonal();
    out.reserve(static_cast<std::size_t>(lam.size()));
    for (Eigen::Index j = 0; j < lam.size(); ++j) {
      SpectrumEntry e;
      e.lambda_d = lam[j];
      e.modulus = std::abs(lam[j]);
      e.arg = std::arg(lam[j]);
      out.push_back(e);
    }
  } else if (const auto* ctd = std::get_if<CtDiagParams>(&params)) {
    out.reserve(static_cast<std::size_t>(ctd->n_lambda()));
    for (Eigen::Index j = 0; j < ctd->n_lambda(); ++j) {
      const cd lam_c(-std::exp(ctd->alpha_re[j]), std::exp(ctd->alpha_im[j]));
      const cd lam_eff = std::exp(ctd->log_gamma[j]) * lam_c;
      out.push_back(make_ct_entry(lam_eff, ctd->tau, method));
    }
  } else if (const auto* dplr = std::get_if<DplrParams>(&params)) {
    const Eigen::Index n = dplr->n_lambda();
    VectorXcd lam_c(n);
    for (Eigen::Index j = 0; j < n; ++j) {
      const double re = std::max(0.0, dplr->alpha_re[j]) + dplr->epsilon;
      lam_c[j] = cd(-re, dplr->alpha_im[j]);
    }
    const MatrixXcd& q = dplr->q_equals_p ? dplr->p : dplr->q;
    const MatrixXcd a_eff = std::exp(dplr->log_gamma) *
                            (MatrixXcd(lam_c.asDiagonal()) -
                             dplr->p * q.adjoint());
    Eigen::ComplexEigenSolver<MatrixXcd> es(a_eff, false);
    out.reserve(static_cast<std::size_t>(n));
    for (Eigen::Index j = 0; j < n; ++j)
      out.push_back(make_ct_entry(es.eigenvalues()[j], dplr->tau, method));
  }
  return out;
}

const char* parametrization_name(const SslParams& params) {
  if (std::holds_alternative<LruParams>(params)) return "lru";
  if (std::holds_alternative<CtDiagParams>(params)) return "ct_diag";
  return "dplr";
}

}  // namespace ssm
