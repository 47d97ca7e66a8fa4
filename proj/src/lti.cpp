#include "ssmkit/lti.hpp"

#include <Eigen/Eigenvalues>
#include <sstream>

#include "ssmkit/engines.hpp"
#include "ssmkit/errors.hpp"

namespace ssm {

VectorXcd DiscreteLti::eigenvalues() const {
  if (structure == LtiStructure::Diagonal) return a.diagonal();
  Eigen::ComplexEigenSolver<MatrixXcd> es(a, /*computeEigenvectors=*/false);
  return es.eigenvalues();
}

double DiscreteLti::spectral_radius() const {
  return eigenvalues().cwiseAbs().maxCoeff();
}

void DiscreteLti::validate() const {
  const Eigen::Index n = a.rows();
  if (a.cols() != n) throw ConfigError("state matrix must be square");
  if (n == 0) throw ConfigError("state dimension must be positive");
  if (b.rows() != n) {
    std::ostringstream os;
    os << "input matrix has " << b.rows() << " rows, expected " << n;
    throw ConfigError(os.str());
  }
  if (c.cols() != n) {
    std::ostringstream os;
    os << "output matrix has " << c.cols() << " cols, expected " << n;
    throw ConfigError(os.str());
  }
  if (d.rows() != c.rows() || d.cols() != b.cols())
    throw ConfigError("feedthrough matrix dimensions do not match");
  if (f.rows() != c.rows() || f.cols() != b.cols())
    throw ConfigError("skip matrix dimensions do not match");
  if (structure == LtiStructure::Diagonal) {
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j)
        if (i != j && a(i, j) != std::complex<double>(0.0, 0.0))
          throw ConfigError("diagonal layer has off-diagonal state entries");
  }
  if (!a.allFinite() || !b.allFinite() || !c.allFinite() || !d.allFinite() ||
      !f.allFinite())
    throw NumericError("layer contains non-finite entries");
  const double rho = spectral_radius();
  if (rho >= 1.0) {
    std::ostringstream os;
    os << "layer is not Schur stable: spectral radius " << rho;
    throw NumericError(os.str());
  }
}

void SsLayer::validate() const {
  lti.validate();
  if (skip_identity) {
    if (lti.n_u() != lti.n_y())
      throw ConfigError("identity skip requires matching layer width");
    if (!lti.f.isIdentity(0.0))
      throw ConfigError("identity skip flag set but skip matrix is not I");
  }
  if (transfer) {
    if (transfer->lambda_c.size() != lti.n_lambda())
      throw ConfigError("transfer handle dimension mismatch");
    if (transfer->tau <= 0.0) throw ConfigError("transfer tau must be positive");
  }
}

void SsModel::validate() const {
  if (layers.empty()) throw ConfigError("model has no layers");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    layers[l].validate();
    if (l > 0 && layers[l].lti.n_u() != layers[l - 1].lti.n_y()) {
      std::ostringstream os;
      os << "layer " << l << " expects " << layers[l].lti.n_u()
         << " inputs but layer " << l - 1 << " emits "
         << layers[l - 1].lti.n_y();
      throw ConfigError(os.str());
    }
  }
}

FullSystem assemble_conjugate(const DiscreteLti& half) {
  const Eigen::Index n = half.n_lambda();
  FullSystem full;
  full.a = MatrixXcd::Zero(2 * n, 2 * n);
  full.a.topLeftCorner(n, n) = half.a;
  full.a.bottomRightCorner(n, n) = half.a.conjugate();
  full.b.resize(2 * n, half.n_u());
  full.b.topRows(n) = half.b;
  full.b.bottomRows(n) = half.b.conjugate();
  full.c.resize(half.n_y(), 2 * n);
  full.c.leftCols(n) = half.c;
  full.c.rightCols(n) = half.c.conjugate();
  return full;
}

std::pair<ComplexState, VectorXd> ssl_step(const SsLayer& layer,
                                           const ComplexState& x,
                                           const VectorXd& u) {
  const DiscreteLti& s = layer.lti;
  ComplexState next;
  if (s.structure == LtiStructure::Diagonal)
    next.x = s.a.diagonal().cwiseProduct(x.x) + s.b * u;
  else
    next.x = s.a * x.x + s.b * u;
  VectorXd eta = 2.0 * (s.c * x.x).real() + s.d * u;
  VectorXd y = layer.activation.apply(eta) + s.f * u;
  return {std::move(next), std::move(y)};
}

MatrixXd ssm_forward(const SsModel& model, const MatrixXd& u_seq,
                     Engine engine) {
  if (u_seq.cols() != model.n_u())
    throw DataError("input sequence channel count does not match the model");
  MatrixXd signal = u_seq;
  for (const SsLayer& layer : model.layers)
    signal = engine == Engine::Scan ? scan_forward(layer, signal)
                                    : simulate(layer, signal, engine).y;
  return signal;
}

}  // namespace ssm
