#pragma once

#include <Eigen/Core>
#include <cmath>

namespace ssm {

enum class ActivationKind { Tanh, Elu, Swish };

/// Element-wise Lipschitz output nonlinearity. Lipschitz constants: 1 for
/// Tanh and Elu (alpha <= 1), ~1.0998 for Swish.
struct Activation {
  ActivationKind kind = ActivationKind::Elu;
  double elu_alpha = 1.0;

  double operator()(double x) const {
    switch (kind) {
      case ActivationKind::Tanh:
        return std::tanh(x);
      case ActivationKind::Elu:
        return x > 0.0 ? x : elu_alpha * std::expm1(x);
      case ActivationKind::Swish:
        return x / (1.0 + std::exp(-x));
    }
    return x;
  }

  double derivative(double x) const {
    switch (kind) {
      case ActivationKind::Tanh: {
        const double t = std::tanh(x);
        return 1.0 - t * t;
      }
      case ActivationKind::Elu:
        return x > 0.0 ? 1.0 : elu_alpha * std::exp(x);
      case ActivationKind::Swish: {
        const double s = 1.0 / (1.0 + std::exp(-x));
        return s * (1.0 + x * (1.0 - s));
      }
    }
    return 1.0;
  }

  Eigen::VectorXd apply(const Eigen::VectorXd& v) const {
    return v.unaryExpr([this](double x) { return (*this)(x); });
  }

  Eigen::MatrixXd apply(const Eigen::MatrixXd& m) const {
    return m.unaryExpr([this](double x) { return (*this)(x); });
  }
};

}  // namespace ssm
