#pragma once

#include <string>
#include <vector>

#include "ssmkit/params.hpp"

namespace ssm {

/// Trainable model: per-layer parameter blocks plus the shared activation and
/// discretization method. Realization into an SsModel happens on demand (and
/// inside every loss/gradient evaluation, so timescales and normalization
/// factors are differentiated, not frozen).
struct ParamModel {
  std::vector<SslParams> layers;
  Activation activation;
  DiscretizationMethod method = DiscretizationMethod::Zoh;
  bool allow_forward_euler = false;

  Eigen::Index n_u() const;
  Eigen::Index n_y() const;
  void validate() const;
};

SsModel realize_model(const ParamModel& m);

/// One named span of the flat parameter vector; complex blocks are stored as
/// interleaved (re, im) pairs, row-major.
struct ParamBlock {
  std::string name;  // e.g. "layer2.c_tilde"
  Eigen::Index offset = 0;
  Eigen::Index size = 0;
};

struct FlatLayout {
  std::vector<ParamBlock> blocks;
  Eigen::Index total = 0;

  /// Name of the block containing flat index i (diagnostics).
  const ParamBlock& block_of(Eigen::Index i) const;
};

FlatLayout flat_layout(const ParamModel& m);
VectorXd pack(const ParamModel& m);
/// Writes theta back into a copy of the prototype (shapes/flags from it).
ParamModel unpack(const ParamModel& prototype, const VectorXd& theta);

}  // namespace ssm
