#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ssmkit/lti.hpp"

namespace ssm {

enum class Role { Train, Val, Test, Untagged };

struct Sequence {
  MatrixXd u;  // T x n_u
  MatrixXd y;  // T x n_y
  Role role = Role::Untagged;
};

struct NormalizationStats {
  VectorXd u_mean, u_std, y_mean, y_std;
};

struct Dataset {
  std::vector<Sequence> sequences;
  double tau = 1.0;
  std::optional<NormalizationStats> norm;  // set once normalize() ran

  std::vector<const Sequence*> with_role(Role r) const;
  Eigen::Index n_u() const;
  Eigen::Index n_y() const;
};

/// Reads one sequence from a CSV file with n_u input columns followed by n_y
/// output columns. A single non-numeric header line is skipped (with a
/// notice); malformed rows and non-finite values are reported with their
/// coordinates.
Sequence load_csv(const std::string& path, Eigen::Index n_u, Eigen::Index n_y,
                  std::vector<std::string>* notices = nullptr);

enum class SubseqPolicy { Disjoint, Stride };

/// Cuts `count` windows of `length` from one sequence. Disjoint picks among
/// the floor(T/length) grid slots (seed-shuffled when count is smaller);
/// Stride places starts at floor(i*(T-length)/(count-1)) and may overlap.
std::vector<Sequence> extract_subsequences(const Sequence& seq,
                                           Eigen::Index length,
                                           Eigen::Index count,
                                           SubseqPolicy policy,
                                           std::uint64_t seed);

/// Z-scores all roles with statistics computed from the train role only.
NormalizationStats compute_norm_stats(const Dataset& ds);
Dataset normalize(const Dataset& ds);
MatrixXd denormalize_y(const MatrixXd& y_norm, const NormalizationStats& s);
MatrixXd normalize_u(const MatrixXd& u_raw, const NormalizationStats& s);

struct MetricsReport {
  double rmse = 0.0;  // in native units times unit_scale
  double fit = 0.0;   // percent
  Eigen::Index window_start = 0;
  Eigen::Index window_end = 0;  // exclusive
};

/// RMSE and FIT = 100*(1 - ||y-yhat|| / ||y-mean(y)||) over [start, end),
/// computed in de-normalized units. unit_scale rescales RMSE for reporting
/// (1000 for the volt -> mV convention).
MetricsReport metrics(const MatrixXd& y_true, const MatrixXd& y_pred,
                      Eigen::Index start, Eigen::Index end,
                      double unit_scale = 1.0);

/// Ground truth behind a synthetic Wiener dataset: a stable discrete SISO LTI
/// followed by a static nonlinearity, with the clean output normalized to
/// unit RMS so noise_std maps directly to SNR.
struct SynthSystem {
  VectorXcd poles;
  double input_bandwidth = 0.0;  // fraction of Nyquist excited
  std::string nonlinearity;      // "tanh", "cubic" or "identity"
  double pre_gain = 1.0;         // drive into the nonlinearity
  double output_scale = 1.0;     // unit-RMS normalization factor
  double noise_std = 0.0;

  VectorXd simulate_clean(const VectorXd& u) const;
};

struct SynthDataset {
  Dataset data;
  SynthSystem truth;
};

/// Multisine-driven synthetic Wiener generator (order = number of poles,
/// complex-pair for order 2). Deterministic given the seed.
SynthDataset synth_wiener(int order, const std::string& nonlinearity,
                          Eigen::Index T, Eigen::Index n_seq, double noise_std,
                          std::uint64_t seed);

}  // namespace ssm
