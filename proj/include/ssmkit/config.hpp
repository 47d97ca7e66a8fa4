#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ssmkit/data.hpp"
#include "ssmkit/init.hpp"
#include "ssmkit/model.hpp"
#include "ssmkit/train.hpp"

namespace ssm {

enum class InitKind { Ring, Hippo };

struct InitConfig {
  InitKind kind = InitKind::Ring;
  // Ring bounds. Discrete rings use (r, theta) on the unit disk; continuous
  // rings are scaled by tau inside the initializer.
  double r_min = 0.05, r_max = 0.975;
  double theta_min = 0.0, theta_max = 2.0 * 3.14159265358979323846;
  // Gamma policy: fixed value, or log-uniform in [gamma_min, gamma_max].
  std::optional<double> gamma;
  std::optional<double> gamma_min, gamma_max;
  NyquistMode nyquist = NyquistMode::Warn;
};

struct ModelConfig {
  std::string parametrization = "lru";  // "lru" | "ct_diag" | "dplr"
  int n_layers = 4;
  Eigen::Index n_lambda = 10;
  Eigen::Index n_u = 1;
  Eigen::Index n_y = 1;
  Eigen::Index inter_size = 4;  // width between layers
  std::string activation = "elu";
  std::string discretization = "zoh";
  bool allow_forward_euler = false;
  double tau = 1.0;
  Eigen::Index dplr_rank = 1;
  InitConfig init;
};

struct DataConfig {
  std::vector<std::string> train_files, val_files, test_files;
  Eigen::Index n_u = 1;
  Eigen::Index n_y = 1;
  double tau = 1.0;
  Eigen::Index subseq_length = 0;  // 0 = use whole sequences
  Eigen::Index subseq_count = 0;
  std::string subseq_policy = "stride";  // "stride" | "disjoint"
  bool normalize = true;
  double unit_scale = 1.0;  // RMSE reporting multiplier
  // Synthetic source used when no files are given.
  bool synth = false;
  int synth_order = 2;
  std::string synth_nonlinearity = "tanh";
  Eigen::Index synth_T = 2048;
  Eigen::Index synth_n_train = 8;
  Eigen::Index synth_n_val = 2;
  Eigen::Index synth_n_test = 2;
  double synth_noise_std = 0.01;
};

struct TrainSection {
  double lr = 3e-3;
  int max_epochs = 2750;
  Eigen::Index batch_size = 40;
  int plateau_patience = 30;
  double plateau_factor = 0.8;
  int early_stop_patience = 150;
  std::string engine = "scan";
  int log_every = 1;
};

struct EvalWindow {
  Eigen::Index start = 0;
  Eigen::Index end = -1;  // -1 = sequence length
};

struct RunConfig {
  std::uint64_t seed = 1;
  ModelConfig model;
  DataConfig data;
  TrainSection train;
  std::vector<EvalWindow> eval_windows;

  void validate() const;  // throws ConfigError
};

/// Strict JSON loading: unknown keys anywhere raise ConfigError naming the
/// offending path. Missing keys keep their defaults.
RunConfig load_config(const std::string& path);
RunConfig parse_config(const std::string& json_text);
std::string resolved_config_json(const RunConfig& cfg);  // full echo

TrainConfig make_train_config(const RunConfig& cfg);

/// Draws a fresh model from the configured initializer. Layer widths run
/// n_u -> inter -> ... -> inter -> n_y; square layers get the fixed identity
/// skip, the rest a trainable skip matrix.
ParamModel build_model(const ModelConfig& mc, std::uint64_t seed);

/// Loads CSV or synthetic data per the config, without normalization.
Dataset build_dataset(const DataConfig& dc, std::uint64_t seed);

Engine parse_engine(const std::string& name);
ActivationKind parse_activation(const std::string& name);
DiscretizationMethod parse_discretization(const std::string& name);

}  // namespace ssm
