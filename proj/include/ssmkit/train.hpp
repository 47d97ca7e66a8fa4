#pragma once

#include <functional>
#include <string>
#include <vector>

#include "ssmkit/data.hpp"
#include "ssmkit/model.hpp"

namespace ssm {

/// Mean squared error over all sequences, time steps and channels.
double mse_loss(const std::vector<const Sequence*>& batch, const SsModel& model,
                Engine engine);

/// Loss plus dL/dtheta in the flat packed layout via reverse-mode
/// accumulation through the sequential recurrence. Works for every
/// parametrization; DPLR requires the bilinear method.
double loss_and_gradient(const ParamModel& model,
                         const std::vector<const Sequence*>& batch,
                         VectorXd& grad);

struct FiniteDiffReport {
  double max_rel_err = 0.0;
  double p95_rel_err = 0.0;
  Eigen::Index worst_index = -1;
  std::string worst_block;
  std::vector<double> rel_errs;  // per checked coordinate
};

/// Central-difference audit of loss_and_gradient on `n_coords` coordinates
/// (all when n_coords <= 0). Relative error uses max(|g_fd|, |g_an|, floor).
FiniteDiffReport finite_diff_check(const ParamModel& model,
                                   const std::vector<const Sequence*>& batch,
                                   double step = 1e-5,
                                   Eigen::Index n_coords = -1,
                                   std::uint64_t seed = 0);

struct AdamState {
  VectorXd m, v;
  std::int64_t t = 0;

  void reset(Eigen::Index n);
};

struct AdamConfig {
  double lr = 3e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// One Adam step with bias correction; lr is read from cfg at call time so a
/// scheduler can change it between steps.
void adam_update(VectorXd& theta, const VectorXd& grad, AdamState& state,
                 const AdamConfig& cfg);

struct PlateauScheduler {
  double factor = 0.8;
  int patience = 30;
  double min_rel_improvement = 1e-12;

  double best = std::numeric_limits<double>::infinity();
  int stall = 0;

  /// Feeds one epoch's training loss; returns true when the learning rate
  /// should be multiplied by `factor` (the stall counter resets on cut).
  bool step(double train_loss);
};

struct EarlyStopper {
  int patience = 150;
  double min_rel_improvement = 1e-12;

  double best = std::numeric_limits<double>::infinity();
  int stall = 0;

  /// Feeds one epoch's validation loss; returns true when training should
  /// stop. improved() tells whether the last fed value was a new best.
  bool step(double val_loss);
  bool improved_last = false;
};

struct TrainConfig {
  AdamConfig adam;
  int max_epochs = 2750;
  Eigen::Index batch_size = 40;
  PlateauScheduler scheduler;
  EarlyStopper stopper;
  Engine forward_engine = Engine::Scan;  // evaluation-only forwards
  std::uint64_t shuffle_seed = 1;
  bool check_stability_each_epoch = true;
  int log_every = 1;
};

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double lr = 0.0;
  double grad_norm = 0.0;
  bool lr_cut = false;
  bool new_best = false;
};

struct TrainResult {
  ParamModel best_model;
  double best_val_loss = std::numeric_limits<double>::infinity();
  int best_epoch = -1;
  int epochs_run = 0;
  bool early_stopped = false;
  std::vector<EpochRecord> history;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Full minibatch training loop: seeded shuffle each epoch, Adam updates,
/// plateau LR cuts on training loss, early stop + best snapshot on
/// validation loss. Throws if a realized layer ever loses Schur stability.
TrainResult train(const ParamModel& init, const Dataset& data,
                  const TrainConfig& cfg, const EpochCallback& on_epoch = {});

}  // namespace ssm
