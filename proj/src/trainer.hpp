#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "loss.hpp"

namespace tpn {

struct TrainConfig {
  long max_steps = 1000;
  double learning_rate = 1e-3;
  double lr_decay_factor = 1.0;  // 1 disables decay
  long lr_decay_every = 5000;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  std::uint64_t seed = 0;
  long log_every = 100;
  long checkpoint_every = 0;  // 0 disables periodic checkpoints
  std::optional<double> target_loss;
  int threads = 1;
};

void validate_train_config(const TrainConfig& config);

struct TrainRecord {
  long step = 0;
  LossParts loss;
  double wall_time = 0.0;
};

struct AdamState {
  GradientBuffer first_moment;
  GradientBuffer second_moment;
  long step = 0;

  static AdamState zeros_like(const NetworkParams& params);
};

/// Learning rate after `step` completed updates under the decay schedule.
double scheduled_learning_rate(const TrainConfig& config, long step);

/// One bias-corrected Adam update at the given learning rate.
void adam_step(NetworkParams& params, const GradientBuffer& grads, AdamState& state, const TrainConfig& config,
               double learning_rate);

struct TrainResult {
  NetworkParams params;
  std::vector<TrainRecord> history;
  bool reached_target = false;
};

/// Called with (step, params) whenever a periodic checkpoint is due.
using CheckpointSink = std::function<void(long step, const NetworkParams& params)>;
/// Called with every record as it is appended to the history.
using RecordSink = std::function<void(const TrainRecord& record)>;

/// Full-batch Adam on Loss_Total. Record k holds the losses of the
/// parameters after k updates. A non-finite loss throws Error(non_finite)
/// after the offending record was passed to `on_record`.
TrainResult train(const TransportProblem& problem, const CollocationSet& set, NetworkParams init_params,
                  const TrainConfig& config, const CheckpointSink& on_checkpoint = {}, const RecordSink& on_record = {});

}  // namespace tpn
