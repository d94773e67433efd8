#include "trainer.hpp"

#include <chrono>
#include <cmath>
#include <string>

#include "error.hpp"

namespace tpn {

void validate_train_config(const TrainConfig& c) {
  require(c.max_steps >= 0, "max_steps must be >= 0");
  require(c.learning_rate > 0.0 && std::isfinite(c.learning_rate), "learning_rate must be positive");
  require(c.lr_decay_factor > 0.0 && c.lr_decay_factor <= 1.0, "lr_decay_factor must lie in (0, 1]");
  require(c.lr_decay_every >= 1, "lr_decay_every must be >= 1");
  require(c.adam_beta1 >= 0.0 && c.adam_beta1 < 1.0, "adam_beta1 must lie in [0, 1)");
  require(c.adam_beta2 >= 0.0 && c.adam_beta2 < 1.0, "adam_beta2 must lie in [0, 1)");
  require(c.adam_eps > 0.0, "adam_eps must be positive");
  require(c.log_every >= 1, "log_every must be >= 1");
  require(c.checkpoint_every >= 0, "checkpoint_every must be >= 0");
  require(c.threads >= 1, "threads must be >= 1");
}

AdamState AdamState::zeros_like(const NetworkParams& params) {
  return AdamState{GradientBuffer::zeros_like(params), GradientBuffer::zeros_like(params), 0};
}

double scheduled_learning_rate(const TrainConfig& config, long step) {
  if (config.lr_decay_factor == 1.0) return config.learning_rate;
  return config.learning_rate * std::pow(config.lr_decay_factor, static_cast<double>(step / config.lr_decay_every));
}

void adam_step(NetworkParams& params, const GradientBuffer& grads, AdamState& state, const TrainConfig& config,
               double learning_rate) {
  ++state.step;
  const double b1 = config.adam_beta1;
  const double b2 = config.adam_beta2;
  const double correction1 = 1.0 - std::pow(b1, static_cast<double>(state.step));
  const double correction2 = 1.0 - std::pow(b2, static_cast<double>(state.step));

  auto update = [&](auto& p, const auto& g, auto& m, auto& v) {
    m.array() = b1 * m.array() + (1.0 - b1) * g.array();
    v.array() = b2 * v.array() + (1.0 - b2) * g.array().square();
    p.array() -= learning_rate * (m.array() / correction1) / ((v.array() / correction2).sqrt() + config.adam_eps);
  };
  for (std::size_t l = 0; l < params.num_layers(); ++l) {
    update(params.weights[l], grads.weights[l], state.first_moment.weights[l], state.second_moment.weights[l]);
    update(params.biases[l], grads.biases[l], state.first_moment.biases[l], state.second_moment.biases[l]);
  }
  for (std::size_t l = 0; l < params.num_layers(); ++l) {
    if (!params.weights[l].allFinite() || !params.biases[l].allFinite()) {
      fail(ErrorCode::non_finite, "adam_step: non-finite update in layer " + std::to_string(l) + " at step " +
                                      std::to_string(state.step));
    }
  }
}

TrainResult train(const TransportProblem& problem, const CollocationSet& set, NetworkParams init_params,
                  const TrainConfig& config, const CheckpointSink& on_checkpoint, const RecordSink& on_record) {
  validate_train_config(config);
  validate_params(init_params);

  TrainResult result;
  result.params = std::move(init_params);
  AdamState state = AdamState::zeros_like(result.params);
  GradientBuffer grad = GradientBuffer::zeros_like(result.params);
  const auto start = std::chrono::steady_clock::now();

  for (long step = 0;; ++step) {
    const bool last = step == config.max_steps;
    LossParts parts;
    bool finite = true;
    try {
      parts = last ? loss_total(result.params, problem, set, config.threads)
                   : loss_and_gradient(result.params, problem, set, grad, config.threads);
      finite = std::isfinite(parts.total);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::non_finite) throw;
      finite = false;
      parts.total = parts.ge = parts.ic = parts.bc = std::nan("");
    }
    const bool reached = finite && config.target_loss && parts.total <= *config.target_loss;
    const bool checkpoint = config.checkpoint_every > 0 && step % config.checkpoint_every == 0;
    if (step % config.log_every == 0 || checkpoint || last || reached || !finite) {
      TrainRecord record{step, parts,
                         std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count()};
      result.history.push_back(record);
      if (on_record) on_record(record);
    }
    if (!finite) fail(ErrorCode::non_finite, "non-finite loss at step " + std::to_string(step));
    if (checkpoint && on_checkpoint) on_checkpoint(step, result.params);
    if (reached) {
      result.reached_target = true;
      break;
    }
    if (last) break;
    adam_step(result.params, grad, state, config, scheduled_learning_rate(config, step));
  }
  return result;
}

}  // namespace tpn
