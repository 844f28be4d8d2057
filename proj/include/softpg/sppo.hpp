#pragma once

#include <memory>
#include <vector>

#include "softpg/config.hpp"
#include "softpg/env.hpp"
#include "softpg/estimators.hpp"
#include "softpg/losses.hpp"

namespace softpg {

struct IterationMetrics {
  long iteration = 0;
  long env_steps = 0;
  double batch_return = 0.0;  // mean external return of completed episodes
  long episodes = 0;
  double mean_entropy = 0.0;
  double policy_loss = 0.0;  // negated surrogate objective
  double value_loss = 0.0;
  double clip_fraction = 0.0;
  double alpha = 0.0;
};

// On-policy trainer behind Algorithm-1-style iterations: collect a horizon
// batch, estimate advantages on entropy-augmented rewards, run minibatched
// policy/value updates. Handles algo = sppo (either loss scheme), the ppo
// alpha=0 baseline, and vanilla spg (single full-batch policy step).
//
// Rollouts fan out over `n_workers`, each with its own env instance and
// private rng streams; trajectories merge in worker order so runs reproduce
// regardless of thread scheduling.
class OnPolicyTrainer {
 public:
  OnPolicyTrainer(const RunConfig& cfg, int n_workers = 1);

  IterationMetrics run_iteration();

  long iteration() const { return iteration_; }
  long env_steps() const { return env_steps_; }
  double alpha() const;
  Policy& policy() { return *policy_; }
  const Policy& policy() const { return *policy_; }
  Mlp& value_net() { return value_net_; }
  const RunConfig& config() const { return cfg_; }
  const Env& env() const { return *proto_env_; }
  // States visited in the most recent batch (diagnostics).
  const std::vector<Eigen::VectorXd>& last_batch_states() const {
    return last_states_;
  }

 private:
  struct Worker {
    std::unique_ptr<Env> env;
    Rng env_rng;
    Rng sample_rng;
    int budget = 0;
  };

  std::vector<Trajectory> collect();
  void policy_update(const Batch& batch, IterationMetrics& metrics);

  RunConfig cfg_;
  LossScheme scheme_;
  std::unique_ptr<Env> proto_env_;
  std::unique_ptr<Policy> policy_;
  Mlp value_net_;
  AdamState policy_opt_;
  AdamState value_opt_;
  AlphaState alpha_state_;
  bool auto_alpha_;
  double target_entropy_;
  std::vector<Worker> workers_;
  Rng shuffle_rng_;
  long iteration_ = 0;
  long env_steps_ = 0;
  std::vector<Eigen::VectorXd> last_states_;
};

}  // namespace softpg
