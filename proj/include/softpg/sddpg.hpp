#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "softpg/config.hpp"
#include "softpg/losses.hpp"
#include "softpg/mlp.hpp"
#include "softpg/policy.hpp"
#include "softpg/rng.hpp"

namespace softpg {

struct ReplayTransition {
  Eigen::VectorXd state;
  Eigen::VectorXd action;  // env units
  double reward = 0.0;
  Eigen::VectorXd next_state;
  bool done = false;
};

// Fixed-capacity ring with FIFO eviction and uniform sampling.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(long capacity);
  void push(ReplayTransition tr);
  long size() const { return static_cast<long>(data_.size()); }
  long capacity() const { return capacity_; }
  const ReplayTransition& at(long i) const { return data_[i]; }
  std::vector<long> sample_indices(int n, Rng& rng) const;

 private:
  std::vector<ReplayTransition> data_;
  long capacity_;
  long cursor_ = 0;
};

// Ascent gradient of mean_i [ min(q1,q2)(s_i, a_theta(s_i)) -
// alpha log pi_theta(a_theta(s_i)|s_i) ] with a_theta the reparametrized
// squashed sample built from the supplied noise. Returns the mean objective;
// mean_logp (when non-null) receives the batch mean log-density of the fresh
// samples.
double sddpg_policy_gradient(const GaussianHead& policy, const Mlp& q1,
                             const Mlp& q2,
                             const std::vector<const ReplayTransition*>& batch,
                             const std::vector<Eigen::VectorXd>& noise,
                             double alpha, GaussianGrad* grad,
                             double* mean_logp = nullptr);

// The same update written the SAC1 way: descend mean alpha log pi - min q,
// then negate into an ascent gradient. Kept as a separate code path so the
// two derivations can be compared gradient-for-gradient.
double sac1_policy_gradient(const GaussianHead& policy, const Mlp& q1,
                            const Mlp& q2,
                            const std::vector<const ReplayTransition*>& batch,
                            const std::vector<Eigen::VectorXd>& noise,
                            double alpha, GaussianGrad* grad,
                            double* mean_logp = nullptr);

struct SddpgUpdateMetrics {
  double q1_loss = 0.0;
  double q2_loss = 0.0;
  double policy_objective = 0.0;
  double entropy_estimate = 0.0;  // -mean log pi of the fresh samples
  double alpha = 0.0;
};

// Twin-Q soft actor-critic style updater: Q nets regress to
// r + gamma (1-done) (min target Q(s',a') - alpha log pi(a'|s')),
// the policy ascends the reparametrized objective, targets track by Polyak
// averaging.
class SddpgUpdater {
 public:
  SddpgUpdater(int obs_dim, int act_dim, const Eigen::VectorXd& act_low,
               const Eigen::VectorXd& act_high, const RunConfig& cfg,
               Rng& init_rng);

  // One gradient step on a minibatch; std::nullopt when the buffer is still
  // short of one batch (wait state).
  std::optional<SddpgUpdateMetrics> update(const ReplayBuffer& buffer,
                                           Rng& rng);

  GaussianHead& policy() { return policy_; }
  const GaussianHead& policy() const { return policy_; }
  Mlp& q1() { return q1_; }
  Mlp& q2() { return q2_; }
  Mlp& q1_target() { return q1_target_; }
  Mlp& q2_target() { return q2_target_; }
  const Mlp& q1_target() const { return q1_target_; }
  const Mlp& q2_target() const { return q2_target_; }
  double alpha() const { return auto_alpha_ ? alpha_state_.alpha() : alpha_; }
  AlphaState& alpha_state() { return alpha_state_; }

 private:
  RunConfig cfg_;
  GaussianHead policy_;
  Mlp q1_, q2_, q1_target_, q2_target_;
  AdamState policy_opt_, q1_opt_, q2_opt_;
  double alpha_;
  bool auto_alpha_;
  double target_entropy_;
  AlphaState alpha_state_;
};

}  // namespace softpg
