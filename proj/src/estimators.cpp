#include "softpg/estimators.hpp"

#include <stdexcept>

namespace softpg {

AugmentedTrajectory augment_rewards(Trajectory traj,
                                    const Eigen::VectorXd& state_entropies,
                                    double alpha) {
  const long n = static_cast<long>(traj.steps.size());
  if (state_entropies.size() != n)
    throw std::invalid_argument("augment_rewards: entropy array length mismatch");
  AugmentedTrajectory aug;
  aug.traj = std::move(traj);
  aug.r_int.resize(n);
  aug.r_total.resize(n);
  for (long t = 0; t < n; ++t) {
    aug.r_int[t] = alpha * state_entropies[t];
    aug.r_total[t] = aug.traj.steps[t].r_ext + aug.r_int[t];
  }
  aug.values = Eigen::VectorXd::Zero(n);
  return aug;
}

AugmentedTrajectory augment_rewards(Trajectory traj, const Policy& policy,
                                    double alpha) {
  const long n = static_cast<long>(traj.steps.size());
  Eigen::VectorXd ent(n);
  for (long t = 0; t < n; ++t) ent[t] = policy.entropy(traj.steps[t].state);
  return augment_rewards(std::move(traj), ent, alpha);
}

Eigen::VectorXd rewards_to_go(const AugmentedTrajectory& aug, double gamma) {
  const long n = aug.r_total.size();
  Eigen::VectorXd out(n);
  const bool done = !aug.traj.steps.empty() && aug.traj.steps.back().done;
  double acc = done ? 0.0 : aug.traj.bootstrap_value;
  for (long t = n - 1; t >= 0; --t) {
    acc = aug.r_total[t] + gamma * acc;
    out[t] = acc;
  }
  return out;
}

Eigen::VectorXd n_step_advantage(const AugmentedTrajectory& aug, double gamma) {
  Eigen::VectorXd rtg = rewards_to_go(aug, gamma);
  return rtg - aug.values;
}

Eigen::VectorXd gae(const AugmentedTrajectory& aug, double gamma,
                    double lambda) {
  const long n = aug.r_total.size();
  Eigen::VectorXd out(n);
  const bool done = !aug.traj.steps.empty() && aug.traj.steps.back().done;
  double adv = 0.0;
  for (long t = n - 1; t >= 0; --t) {
    const double next_v =
        (t == n - 1) ? (done ? 0.0 : aug.traj.bootstrap_value)
                     : aug.values[t + 1];
    const double delta = aug.r_total[t] + gamma * next_v - aug.values[t];
    adv = delta + gamma * lambda * adv;
    out[t] = adv;
  }
  return out;
}

}  // namespace softpg
