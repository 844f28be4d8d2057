#pragma once

#include <Eigen/Dense>

#include "softpg/env.hpp"

namespace softpg {

// Trajectory plus the per-step arrays the policy/value losses consume.
// Arrays are aligned with traj.steps; only the final step may be terminal.
struct AugmentedTrajectory {
  Trajectory traj;
  Eigen::VectorXd r_int;          // alpha * H(pi(.|s_t))
  Eigen::VectorXd r_total;        // r_ext + r_int
  Eigen::VectorXd values;         // V(s_t), filled by the caller
  Eigen::VectorXd rewards_to_go;  // filled by compute_returns
  Eigen::VectorXd advantages;     // filled by the chosen advantage estimator
};

// Entropy bonus at every visited state (the absorbing terminal never
// appears as an s_t, so it gets none).
AugmentedTrajectory augment_rewards(Trajectory traj,
                                    const Eigen::VectorXd& state_entropies,
                                    double alpha);
AugmentedTrajectory augment_rewards(Trajectory traj, const Policy& policy,
                                    double alpha);

// R_t = sum_{k=t}^{T-1} gamma^{k-t} r_k + gamma^{T-t} V(s_T) (1 - done).
Eigen::VectorXd rewards_to_go(const AugmentedTrajectory& aug, double gamma);

// A_t = R_t - V(s_t).
Eigen::VectorXd n_step_advantage(const AugmentedTrajectory& aug, double gamma);

// A_t = sum_k (gamma*lambda)^k delta_{t+k},
// delta_t = r_t + gamma V(s_{t+1}) - V(s_t), bootstrapped at truncation.
Eigen::VectorXd gae(const AugmentedTrajectory& aug, double gamma,
                    double lambda);

}  // namespace softpg
