#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "softpg/env.hpp"

namespace softpg {

// Explicit finite MDP: P[a](s, s') and R[a](s, s').
struct TabularMdp {
  int n_states = 0;
  int n_actions = 0;
  double gamma = 0.0;
  std::vector<Eigen::MatrixXd> P;
  std::vector<Eigen::MatrixXd> R;
  Eigen::VectorXd p0;

  // Throws std::invalid_argument when rows are not distributions (1e-12),
  // rewards are non-finite, or p0 is not a distribution.
  void validate() const;
};

struct ChainRewardSpec {
  int goal_state = -1;  // -1 means the last state
  double goal_reward = 1.0;
  double step_cost = 0.0;
};

// Left/right chain with slip: action 0 moves left, 1 moves right (clamped at
// the ends); with probability slip_prob the move is reversed. Reward is
// step_cost plus goal_reward whenever the landing state is the goal.
// Episodes start at state 0.
TabularMdp make_chain(int n_states, double slip_prob,
                      const ChainRewardSpec& reward, double gamma);

// Plain-text MDP spec: header "|S| |A| gamma", then "s a s' prob reward"
// lines; '#' starts a comment. Every (s,a) row must carry full probability
// mass. The initial distribution is a point mass on state 0.
TabularMdp load_mdp(const std::string& path);
TabularMdp parse_mdp(std::istream& in);

// Episodic wrapper over a TabularMdp with one-hot observations and an
// episode cap (the chain MDPs are continuing, so the cap is the episode).
class TabularEnv final : public Env {
 public:
  explicit TabularEnv(TabularMdp mdp, int episode_cap = 50);

  Eigen::VectorXd reset(Rng& rng) override;
  StepResult step(const Action& a, Rng& rng) override;
  int obs_dim() const override { return mdp_.n_states; }
  bool discrete_actions() const override { return true; }
  int n_actions() const override { return mdp_.n_actions; }
  int max_episode_steps() const override { return cap_; }
  std::unique_ptr<Env> clone() const override {
    return std::make_unique<TabularEnv>(*this);
  }

  int current_state() const { return state_; }
  const TabularMdp& mdp() const { return mdp_; }

 private:
  Eigen::VectorXd one_hot(int s) const;
  TabularMdp mdp_;
  int cap_;
  int state_ = 0;
  int t_ = 0;
  bool live_ = false;
};

}  // namespace softpg
