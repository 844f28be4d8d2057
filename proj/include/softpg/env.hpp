#pragma once

#include <Eigen/Dense>
#include <memory>
#include <string>
#include <vector>

#include "softpg/policy.hpp"
#include "softpg/rng.hpp"

namespace softpg {

struct Transition {
  Eigen::VectorXd state;
  Action action;
  double r_ext = 0.0;
  Eigen::VectorXd next_state;
  bool done = false;
  double log_prob_behavior = 0.0;
};

struct Trajectory {
  std::vector<Transition> steps;
  double bootstrap_value = 0.0;  // V(s_T), filled by the caller when truncated
  bool episode_complete = false;
};

struct StepResult {
  Eigen::VectorXd next_state;
  double r_ext = 0.0;
  bool done = false;
};

// Episodic environment. Instances are independently owned; all randomness
// comes through the rng arguments.
class Env {
 public:
  virtual ~Env() = default;

  virtual Eigen::VectorXd reset(Rng& rng) = 0;
  virtual StepResult step(const Action& a, Rng& rng) = 0;

  virtual int obs_dim() const = 0;
  virtual bool discrete_actions() const = 0;
  virtual int n_actions() const { return 0; }
  virtual int act_dim() const { return 0; }
  virtual Eigen::VectorXd act_low() const { return {}; }
  virtual Eigen::VectorXd act_high() const { return {}; }
  virtual int max_episode_steps() const = 0;

  virtual std::unique_ptr<Env> clone() const = 0;
};

// Classic pendulum swing-up: m=1, l=1, g=10, dt=0.05, torque in [-2,2],
// reward -(theta^2 + 0.1*thetadot^2 + 0.001*u^2), 200-step episodes.
class Pendulum final : public Env {
 public:
  Eigen::VectorXd reset(Rng& rng) override;
  StepResult step(const Action& a, Rng& rng) override;
  int obs_dim() const override { return 3; }
  bool discrete_actions() const override { return false; }
  int act_dim() const override { return 1; }
  Eigen::VectorXd act_low() const override {
    return Eigen::VectorXd::Constant(1, -2.0);
  }
  Eigen::VectorXd act_high() const override {
    return Eigen::VectorXd::Constant(1, 2.0);
  }
  int max_episode_steps() const override { return 200; }
  std::unique_ptr<Env> clone() const override {
    return std::make_unique<Pendulum>(*this);
  }

  void set_state(double theta, double theta_dot);
  double theta() const { return theta_; }
  double theta_dot() const { return theta_dot_; }

  static double normalize_angle(double x);

 private:
  Eigen::VectorXd observation() const;
  double theta_ = 0.0;
  double theta_dot_ = 0.0;
  int t_ = 0;
  bool live_ = false;
};

// Classic pole balancing, two discrete actions, +1 per step, 500-step cap.
class CartPole final : public Env {
 public:
  Eigen::VectorXd reset(Rng& rng) override;
  StepResult step(const Action& a, Rng& rng) override;
  int obs_dim() const override { return 4; }
  bool discrete_actions() const override { return true; }
  int n_actions() const override { return 2; }
  int max_episode_steps() const override { return 500; }
  std::unique_ptr<Env> clone() const override {
    return std::make_unique<CartPole>(*this);
  }

 private:
  Eigen::Vector4d state_ = Eigen::Vector4d::Zero();
  int t_ = 0;
  bool live_ = false;
};

// Resets the environment and collects at most `horizon` transitions,
// stopping early at episode termination. The bootstrap value is left at
// zero; the caller fills it from its value function when the trajectory
// was truncated.
Trajectory rollout(Env& env, const Policy& policy, int horizon, Rng& env_rng,
                   Rng& sample_rng);

// Built-in environments: "pendulum", "cartpole", "chain" (3-state default
// chain), or "mdp:<path>" for a text-spec tabular MDP.
std::unique_ptr<Env> make_env(const std::string& name);

}  // namespace softpg
