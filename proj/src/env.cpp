#include "softpg/env.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "softpg/tabular.hpp"

namespace softpg {

namespace {
constexpr double kPi = std::numbers::pi;
}

double Pendulum::normalize_angle(double x) {
  double a = std::remainder(x, 2.0 * kPi);
  if (a <= -kPi) a += 2.0 * kPi;  // ties at pi map to +pi
  return a;
}

Eigen::VectorXd Pendulum::observation() const {
  Eigen::VectorXd obs(3);
  obs << std::cos(theta_), std::sin(theta_), theta_dot_;
  return obs;
}

Eigen::VectorXd Pendulum::reset(Rng& rng) {
  theta_ = rng.uniform(-kPi, kPi);
  theta_dot_ = rng.uniform(-1.0, 1.0);
  t_ = 0;
  live_ = true;
  return observation();
}

void Pendulum::set_state(double theta, double theta_dot) {
  theta_ = theta;
  theta_dot_ = theta_dot;
  t_ = 0;
  live_ = true;
}

StepResult Pendulum::step(const Action& a, Rng& rng) {
  (void)rng;  // dynamics are deterministic
  if (!live_) throw std::logic_error("Pendulum::step after episode end");
  constexpr double g = 10.0, m = 1.0, l = 1.0, dt = 0.05;
  const double u = std::min(std::max(a.cont[0], -2.0), 2.0);
  const double th = normalize_angle(theta_);
  const double cost =
      th * th + 0.1 * theta_dot_ * theta_dot_ + 0.001 * u * u;

  // sin(theta) form rather than -sin(theta + pi): identical algebra, and the
  // upright state stays an exact fixed point in floating point.
  double new_dot = theta_dot_ + (3.0 * g / (2.0 * l) * std::sin(theta_) +
                                 3.0 / (m * l * l) * u) *
                                    dt;
  new_dot = std::min(std::max(new_dot, -8.0), 8.0);
  theta_ = theta_ + new_dot * dt;
  theta_dot_ = new_dot;
  t_ += 1;

  StepResult out;
  out.next_state = observation();
  out.r_ext = -cost;
  out.done = t_ >= max_episode_steps();
  if (out.done) live_ = false;
  return out;
}

Eigen::VectorXd CartPole::reset(Rng& rng) {
  for (int i = 0; i < 4; ++i) state_[i] = rng.uniform(-0.05, 0.05);
  t_ = 0;
  live_ = true;
  return state_;
}

StepResult CartPole::step(const Action& a, Rng& rng) {
  (void)rng;
  if (!live_) throw std::logic_error("CartPole::step after episode end");
  if (a.disc < 0 || a.disc > 1)
    throw std::invalid_argument("CartPole: action must be 0 or 1");
  constexpr double gravity = 9.8, mass_cart = 1.0, mass_pole = 0.1;
  constexpr double total_mass = mass_cart + mass_pole;
  constexpr double length = 0.5;  // half pole length
  constexpr double pole_mass_length = mass_pole * length;
  constexpr double force_mag = 10.0, dt = 0.02;
  constexpr double theta_limit = 12.0 * 2.0 * kPi / 360.0;
  constexpr double x_limit = 2.4;

  double x = state_[0], x_dot = state_[1], th = state_[2], th_dot = state_[3];
  const double force = a.disc == 1 ? force_mag : -force_mag;
  const double cos_th = std::cos(th), sin_th = std::sin(th);
  const double temp =
      (force + pole_mass_length * th_dot * th_dot * sin_th) / total_mass;
  const double th_acc =
      (gravity * sin_th - cos_th * temp) /
      (length * (4.0 / 3.0 - mass_pole * cos_th * cos_th / total_mass));
  const double x_acc = temp - pole_mass_length * th_acc * cos_th / total_mass;

  x += dt * x_dot;
  x_dot += dt * x_acc;
  th += dt * th_dot;
  th_dot += dt * th_acc;
  state_ << x, x_dot, th, th_dot;
  t_ += 1;

  const bool failed = std::abs(x) > x_limit || std::abs(th) > theta_limit;
  StepResult out;
  out.next_state = state_;
  out.r_ext = 1.0;
  out.done = failed || t_ >= max_episode_steps();
  if (out.done) live_ = false;
  return out;
}

Trajectory rollout(Env& env, const Policy& policy, int horizon, Rng& env_rng,
                   Rng& sample_rng) {
  if (horizon < 1) throw std::invalid_argument("rollout: horizon must be >= 1");
  Trajectory traj;
  Eigen::VectorXd state = env.reset(env_rng);
  for (int t = 0; t < horizon; ++t) {
    auto [action, logp] = policy.sample(state, sample_rng);
    Action applied = action;
    if (!env.discrete_actions()) {
      // Unsquashed policies are clamped at the env boundary only here; the
      // stored action and log-prob stay unclamped.
      applied.cont =
          applied.cont.cwiseMax(env.act_low()).cwiseMin(env.act_high());
    }
    StepResult res = env.step(applied, env_rng);
    Transition tr;
    tr.state = state;
    tr.action = action;
    tr.r_ext = res.r_ext;
    tr.next_state = res.next_state;
    tr.done = res.done;
    tr.log_prob_behavior = logp;
    traj.steps.push_back(std::move(tr));
    if (res.done) {
      traj.episode_complete = true;
      break;
    }
    state = res.next_state;
  }
  return traj;
}

std::unique_ptr<Env> make_env(const std::string& name) {
  if (name == "pendulum") return std::make_unique<Pendulum>();
  if (name == "cartpole") return std::make_unique<CartPole>();
  if (name == "chain")
    return std::make_unique<TabularEnv>(
        make_chain(3, 0.1, ChainRewardSpec{}, 0.9));
  if (name.rfind("mdp:", 0) == 0)
    return std::make_unique<TabularEnv>(load_mdp(name.substr(4)));
  throw std::invalid_argument("unknown environment: " + name);
}

}  // namespace softpg
