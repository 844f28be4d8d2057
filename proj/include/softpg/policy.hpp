#pragma once

#include <Eigen/Dense>
#include <variant>
#include <vector>

#include "softpg/mlp.hpp"
#include "softpg/rng.hpp"

namespace softpg {

// How the action standard deviation is produced (schemes 1-4).
enum class SigmaScheme {
  GlobalSigma = 1,
  LocalSigma = 2,
  GlobalTimesLocal = 3,
  GlobalTimesClippedLocal = 4,
};

inline constexpr double kLogSigmaMin = -20.0;
inline constexpr double kLogSigmaMax = 2.0;

struct Action {
  Eigen::VectorXd cont;  // continuous action (env units)
  int disc = -1;         // discrete action index, -1 when continuous
};

// ---------------------------------------------------------------------------
// Gaussian head

struct GaussianGrad {
  GradBuffer net;
  Eigen::VectorXd global_log_sigma;  // zero-sized when scheme has no global part

  void set_zero();
  Eigen::VectorXd flatten() const;
};

// One evaluation of the head at a state; carries what backward needs.
struct GaussianEval {
  MlpTrace trace;
  Eigen::VectorXd mu;
  Eigen::VectorXd local_out;       // raw local head output (schemes 2-4)
  Eigen::VectorXd raw_log_sigma;   // pre-clamp combined log sigma
  Eigen::VectorXd log_sigma;       // after clamp to [kLogSigmaMin, kLogSigmaMax]
  Eigen::VectorXd sigma;
};

// Diagonal Gaussian policy. The mean network carries an extra local log-sigma
// output block for schemes 2-4; schemes 1/3/4 additionally train a global
// log-sigma vector. SDDPG-style heads squash through tanh into the action
// interval with the exact log-det correction; PPO-family heads stay unsquashed
// and are clamped at the environment boundary only.
class GaussianHead {
 public:
  using Eval = GaussianEval;
  using Grad = GaussianGrad;

  GaussianHead(int obs_dim, int act_dim, const std::vector<int>& hidden,
               SigmaScheme scheme, bool squashed, const Eigen::VectorXd& act_low,
               const Eigen::VectorXd& act_high, Rng& rng);

  GaussianEval eval(const Eigen::VectorXd& state) const;

  // Draws act_dim normals from rng; returns action in env units plus log-prob.
  std::pair<Eigen::VectorXd, double> sample(const GaussianEval& ev, Rng& rng) const;

  // Reparametrized sample with externally supplied noise. Returns the
  // pre-squash coordinate u = mu + sigma*eps; action() maps it to env units.
  Eigen::VectorXd rsample_u(const GaussianEval& ev, const Eigen::VectorXd& eps) const;
  Eigen::VectorXd action_from_u(const Eigen::VectorXd& u) const;

  Eigen::VectorXd deterministic_action(const GaussianEval& ev) const;

  double log_prob(const GaussianEval& ev, const Eigen::VectorXd& action) const;
  // Log-prob as a function of the pre-squash coordinate (avoids the atanh
  // round trip when u is already known).
  double log_prob_u(const GaussianEval& ev, const Eigen::VectorXd& u) const;

  // Analytic pre-squash entropy, sum over dims of 0.5*ln(2*pi*e*sigma^2).
  double entropy(const GaussianEval& ev) const;
  // Single-sample estimate -log pi(a~|s); the usable stand-in where the
  // squashed density has no closed-form entropy.
  double entropy_estimate(const GaussianEval& ev, Rng& rng) const;

  // Routes d(scalar)/d(mu) and d(scalar)/d(effective log sigma) through the
  // scheme combination into the parameter gradient.
  void accumulate(const GaussianEval& ev, const Eigen::VectorXd& d_mu,
                  const Eigen::VectorXd& d_log_sigma, GaussianGrad& g) const;

  // Convenience wrappers over accumulate().
  void add_log_prob_grad(const GaussianEval& ev, const Eigen::VectorXd& action,
                         double coeff, GaussianGrad& g) const;
  void add_entropy_grad(const GaussianEval& ev, double coeff, GaussianGrad& g) const;

  GaussianGrad make_grad() const;
  long param_count() const;
  Eigen::VectorXd flatten() const;
  void set_from_flat(const Eigen::VectorXd& flat);

  int obs_dim() const { return net_.in_dim(); }
  int act_dim() const { return act_dim_; }
  SigmaScheme scheme() const { return scheme_; }
  bool squashed() const { return squashed_; }
  bool has_global() const { return scheme_ != SigmaScheme::LocalSigma; }
  const Mlp& net() const { return net_; }
  Mlp& net() { return net_; }
  const Eigen::VectorXd& global_log_sigma() const { return global_log_sigma_; }
  Eigen::VectorXd& global_log_sigma() { return global_log_sigma_; }
  const Eigen::VectorXd& act_low() const { return low_; }
  const Eigen::VectorXd& act_high() const { return high_; }

 private:
  Mlp net_;
  Eigen::VectorXd global_log_sigma_;
  SigmaScheme scheme_;
  bool squashed_;
  int act_dim_;
  Eigen::VectorXd low_, high_, center_, scale_;
};

// ---------------------------------------------------------------------------
// Categorical head

struct CategoricalEval {
  MlpTrace trace;
  Eigen::VectorXd logits;
  Eigen::VectorXd log_probs;
  Eigen::VectorXd probs;
};

class CategoricalHead {
 public:
  using Eval = CategoricalEval;
  using Grad = GradBuffer;

  CategoricalHead(int obs_dim, int n_actions, const std::vector<int>& hidden,
                  Rng& rng);

  CategoricalEval eval(const Eigen::VectorXd& state) const;

  std::pair<int, double> sample(const CategoricalEval& ev, Rng& rng) const;
  int deterministic_action(const CategoricalEval& ev) const;
  double log_prob(const CategoricalEval& ev, int action) const;
  double entropy(const CategoricalEval& ev) const;

  void add_log_prob_grad(const CategoricalEval& ev, int action, double coeff,
                         GradBuffer& g) const;
  void add_entropy_grad(const CategoricalEval& ev, double coeff,
                        GradBuffer& g) const;

  GradBuffer make_grad() const { return net_.make_grad_buffer(); }
  long param_count() const { return net_.param_count(); }
  Eigen::VectorXd flatten() const { return net_.flatten(); }
  void set_from_flat(const Eigen::VectorXd& flat) { net_.set_from_flat(flat); }

  int obs_dim() const { return net_.in_dim(); }
  int n_actions() const { return n_actions_; }
  const Mlp& net() const { return net_; }
  Mlp& net() { return net_; }

 private:
  Mlp net_;
  int n_actions_;
};

// ---------------------------------------------------------------------------
// Uniform policy wrapper used by rollout and evaluation code.

class Policy {
 public:
  explicit Policy(GaussianHead head) : head_(std::move(head)) {}
  explicit Policy(CategoricalHead head) : head_(std::move(head)) {}

  bool discrete() const {
    return std::holds_alternative<CategoricalHead>(head_);
  }
  GaussianHead& gaussian() { return std::get<GaussianHead>(head_); }
  const GaussianHead& gaussian() const { return std::get<GaussianHead>(head_); }
  CategoricalHead& categorical() { return std::get<CategoricalHead>(head_); }
  const CategoricalHead& categorical() const {
    return std::get<CategoricalHead>(head_);
  }

  std::pair<Action, double> sample(const Eigen::VectorXd& state, Rng& rng) const;
  Action deterministic_action(const Eigen::VectorXd& state) const;
  double log_prob(const Eigen::VectorXd& state, const Action& a) const;
  double entropy(const Eigen::VectorXd& state) const;

  long param_count() const;
  Eigen::VectorXd flatten() const;
  void set_from_flat(const Eigen::VectorXd& flat);

 private:
  std::variant<GaussianHead, CategoricalHead> head_;
};

}  // namespace softpg
