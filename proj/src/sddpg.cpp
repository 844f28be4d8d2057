#include "softpg/sddpg.hpp"

#include <cmath>
#include <stdexcept>

namespace softpg {

ReplayBuffer::ReplayBuffer(long capacity) : capacity_(capacity) {
  if (capacity < 1) throw std::invalid_argument("ReplayBuffer: bad capacity");
  data_.reserve(static_cast<std::size_t>(capacity));
}

void ReplayBuffer::push(ReplayTransition tr) {
  if (size() < capacity_) {
    data_.push_back(std::move(tr));
  } else {
    data_[cursor_] = std::move(tr);
  }
  cursor_ = (cursor_ + 1) % capacity_;
}

std::vector<long> ReplayBuffer::sample_indices(int n, Rng& rng) const {
  std::vector<long> idx(n);
  for (int i = 0; i < n; ++i) idx[i] = rng.uniform_int(static_cast<int>(size()));
  return idx;
}

double sddpg_policy_gradient(const GaussianHead& policy, const Mlp& q1,
                             const Mlp& q2,
                             const std::vector<const ReplayTransition*>& batch,
                             const std::vector<Eigen::VectorXd>& noise,
                             double alpha, GaussianGrad* grad,
                             double* mean_logp) {
  const int act = policy.act_dim();
  const Eigen::VectorXd scale = 0.5 * (policy.act_high() - policy.act_low());
  double total = 0.0, logp_total = 0.0;
  MlpTrace qtrace;
  Eigen::VectorXd one = Eigen::VectorXd::Ones(1);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const ReplayTransition& tr = *batch[i];
    const auto ev = policy.eval(tr.state);
    const Eigen::VectorXd u = policy.rsample_u(ev, noise[i]);
    const Eigen::VectorXd a = policy.action_from_u(u);

    Eigen::VectorXd x(tr.state.size() + act);
    x << tr.state, a;
    const double q1v = q1.forward(x)[0];
    const double q2v = q2.forward(x)[0];
    const bool use1 = q1v <= q2v;
    const Mlp& qmin_net = use1 ? q1 : q2;
    const double qmin = qmin_net.forward(x, qtrace)[0];
    const Eigen::VectorXd dq_dx = qmin_net.input_gradient(qtrace, one);

    const double logp = policy.log_prob_u(ev, u);
    total += qmin - alpha * logp;
    logp_total += logp;

    if (grad) {
      Eigen::VectorXd d_mu(act), d_ls(act);
      for (int d = 0; d < act; ++d) {
        const double t = std::tanh(u[d]);
        const double da_du = scale[d] * (1.0 - t * t);
        const double du_term =
            dq_dx[tr.state.size() + d] * da_du - alpha * 2.0 * t;
        d_mu[d] = du_term;
        d_ls[d] = du_term * ev.sigma[d] * noise[i][d] + alpha;
      }
      policy.accumulate(ev, d_mu, d_ls, *grad);
    }
  }
  const double n = static_cast<double>(batch.size());
  if (grad && !batch.empty()) detail::scale_grad(*grad, 1.0 / n);
  if (mean_logp) *mean_logp = batch.empty() ? 0.0 : logp_total / n;
  return batch.empty() ? 0.0 : total / n;
}

double sac1_policy_gradient(const GaussianHead& policy, const Mlp& q1,
                            const Mlp& q2,
                            const std::vector<const ReplayTransition*>& batch,
                            const std::vector<Eigen::VectorXd>& noise,
                            double alpha, GaussianGrad* grad,
                            double* mean_logp) {
  // Loss to descend: mean alpha log pi(a~|s) - min(q1,q2)(s, a~).
  const int act = policy.act_dim();
  const Eigen::VectorXd scale = 0.5 * (policy.act_high() - policy.act_low());
  double loss_total = 0.0, logp_total = 0.0;
  MlpTrace qtrace;
  Eigen::VectorXd one = Eigen::VectorXd::Ones(1);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const ReplayTransition& tr = *batch[i];
    const auto ev = policy.eval(tr.state);
    const Eigen::VectorXd u = policy.rsample_u(ev, noise[i]);
    const Eigen::VectorXd a = policy.action_from_u(u);

    Eigen::VectorXd x(tr.state.size() + act);
    x << tr.state, a;
    const double q1v = q1.forward(x)[0];
    const double q2v = q2.forward(x)[0];
    const bool use1 = q1v <= q2v;
    const Mlp& qmin_net = use1 ? q1 : q2;
    const double qmin = qmin_net.forward(x, qtrace)[0];
    const Eigen::VectorXd dq_dx = qmin_net.input_gradient(qtrace, one);

    const double logp = policy.log_prob_u(ev, u);
    loss_total += alpha * logp - qmin;
    logp_total += logp;

    if (grad) {
      Eigen::VectorXd d_mu(act), d_ls(act);
      for (int d = 0; d < act; ++d) {
        const double t = std::tanh(u[d]);
        const double da_du = scale[d] * (1.0 - t * t);
        // d loss / du through the squash and the density's log-det term.
        const double dl_du =
            alpha * 2.0 * t - dq_dx[tr.state.size() + d] * da_du;
        d_mu[d] = dl_du;
        d_ls[d] = dl_du * ev.sigma[d] * noise[i][d] - alpha;
      }
      policy.accumulate(ev, d_mu, d_ls, *grad);
    }
  }
  const double n = static_cast<double>(batch.size());
  if (grad && !batch.empty()) detail::scale_grad(*grad, -1.0 / n);
  if (mean_logp) *mean_logp = batch.empty() ? 0.0 : logp_total / n;
  return batch.empty() ? 0.0 : -(loss_total / n);
}

namespace {

Mlp make_q_net(int obs_dim, int act_dim, const std::vector<int>& hidden,
               Rng& rng) {
  std::vector<int> sizes;
  sizes.push_back(obs_dim + act_dim);
  for (int h : hidden) sizes.push_back(h);
  sizes.push_back(1);
  return Mlp(sizes, Activation::Relu, rng, 1.0);
}

void polyak(Mlp& target, const Mlp& online, double tau) {
  Eigen::VectorXd t = target.flatten();
  Eigen::VectorXd o = online.flatten();
  target.set_from_flat((1.0 - tau) * t + tau * o);
}

}  // namespace

SddpgUpdater::SddpgUpdater(int obs_dim, int act_dim,
                           const Eigen::VectorXd& act_low,
                           const Eigen::VectorXd& act_high,
                           const RunConfig& cfg, Rng& init_rng)
    : cfg_(cfg),
      policy_(obs_dim, act_dim, cfg.hidden,
              static_cast<SigmaScheme>(cfg.sigma_scheme), /*squashed=*/true,
              act_low, act_high, init_rng),
      q1_(make_q_net(obs_dim, act_dim, cfg.hidden, init_rng)),
      q2_(make_q_net(obs_dim, act_dim, cfg.hidden, init_rng)),
      q1_target_(q1_),
      q2_target_(q2_),
      policy_opt_(policy_.param_count(), cfg.lr_policy),
      q1_opt_(q1_.param_count(), cfg.lr_value),
      q2_opt_(q2_.param_count(), cfg.lr_value),
      alpha_(cfg.alpha),
      auto_alpha_(cfg.auto_alpha),
      target_entropy_(cfg.target_entropy_set ? cfg.target_entropy
                                             : -static_cast<double>(act_dim)) {
  alpha_state_.log_alpha = std::log(std::max(cfg.alpha, 1e-8));
  alpha_state_.lr = cfg.lr_alpha;
}

std::optional<SddpgUpdateMetrics> SddpgUpdater::update(
    const ReplayBuffer& buffer, Rng& rng) {
  const int batch_size = cfg_.sddpg_batch;
  if (buffer.size() < batch_size) return std::nullopt;  // wait state

  const double alpha_now = alpha();
  std::vector<long> idx = buffer.sample_indices(batch_size, rng);
  std::vector<const ReplayTransition*> batch(batch_size);
  for (int i = 0; i < batch_size; ++i) batch[i] = &buffer.at(idx[i]);

  const int act = policy_.act_dim();

  // Soft Q targets from the target nets and fresh next-state samples.
  Eigen::VectorXd targets(batch_size);
  for (int i = 0; i < batch_size; ++i) {
    const ReplayTransition& tr = *batch[i];
    double y = tr.reward;
    if (!tr.done) {
      const auto ev = policy_.eval(tr.next_state);
      Eigen::VectorXd eps(act);
      for (int d = 0; d < act; ++d) eps[d] = rng.normal();
      const Eigen::VectorXd u = policy_.rsample_u(ev, eps);
      const Eigen::VectorXd a = policy_.action_from_u(u);
      Eigen::VectorXd x(tr.next_state.size() + act);
      x << tr.next_state, a;
      const double qt =
          std::min(q1_target_.forward(x)[0], q2_target_.forward(x)[0]);
      y += cfg_.gamma * (qt - alpha_now * policy_.log_prob_u(ev, u));
    }
    targets[i] = y;
  }

  SddpgUpdateMetrics metrics;
  MlpTrace trace;
  Eigen::VectorXd upstream(1);
  for (Mlp* q : {&q1_, &q2_}) {
    GradBuffer grad = q->make_grad_buffer();
    double loss = 0.0;
    for (int i = 0; i < batch_size; ++i) {
      const ReplayTransition& tr = *batch[i];
      Eigen::VectorXd x(tr.state.size() + act);
      x << tr.state, tr.action;
      const double v = q->forward(x, trace)[0];
      const double err = v - targets[i];
      loss += err * err;
      upstream[0] = 2.0 * err / batch_size;
      q->backward(trace, upstream, grad);
    }
    loss /= batch_size;
    AdamState& opt = (q == &q1_) ? q1_opt_ : q2_opt_;
    Eigen::VectorXd params = q->flatten();
    adam_step(params, grad.flatten(), opt);
    q->set_from_flat(params);
    (q == &q1_ ? metrics.q1_loss : metrics.q2_loss) = loss;
  }

  // Policy step along the reparametrized soft objective.
  std::vector<Eigen::VectorXd> noise(batch_size);
  for (int i = 0; i < batch_size; ++i) {
    noise[i].resize(act);
    for (int d = 0; d < act; ++d) noise[i][d] = rng.normal();
  }
  GaussianGrad pg = policy_.make_grad();
  double mean_logp = 0.0;
  metrics.policy_objective = sddpg_policy_gradient(
      policy_, q1_, q2_, batch, noise, alpha_now, &pg, &mean_logp);
  Eigen::VectorXd params = policy_.flatten();
  adam_step(params, Eigen::VectorXd(-pg.flatten()), policy_opt_);
  policy_.set_from_flat(params);
  metrics.entropy_estimate = -mean_logp;

  polyak(q1_target_, q1_, cfg_.tau);
  polyak(q2_target_, q2_, cfg_.tau);

  if (auto_alpha_)
    tune_alpha(alpha_state_, metrics.entropy_estimate, target_entropy_);
  metrics.alpha = alpha();
  return metrics;
}

}  // namespace softpg
