#include "softpg/sppo.hpp"

#include <cmath>
#include <stdexcept>
#include <thread>

namespace softpg {

namespace {

std::unique_ptr<Policy> make_policy(const Env& env, const RunConfig& cfg,
                                    Rng& init_rng) {
  if (env.discrete_actions()) {
    return std::make_unique<Policy>(
        CategoricalHead(env.obs_dim(), env.n_actions(), cfg.hidden, init_rng));
  }
  return std::make_unique<Policy>(GaussianHead(
      env.obs_dim(), env.act_dim(), cfg.hidden,
      static_cast<SigmaScheme>(cfg.sigma_scheme), /*squashed=*/false,
      env.act_low(), env.act_high(), init_rng));
}

Mlp make_value_net(const Env& env, const RunConfig& cfg, Rng& init_rng) {
  std::vector<int> sizes;
  sizes.push_back(env.obs_dim());
  for (int h : cfg.hidden) sizes.push_back(h);
  sizes.push_back(1);
  return Mlp(sizes, Activation::Tanh, init_rng, 1.0);
}

LossScheme scheme_for(const RunConfig& cfg) {
  if (cfg.algo == "ppo") return LossScheme::PpoBaseline;
  return cfg.loss_scheme == 1 ? LossScheme::Scheme1 : LossScheme::Scheme2;
}

}  // namespace

OnPolicyTrainer::OnPolicyTrainer(const RunConfig& cfg, int n_workers)
    : cfg_(cfg),
      scheme_(scheme_for(cfg)),
      proto_env_(make_env(cfg.env)),
      value_net_(),
      policy_opt_(0, cfg.lr_policy),
      value_opt_(0, cfg.lr_value),
      shuffle_rng_(Rng::substream(cfg.seed, Stream::Shuffle)) {
  cfg_.validate();
  if (cfg_.algo == "sddpg")
    throw std::invalid_argument("OnPolicyTrainer: sddpg is off-policy");
  Rng init_rng = Rng::substream(cfg.seed, Stream::Init);
  policy_ = make_policy(*proto_env_, cfg_, init_rng);
  value_net_ = make_value_net(*proto_env_, cfg_, init_rng);
  policy_opt_ = AdamState(policy_->param_count(), cfg_.lr_policy);
  value_opt_ = AdamState(value_net_.param_count(), cfg_.lr_value);

  auto_alpha_ = cfg_.auto_alpha;
  const int act = proto_env_->discrete_actions() ? 1 : proto_env_->act_dim();
  target_entropy_ = cfg_.target_entropy_set ? cfg_.target_entropy
                                            : -static_cast<double>(act);
  alpha_state_.log_alpha = std::log(std::max(cfg_.alpha, 1e-8));
  alpha_state_.lr = cfg_.lr_alpha;

  const int workers = std::max(1, std::min(n_workers, cfg_.horizon));
  workers_.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    Worker wk{proto_env_->clone(),
              Rng::substream(cfg_.seed, Stream::Env, static_cast<std::uint64_t>(w)),
              Rng::substream(cfg_.seed, Stream::Sample, static_cast<std::uint64_t>(w)),
              0};
    wk.budget = cfg_.horizon / workers + (w < cfg_.horizon % workers ? 1 : 0);
    workers_.push_back(std::move(wk));
  }
}

double OnPolicyTrainer::alpha() const {
  return auto_alpha_ ? alpha_state_.alpha() : cfg_.alpha;
}

std::vector<Trajectory> OnPolicyTrainer::collect() {
  std::vector<std::vector<Trajectory>> per_worker(workers_.size());
  auto run_worker = [&](std::size_t w) {
    Worker& wk = workers_[w];
    const Policy& pol = *policy_;
    int remaining = wk.budget;
    std::vector<Trajectory>& out = per_worker[w];
    while (remaining > 0) {
      Trajectory traj;
      Eigen::VectorXd state = wk.env->reset(wk.env_rng);
      while (remaining > 0) {
        auto [action, logp] = pol.sample(state, wk.sample_rng);
        Action applied = action;
        if (!wk.env->discrete_actions())
          applied.cont = applied.cont.cwiseMax(wk.env->act_low())
                             .cwiseMin(wk.env->act_high());
        StepResult res = wk.env->step(applied, wk.env_rng);
        Transition tr;
        tr.state = std::move(state);
        tr.action = std::move(action);
        tr.r_ext = res.r_ext;
        tr.next_state = res.next_state;
        tr.done = res.done;
        tr.log_prob_behavior = logp;
        traj.steps.push_back(std::move(tr));
        --remaining;
        if (res.done) {
          traj.episode_complete = true;
          break;
        }
        state = std::move(res.next_state);
      }
      out.push_back(std::move(traj));
    }
  };

  if (workers_.size() == 1) {
    run_worker(0);
  } else {
    std::vector<std::thread> threads;
    threads.reserve(workers_.size());
    for (std::size_t w = 0; w < workers_.size(); ++w)
      threads.emplace_back(run_worker, w);
    for (auto& t : threads) t.join();
  }

  std::vector<Trajectory> merged;
  for (auto& chunk : per_worker)
    for (auto& traj : chunk) merged.push_back(std::move(traj));
  return merged;
}

void OnPolicyTrainer::policy_update(const Batch& batch,
                                    IterationMetrics& metrics) {
  const long n = static_cast<long>(batch.size());
  std::vector<long> order(n);
  for (long i = 0; i < n; ++i) order[i] = i;

  double policy_obj_sum = 0.0, value_loss_sum = 0.0, clip_sum = 0.0;
  long loss_calls = 0;

  auto policy_minibatch_step = [&](const Batch& mb) {
    SurrogateStats stats;
    Eigen::VectorXd flat_grad;
    if (policy_->discrete()) {
      auto& head = policy_->categorical();
      auto grad = head.make_grad();
      stats = clipped_surrogate(head, mb, scheme_, alpha(), cfg_.clip, &grad);
      flat_grad = grad.flatten();
    } else {
      auto& head = policy_->gaussian();
      auto grad = head.make_grad();
      stats = clipped_surrogate(head, mb, scheme_, alpha(), cfg_.clip, &grad);
      flat_grad = grad.flatten();
    }
    Eigen::VectorXd params = policy_->flatten();
    adam_step(params, Eigen::VectorXd(-flat_grad), policy_opt_);
    policy_->set_from_flat(params);
    policy_obj_sum += stats.objective;
    clip_sum += stats.clip_fraction;
    ++loss_calls;
  };

  auto value_minibatch_step = [&](const Batch& mb) {
    GradBuffer grad = value_net_.make_grad_buffer();
    const double loss = value_loss(value_net_, mb, &grad);
    Eigen::VectorXd params = value_net_.flatten();
    adam_step(params, grad.flatten(), value_opt_);
    value_net_.set_from_flat(params);
    value_loss_sum += loss;
  };

  if (cfg_.algo == "spg") {
    // Vanilla soft policy gradient: one full-batch ascent step.
    Eigen::VectorXd flat_grad;
    double obj;
    if (policy_->discrete()) {
      auto& head = policy_->categorical();
      auto grad = head.make_grad();
      obj = spg_surrogate(head, batch, alpha(), &grad);
      flat_grad = grad.flatten();
    } else {
      auto& head = policy_->gaussian();
      auto grad = head.make_grad();
      obj = spg_surrogate(head, batch, alpha(), &grad);
      flat_grad = grad.flatten();
    }
    Eigen::VectorXd params = policy_->flatten();
    adam_step(params, Eigen::VectorXd(-flat_grad), policy_opt_);
    policy_->set_from_flat(params);
    policy_obj_sum = obj;
    loss_calls = 1;
  }

  long value_calls = 0;
  for (int epoch = 0; epoch < cfg_.epochs; ++epoch) {
    // Fisher-Yates with the dedicated shuffle stream.
    for (long i = n - 1; i > 0; --i) {
      const long j = shuffle_rng_.uniform_int(static_cast<int>(i + 1));
      std::swap(order[i], order[j]);
    }
    for (long at = 0; at < n; at += cfg_.minibatch) {
      const long stop = std::min(n, at + cfg_.minibatch);
      Batch mb;
      mb.reserve(stop - at);
      for (long i = at; i < stop; ++i) mb.push_back(batch[order[i]]);
      if (cfg_.algo != "spg") policy_minibatch_step(mb);
      value_minibatch_step(mb);
      ++value_calls;
    }
  }

  metrics.policy_loss = loss_calls ? -policy_obj_sum / loss_calls : 0.0;
  metrics.value_loss = value_calls ? value_loss_sum / value_calls : 0.0;
  metrics.clip_fraction = loss_calls ? clip_sum / loss_calls : 0.0;
}

IterationMetrics OnPolicyTrainer::run_iteration() {
  std::vector<Trajectory> trajs = collect();

  Batch batch;
  batch.reserve(cfg_.horizon);
  double entropy_sum = 0.0;
  double episode_return_sum = 0.0;
  long episodes = 0;
  last_states_.clear();

  std::vector<AugmentedTrajectory> augmented;
  augmented.reserve(trajs.size());
  for (Trajectory& traj : trajs) {
    const long len = static_cast<long>(traj.steps.size());
    Eigen::VectorXd ent(len);
    for (long t = 0; t < len; ++t)
      ent[t] = policy_->entropy(traj.steps[t].state);
    entropy_sum += ent.sum();

    if (traj.episode_complete) {
      double ret = 0.0;
      for (const auto& tr : traj.steps) ret += tr.r_ext;
      episode_return_sum += ret;
      ++episodes;
    }
    if (!traj.steps.empty() && !traj.steps.back().done)
      traj.bootstrap_value = value_net_.forward(traj.steps.back().next_state)[0];

    AugmentedTrajectory aug = augment_rewards(std::move(traj), ent, alpha());
    for (long t = 0; t < len; ++t)
      aug.values[t] = value_net_.forward(aug.traj.steps[t].state)[0];
    aug.rewards_to_go = rewards_to_go(aug, cfg_.gamma);
    aug.advantages = gae(aug, cfg_.gamma, cfg_.lam);
    augmented.push_back(std::move(aug));
  }

  for (const AugmentedTrajectory& aug : augmented) {
    for (long t = 0; t < static_cast<long>(aug.traj.steps.size()); ++t) {
      BatchSample s;
      s.state = aug.traj.steps[t].state;
      s.action = aug.traj.steps[t].action;
      s.advantage = aug.advantages[t];
      s.reward_to_go = aug.rewards_to_go[t];
      s.logp_behavior = aug.traj.steps[t].log_prob_behavior;
      last_states_.push_back(s.state);
      batch.push_back(std::move(s));
    }
  }
  const long n = static_cast<long>(batch.size());

  if (cfg_.normalize_adv && n > 1) {
    double mean = 0.0;
    for (const auto& s : batch) mean += s.advantage;
    mean /= n;
    double var = 0.0;
    for (const auto& s : batch) var += (s.advantage - mean) * (s.advantage - mean);
    const double std = std::sqrt(var / n);
    for (auto& s : batch) s.advantage = (s.advantage - mean) / (std + 1e-8);
  }

  IterationMetrics metrics;
  metrics.env_steps = env_steps_ + n;
  metrics.iteration = iteration_ + 1;
  metrics.episodes = episodes;
  metrics.batch_return = episodes > 0 ? episode_return_sum / episodes : 0.0;
  metrics.mean_entropy = n > 0 ? entropy_sum / n : 0.0;

  // A poisoned update mid-iteration rolls the nets back to the iteration
  // start before propagating.
  const Eigen::VectorXd policy_snapshot = policy_->flatten();
  const Eigen::VectorXd value_snapshot = value_net_.flatten();
  const AdamState popt_snapshot = policy_opt_;
  const AdamState vopt_snapshot = value_opt_;
  try {
    policy_update(batch, metrics);
  } catch (const std::domain_error&) {
    policy_->set_from_flat(policy_snapshot);
    value_net_.set_from_flat(value_snapshot);
    policy_opt_ = popt_snapshot;
    value_opt_ = vopt_snapshot;
    throw;
  }

  if (auto_alpha_)
    tune_alpha(alpha_state_, metrics.mean_entropy, target_entropy_);
  metrics.alpha = alpha();

  env_steps_ += n;
  iteration_ += 1;
  return metrics;
}

}  // namespace softpg
