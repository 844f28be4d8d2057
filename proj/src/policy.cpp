#include "softpg/policy.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace softpg {

namespace {

constexpr double kLogTwoPi = 1.8378770664093453;  // ln(2*pi)

inline double clamp_log_sigma(double x) {
  return std::min(std::max(x, kLogSigmaMin), kLogSigmaMax);
}

inline double atanh_stable(double y) {
  return 0.5 * (std::log1p(y) - std::log1p(-y));
}

}  // namespace

void GaussianGrad::set_zero() {
  net.set_zero();
  global_log_sigma.setZero();
}

Eigen::VectorXd GaussianGrad::flatten() const {
  Eigen::VectorXd nf = net.flatten();
  Eigen::VectorXd flat(nf.size() + global_log_sigma.size());
  flat.head(nf.size()) = nf;
  flat.tail(global_log_sigma.size()) = global_log_sigma;
  return flat;
}

GaussianHead::GaussianHead(int obs_dim, int act_dim,
                           const std::vector<int>& hidden, SigmaScheme scheme,
                           bool squashed, const Eigen::VectorXd& act_low,
                           const Eigen::VectorXd& act_high, Rng& rng)
    : scheme_(scheme), squashed_(squashed), act_dim_(act_dim),
      low_(act_low), high_(act_high) {
  if (low_.size() != act_dim || high_.size() != act_dim)
    throw std::invalid_argument("GaussianHead: bounds size mismatch");
  center_ = 0.5 * (low_ + high_);
  scale_ = 0.5 * (high_ - low_);

  const bool local = scheme != SigmaScheme::GlobalSigma;
  std::vector<int> sizes;
  sizes.push_back(obs_dim);
  for (int h : hidden) sizes.push_back(h);
  sizes.push_back(local ? 2 * act_dim : act_dim);
  net_ = Mlp(sizes, Activation::Tanh, rng, 0.01);

  if (local) {
    // Local log-sigma rows start at exactly zero so schemes 3/4 begin
    // indistinguishable from scheme 1 (delta sigma = 1). Scheme 2 instead
    // carries the initial sigma in its bias.
    const int last = net_.num_layers() - 1;
    net_.weight(last).bottomRows(act_dim).setZero();
    if (scheme == SigmaScheme::LocalSigma)
      net_.bias(last).tail(act_dim).setConstant(std::log(0.6));
  }
  if (has_global())
    global_log_sigma_ = Eigen::VectorXd::Constant(act_dim, std::log(0.6));
  else
    global_log_sigma_ = Eigen::VectorXd(0);
}

GaussianEval GaussianHead::eval(const Eigen::VectorXd& state) const {
  GaussianEval ev;
  Eigen::VectorXd out = net_.forward(state, ev.trace);
  if (!out.allFinite())
    throw std::domain_error("GaussianHead: non-finite network output");
  ev.mu = out.head(act_dim_);
  ev.raw_log_sigma.resize(act_dim_);
  if (scheme_ != SigmaScheme::GlobalSigma) ev.local_out = out.tail(act_dim_);
  for (int d = 0; d < act_dim_; ++d) {
    switch (scheme_) {
      case SigmaScheme::GlobalSigma:
        ev.raw_log_sigma[d] = global_log_sigma_[d];
        break;
      case SigmaScheme::LocalSigma:
        ev.raw_log_sigma[d] = ev.local_out[d];
        break;
      case SigmaScheme::GlobalTimesLocal:
        ev.raw_log_sigma[d] = global_log_sigma_[d] + ev.local_out[d];
        break;
      case SigmaScheme::GlobalTimesClippedLocal:
        ev.raw_log_sigma[d] =
            global_log_sigma_[d] + std::min(ev.local_out[d], 0.0);
        break;
    }
  }
  ev.log_sigma.resize(act_dim_);
  ev.sigma.resize(act_dim_);
  for (int d = 0; d < act_dim_; ++d) {
    ev.log_sigma[d] = clamp_log_sigma(ev.raw_log_sigma[d]);
    ev.sigma[d] = std::exp(ev.log_sigma[d]);
  }
  return ev;
}

std::pair<Eigen::VectorXd, double> GaussianHead::sample(const GaussianEval& ev,
                                                        Rng& rng) const {
  Eigen::VectorXd eps(act_dim_);
  for (int d = 0; d < act_dim_; ++d) eps[d] = rng.normal();
  Eigen::VectorXd u = rsample_u(ev, eps);
  Eigen::VectorXd a = action_from_u(u);
  return {a, log_prob_u(ev, u)};
}

Eigen::VectorXd GaussianHead::rsample_u(const GaussianEval& ev,
                                        const Eigen::VectorXd& eps) const {
  return ev.mu + ev.sigma.cwiseProduct(eps);
}

Eigen::VectorXd GaussianHead::action_from_u(const Eigen::VectorXd& u) const {
  if (!squashed_) return u;
  Eigen::VectorXd a(act_dim_);
  for (int d = 0; d < act_dim_; ++d)
    a[d] = center_[d] + scale_[d] * std::tanh(u[d]);
  return a;
}

Eigen::VectorXd GaussianHead::deterministic_action(const GaussianEval& ev) const {
  if (!squashed_) return ev.mu;
  return action_from_u(ev.mu);
}

double GaussianHead::log_prob_u(const GaussianEval& ev,
                                const Eigen::VectorXd& u) const {
  double lp = 0.0;
  for (int d = 0; d < act_dim_; ++d) {
    const double z = (u[d] - ev.mu[d]) / ev.sigma[d];
    lp += -0.5 * kLogTwoPi - ev.log_sigma[d] - 0.5 * z * z;
    if (squashed_) {
      // d a / d u = scale * (1 - tanh(u)^2); stable log via softplus form.
      const double log_det =
          std::log(scale_[d]) + 2.0 * (std::log(2.0) - u[d] -
                                       std::log1p(std::exp(-2.0 * u[d])));
      lp -= log_det;
    }
  }
  return lp;
}

double GaussianHead::log_prob(const GaussianEval& ev,
                              const Eigen::VectorXd& action) const {
  for (int d = 0; d < act_dim_; ++d)
    if (!(ev.sigma[d] > 0.0))
      throw std::domain_error("GaussianHead: degenerate sigma");
  if (!squashed_) return log_prob_u(ev, action);
  Eigen::VectorXd u(act_dim_);
  for (int d = 0; d < act_dim_; ++d) {
    double y = (action[d] - center_[d]) / scale_[d];
    y = std::min(std::max(y, -1.0 + 1e-12), 1.0 - 1e-12);
    u[d] = atanh_stable(y);
  }
  return log_prob_u(ev, u);
}

double GaussianHead::entropy(const GaussianEval& ev) const {
  double h = 0.0;
  for (int d = 0; d < act_dim_; ++d)
    h += 0.5 * (kLogTwoPi + 1.0) + ev.log_sigma[d];
  return h;
}

double GaussianHead::entropy_estimate(const GaussianEval& ev, Rng& rng) const {
  Eigen::VectorXd eps(act_dim_);
  for (int d = 0; d < act_dim_; ++d) eps[d] = rng.normal();
  Eigen::VectorXd u = rsample_u(ev, eps);
  return -log_prob_u(ev, u);
}

void GaussianHead::accumulate(const GaussianEval& ev,
                              const Eigen::VectorXd& d_mu,
                              const Eigen::VectorXd& d_log_sigma,
                              GaussianGrad& g) const {
  Eigen::VectorXd d_raw(act_dim_);
  for (int d = 0; d < act_dim_; ++d) {
    const bool inside = ev.raw_log_sigma[d] > kLogSigmaMin &&
                        ev.raw_log_sigma[d] < kLogSigmaMax;
    d_raw[d] = inside ? d_log_sigma[d] : 0.0;
  }

  const bool local = scheme_ != SigmaScheme::GlobalSigma;
  Eigen::VectorXd upstream =
      Eigen::VectorXd::Zero(local ? 2 * act_dim_ : act_dim_);
  upstream.head(act_dim_) = d_mu;
  for (int d = 0; d < act_dim_; ++d) {
    switch (scheme_) {
      case SigmaScheme::GlobalSigma:
        g.global_log_sigma[d] += d_raw[d];
        break;
      case SigmaScheme::LocalSigma:
        upstream[act_dim_ + d] = d_raw[d];
        break;
      case SigmaScheme::GlobalTimesLocal:
        g.global_log_sigma[d] += d_raw[d];
        upstream[act_dim_ + d] = d_raw[d];
        break;
      case SigmaScheme::GlobalTimesClippedLocal:
        g.global_log_sigma[d] += d_raw[d];
        if (ev.local_out[d] < 0.0) upstream[act_dim_ + d] = d_raw[d];
        break;
    }
  }
  net_.backward(ev.trace, upstream, g.net);
}

void GaussianHead::add_log_prob_grad(const GaussianEval& ev,
                                     const Eigen::VectorXd& action,
                                     double coeff, GaussianGrad& g) const {
  // Derivatives of log N(a; mu, sigma) treating the action as fixed. For the
  // squashed head the log-det term does not depend on parameters when the
  // action (hence u) is held fixed.
  Eigen::VectorXd u;
  if (!squashed_) {
    u = action;
  } else {
    u.resize(act_dim_);
    for (int d = 0; d < act_dim_; ++d) {
      double y = (action[d] - center_[d]) / scale_[d];
      y = std::min(std::max(y, -1.0 + 1e-12), 1.0 - 1e-12);
      u[d] = atanh_stable(y);
    }
  }
  Eigen::VectorXd d_mu(act_dim_), d_ls(act_dim_);
  for (int d = 0; d < act_dim_; ++d) {
    const double z = (u[d] - ev.mu[d]) / ev.sigma[d];
    d_mu[d] = coeff * z / ev.sigma[d];
    d_ls[d] = coeff * (z * z - 1.0);
  }
  accumulate(ev, d_mu, d_ls, g);
}

void GaussianHead::add_entropy_grad(const GaussianEval& ev, double coeff,
                                    GaussianGrad& g) const {
  accumulate(ev, Eigen::VectorXd::Zero(act_dim_),
             Eigen::VectorXd::Constant(act_dim_, coeff), g);
}

GaussianGrad GaussianHead::make_grad() const {
  GaussianGrad g;
  g.net = net_.make_grad_buffer();
  g.global_log_sigma = Eigen::VectorXd::Zero(global_log_sigma_.size());
  return g;
}

long GaussianHead::param_count() const {
  return net_.param_count() + global_log_sigma_.size();
}

Eigen::VectorXd GaussianHead::flatten() const {
  Eigen::VectorXd nf = net_.flatten();
  Eigen::VectorXd flat(param_count());
  flat.head(nf.size()) = nf;
  flat.tail(global_log_sigma_.size()) = global_log_sigma_;
  return flat;
}

void GaussianHead::set_from_flat(const Eigen::VectorXd& flat) {
  if (flat.size() != param_count())
    throw std::invalid_argument("GaussianHead::set_from_flat size mismatch");
  net_.set_from_flat(flat.head(net_.param_count()));
  global_log_sigma_ = flat.tail(global_log_sigma_.size());
}

// ---------------------------------------------------------------------------

CategoricalHead::CategoricalHead(int obs_dim, int n_actions,
                                 const std::vector<int>& hidden, Rng& rng)
    : n_actions_(n_actions) {
  std::vector<int> sizes;
  sizes.push_back(obs_dim);
  for (int h : hidden) sizes.push_back(h);
  sizes.push_back(n_actions);
  net_ = Mlp(sizes, Activation::Tanh, rng, 0.01);
}

CategoricalEval CategoricalHead::eval(const Eigen::VectorXd& state) const {
  CategoricalEval ev;
  ev.logits = net_.forward(state, ev.trace);
  if (!ev.logits.allFinite())
    throw std::domain_error("CategoricalHead: non-finite logits");
  const double m = ev.logits.maxCoeff();
  double z = 0.0;
  for (int a = 0; a < n_actions_; ++a) z += std::exp(ev.logits[a] - m);
  const double log_z = m + std::log(z);
  ev.log_probs = ev.logits.array() - log_z;
  ev.probs = ev.log_probs.array().exp();
  return ev;
}

std::pair<int, double> CategoricalHead::sample(const CategoricalEval& ev,
                                               Rng& rng) const {
  const double u = rng.uniform();
  double cum = 0.0;
  int a = n_actions_ - 1;
  for (int i = 0; i < n_actions_; ++i) {
    cum += ev.probs[i];
    if (u < cum) {
      a = i;
      break;
    }
  }
  return {a, ev.log_probs[a]};
}

int CategoricalHead::deterministic_action(const CategoricalEval& ev) const {
  int best = 0;
  ev.logits.maxCoeff(&best);
  return best;
}

double CategoricalHead::log_prob(const CategoricalEval& ev, int action) const {
  if (action < 0 || action >= n_actions_)
    throw std::invalid_argument("CategoricalHead: action out of range");
  return ev.log_probs[action];
}

double CategoricalHead::entropy(const CategoricalEval& ev) const {
  double h = 0.0;
  for (int a = 0; a < n_actions_; ++a) h -= ev.probs[a] * ev.log_probs[a];
  return h;
}

void CategoricalHead::add_log_prob_grad(const CategoricalEval& ev, int action,
                                        double coeff, GradBuffer& g) const {
  // d log p(a) / d logits = e_a - p
  Eigen::VectorXd up = -coeff * ev.probs;
  up[action] += coeff;
  net_.backward(ev.trace, up, g);
}

void CategoricalHead::add_entropy_grad(const CategoricalEval& ev, double coeff,
                                       GradBuffer& g) const {
  // dH / d logits_b = -p_b * (log p_b + H)
  const double h = entropy(ev);
  Eigen::VectorXd up(n_actions_);
  for (int b = 0; b < n_actions_; ++b)
    up[b] = -coeff * ev.probs[b] * (ev.log_probs[b] + h);
  net_.backward(ev.trace, up, g);
}

// ---------------------------------------------------------------------------

std::pair<Action, double> Policy::sample(const Eigen::VectorXd& state,
                                         Rng& rng) const {
  Action act;
  double lp;
  if (discrete()) {
    auto ev = categorical().eval(state);
    auto [a, l] = categorical().sample(ev, rng);
    act.disc = a;
    lp = l;
  } else {
    auto ev = gaussian().eval(state);
    auto [a, l] = gaussian().sample(ev, rng);
    act.cont = a;
    lp = l;
  }
  return {act, lp};
}

Action Policy::deterministic_action(const Eigen::VectorXd& state) const {
  Action act;
  if (discrete()) {
    act.disc = categorical().deterministic_action(categorical().eval(state));
  } else {
    act.cont = gaussian().deterministic_action(gaussian().eval(state));
  }
  return act;
}

double Policy::log_prob(const Eigen::VectorXd& state, const Action& a) const {
  if (discrete()) return categorical().log_prob(categorical().eval(state), a.disc);
  return gaussian().log_prob(gaussian().eval(state), a.cont);
}

double Policy::entropy(const Eigen::VectorXd& state) const {
  if (discrete()) return categorical().entropy(categorical().eval(state));
  return gaussian().entropy(gaussian().eval(state));
}

long Policy::param_count() const {
  return discrete() ? categorical().param_count() : gaussian().param_count();
}

Eigen::VectorXd Policy::flatten() const {
  return discrete() ? categorical().flatten() : gaussian().flatten();
}

void Policy::set_from_flat(const Eigen::VectorXd& flat) {
  if (discrete())
    categorical().set_from_flat(flat);
  else
    gaussian().set_from_flat(flat);
}

}  // namespace softpg
