#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "softpg/mlp.hpp"
#include "softpg/policy.hpp"

namespace softpg {

// One on-policy sample as the losses consume it. `advantage` is the
// entropy-augmented estimate computed under the behavior policy.
struct BatchSample {
  Eigen::VectorXd state;
  Action action;
  double advantage = 0.0;
  double reward_to_go = 0.0;
  double logp_behavior = 0.0;
};
using Batch = std::vector<BatchSample>;

enum class LossScheme {
  PpoBaseline = 0,  // plain clipped surrogate, no entropy anywhere
  Scheme1 = 1,      // advantage shifted by -alpha log pi_behavior
  Scheme2 = 2,      // explicit + alpha H(pi(.|s)) term outside the clip
};

struct SurrogateStats {
  double objective = 0.0;      // mean per-sample objective (to maximize)
  double clip_fraction = 0.0;  // fraction where the clipped branch was active
  long skipped = 0;            // samples dropped for non-finite ratio
};

namespace detail {

inline double head_log_prob(const GaussianHead& h, const GaussianEval& ev,
                            const Action& a) {
  return h.log_prob(ev, a.cont);
}
inline double head_log_prob(const CategoricalHead& h, const CategoricalEval& ev,
                            const Action& a) {
  return h.log_prob(ev, a.disc);
}
inline void head_add_logp_grad(const GaussianHead& h, const GaussianEval& ev,
                               const Action& a, double c, GaussianGrad& g) {
  h.add_log_prob_grad(ev, a.cont, c, g);
}
inline void head_add_logp_grad(const CategoricalHead& h,
                               const CategoricalEval& ev, const Action& a,
                               double c, GradBuffer& g) {
  h.add_log_prob_grad(ev, a.disc, c, g);
}

// The trailing +0.0 canonicalizes signed zeros so that a negated-loss code
// path yields the same bits as a direct-objective path on exactly-zero
// components; it is exact for every other value.
inline void scale_grad(GaussianGrad& g, double c) {
  for (auto& m : g.net.dw) m = ((m * c).array() + 0.0).matrix();
  for (auto& v : g.net.db) v = ((v * c).array() + 0.0).matrix();
  g.global_log_sigma = ((g.global_log_sigma * c).array() + 0.0).matrix();
}
inline void scale_grad(GradBuffer& g, double c) {
  for (auto& m : g.dw) m = ((m * c).array() + 0.0).matrix();
  for (auto& v : g.db) v = ((v * c).array() + 0.0).matrix();
}

}  // namespace detail

// Clipped-surrogate policy objective. Returns the mean objective (ascent
// direction); when `grad` is non-null the ascent gradient is accumulated
// into it. Schemes 1 and 2 with alpha=0 run the identical arithmetic as the
// plain baseline.
//
// scheme2 per sample:  min(ratio*A, g(clip,A)) + alpha*H(pi(.|s))
// scheme1 per sample:  min(ratio*A', g(clip,A')),
//                      A' = A - alpha*log pi_behavior(a|s)
template <class Head>
SurrogateStats clipped_surrogate(const Head& head, const Batch& batch,
                                 LossScheme scheme, double alpha, double clip,
                                 typename Head::Grad* grad) {
  SurrogateStats stats;
  double total = 0.0;
  long kept = 0;
  long clipped = 0;
  for (const BatchSample& s : batch) {
    const auto ev = head.eval(s.state);
    const double logp = detail::head_log_prob(head, ev, s.action);
    const double ratio = std::exp(logp - s.logp_behavior);
    if (!std::isfinite(ratio)) {
      stats.skipped += 1;
      continue;
    }
    double adv = s.advantage;
    if (scheme == LossScheme::Scheme1 && alpha != 0.0)
      adv = s.advantage - alpha * s.logp_behavior;

    const double unclipped = ratio * adv;
    const double clipped_val = (adv > 0.0 ? 1.0 + clip : 1.0 - clip) * adv;
    const bool clip_active = unclipped > clipped_val;
    double objective = clip_active ? clipped_val : unclipped;
    if (clip_active) ++clipped;

    if (scheme == LossScheme::Scheme2 && alpha != 0.0)
      objective += alpha * head.entropy(ev);

    total += objective;
    kept += 1;
    if (grad) {
      if (!clip_active)
        detail::head_add_logp_grad(head, ev, s.action, adv * ratio, *grad);
      if (scheme == LossScheme::Scheme2 && alpha != 0.0)
        head.add_entropy_grad(ev, alpha, *grad);
    }
  }
  if (kept > 0) {
    stats.objective = total / kept;
    stats.clip_fraction = static_cast<double>(clipped) / kept;
    if (grad) detail::scale_grad(*grad, 1.0 / kept);
  }
  return stats;
}

// Value of the surrogate objective alone (for finite-difference checks).
template <class Head>
double clipped_surrogate_objective(const Head& head, const Batch& batch,
                                   LossScheme scheme, double alpha,
                                   double clip) {
  return clipped_surrogate<Head>(head, batch, scheme, alpha, clip, nullptr)
      .objective;
}

// Mean squared error value loss: mean (V(s) - R)^2 with descent gradient.
double value_loss(const Mlp& value_net, const Batch& batch, GradBuffer* grad);

// Vanilla soft policy gradient (ascent): mean grad log pi(a|s) *
// (advantage - alpha log pi_behavior(a|s)). The bracket is data, so the
// matching scalar surrogate is mean log pi * bracket.
template <class Head>
double spg_surrogate(const Head& head, const Batch& batch, double alpha,
                     typename Head::Grad* grad) {
  double total = 0.0;
  for (const BatchSample& s : batch) {
    const auto ev = head.eval(s.state);
    const double coeff = s.advantage - alpha * s.logp_behavior;
    total += detail::head_log_prob(head, ev, s.action) * coeff;
    if (grad) detail::head_add_logp_grad(head, ev, s.action, coeff, *grad);
  }
  const double n = static_cast<double>(batch.size());
  if (grad && !batch.empty()) detail::scale_grad(*grad, 1.0 / n);
  return batch.empty() ? 0.0 : total / n;
}

// Temperature update state: one gradient step on log alpha per call,
// descending d/dlogalpha of -logalpha * (measured_entropy... see tune_alpha.
struct AlphaState {
  double log_alpha = 0.0;
  double lr = 3e-3;
  double alpha() const { return std::exp(log_alpha); }
};

// Targets a given policy entropy: entropy above target shrinks alpha,
// below target grows it; at the target the update is exactly zero.
double tune_alpha(AlphaState& state, double measured_entropy,
                  double target_entropy);

}  // namespace softpg
