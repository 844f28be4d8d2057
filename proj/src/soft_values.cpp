#include "softpg/soft_values.hpp"

#include <cmath>
#include <stdexcept>

namespace softpg {

TabularPolicy TabularPolicy::uniform(int n_states, int n_actions) {
  TabularPolicy pi;
  pi.probs = Eigen::MatrixXd::Constant(n_states, n_actions, 1.0 / n_actions);
  return pi;
}

TabularPolicy TabularPolicy::from_logits(const Eigen::MatrixXd& logits) {
  TabularPolicy pi;
  pi.logits = logits;
  pi.has_logits = true;
  pi.probs.resize(logits.rows(), logits.cols());
  for (long s = 0; s < logits.rows(); ++s) {
    const double m = logits.row(s).maxCoeff();
    double z = 0.0;
    for (long a = 0; a < logits.cols(); ++a) z += std::exp(logits(s, a) - m);
    for (long a = 0; a < logits.cols(); ++a)
      pi.probs(s, a) = std::exp(logits(s, a) - m) / z;
  }
  return pi;
}

double TabularPolicy::entropy(int s) const {
  double h = 0.0;
  for (long a = 0; a < probs.cols(); ++a) {
    const double p = probs(s, a);
    if (p > 0.0) h -= p * std::log(p);
  }
  return h;
}

void TabularPolicy::validate() const {
  for (long s = 0; s < probs.rows(); ++s) {
    if (std::abs(probs.row(s).sum() - 1.0) > 1e-12)
      throw std::invalid_argument("TabularPolicy: row does not sum to 1");
    if (has_logits && probs.row(s).minCoeff() <= 0.0)
      throw std::invalid_argument("TabularPolicy: zero mass under logits");
  }
}

SoftValues soft_policy_evaluation(const TabularMdp& mdp,
                                  const TabularPolicy& pi, double alpha,
                                  double tol, int max_sweeps) {
  if (!(mdp.gamma < 1.0))
    throw std::invalid_argument("soft_policy_evaluation: gamma must be < 1");
  if (alpha < 0.0)
    throw std::invalid_argument("soft_policy_evaluation: alpha must be >= 0");
  const int S = mdp.n_states, A = mdp.n_actions;

  Eigen::VectorXd ent(S);
  for (int s = 0; s < S; ++s) ent[s] = alpha * pi.entropy(s);

  // Expected immediate reward r_pi(s) = sum_a pi sum_s' P R.
  Eigen::VectorXd r_pi = Eigen::VectorXd::Zero(S);
  Eigen::MatrixXd p_pi = Eigen::MatrixXd::Zero(S, S);  // P_pi(s, s')
  for (int s = 0; s < S; ++s)
    for (int a = 0; a < A; ++a) {
      const double w = pi.probs(s, a);
      for (int next = 0; next < S; ++next) {
        r_pi[s] += w * mdp.P[a](s, next) * mdp.R[a](s, next);
        p_pi(s, next) += w * mdp.P[a](s, next);
      }
    }

  Eigen::VectorXd v = Eigen::VectorXd::Zero(S);
  bool converged = false;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    Eigen::VectorXd next = ent + r_pi + mdp.gamma * (p_pi * v);
    const double change = (next - v).cwiseAbs().maxCoeff();
    v = next;
    if (change < tol) {
      converged = true;
      break;
    }
  }
  if (!converged)
    throw std::runtime_error("soft_policy_evaluation: iteration limit reached");

  SoftValues out;
  out.alpha = alpha;
  out.q.resize(S, A);
  for (int s = 0; s < S; ++s)
    for (int a = 0; a < A; ++a) {
      double q = ent[s];
      for (int next = 0; next < S; ++next)
        q += mdp.P[a](s, next) * (mdp.R[a](s, next) + mdp.gamma * v[next]);
      out.q(s, a) = q;
    }
  out.v.resize(S);
  for (int s = 0; s < S; ++s) out.v[s] = pi.probs.row(s).dot(out.q.row(s));
  return out;
}

double soft_objective(const TabularMdp& mdp, const TabularPolicy& pi,
                      double alpha, double tol) {
  SoftValues sv = soft_policy_evaluation(mdp, pi, alpha, tol);
  return mdp.p0.dot(sv.v);
}

Eigen::VectorXd discounted_visitation(const TabularMdp& mdp,
                                      const TabularPolicy& pi) {
  const int S = mdp.n_states, A = mdp.n_actions;
  Eigen::MatrixXd p_pi = Eigen::MatrixXd::Zero(S, S);
  for (int s = 0; s < S; ++s)
    for (int a = 0; a < A; ++a)
      for (int next = 0; next < S; ++next)
        p_pi(s, next) += pi.probs(s, a) * mdp.P[a](s, next);
  // eta = p0 + gamma P_pi^T eta  =>  (I - gamma P_pi^T) eta = p0
  Eigen::MatrixXd lhs =
      Eigen::MatrixXd::Identity(S, S) - mdp.gamma * p_pi.transpose();
  return lhs.partialPivLu().solve(mdp.p0);
}

namespace {

// d pi(a|s) / d z(s,b) = pi(a)(delta_ab - pi(b)).
// Gradient of sum_a coeff(a) * pi(a|s) with respect to the state's logits.
Eigen::VectorXd logit_grad_of_expectation(const Eigen::VectorXd& probs,
                                          const Eigen::VectorXd& coeff) {
  const double mean = probs.dot(coeff);
  return probs.cwiseProduct(coeff - Eigen::VectorXd::Constant(coeff.size(), mean));
}

}  // namespace

ExactSoftGradient exact_soft_gradient(const TabularMdp& mdp,
                                      const TabularPolicy& pi, double alpha,
                                      double fd_step) {
  if (!pi.has_logits)
    throw std::invalid_argument("exact_soft_gradient: needs logit parameterization");
  const int S = mdp.n_states, A = mdp.n_actions;
  constexpr double kTightTol = 1e-14;

  SoftValues sv = soft_policy_evaluation(mdp, pi, alpha, kTightTol);
  Eigen::VectorXd eta = discounted_visitation(mdp, pi);

  ExactSoftGradient out;
  out.entropy_form = Eigen::MatrixXd::Zero(S, A);
  out.logpi_form = Eigen::MatrixXd::Zero(S, A);
  for (int s = 0; s < S; ++s) {
    const Eigen::VectorXd p = pi.probs.row(s).transpose();
    const Eigen::VectorXd q = sv.q.row(s).transpose();
    Eigen::VectorXd logp(A);
    for (int a = 0; a < A; ++a) logp[a] = std::log(p[a]);
    const double h = pi.entropy(s);

    // Eq-16 style: q grad pi + alpha grad H, where
    // dH/dz(b) = -p(b) (log p(b) + H).
    Eigen::VectorXd g_q = logit_grad_of_expectation(p, q);
    Eigen::VectorXd g_h(A);
    for (int b = 0; b < A; ++b) g_h[b] = -p[b] * (logp[b] + h);
    out.entropy_form.row(s) = (eta[s] * (g_q + alpha * g_h)).transpose();

    // Eq-17 style: [q - alpha log pi] grad pi.
    Eigen::VectorXd g_w = logit_grad_of_expectation(p, q - alpha * logp);
    out.logpi_form.row(s) = (eta[s] * g_w).transpose();
  }

  out.finite_diff = Eigen::MatrixXd::Zero(S, A);
  for (int s = 0; s < S; ++s)
    for (int a = 0; a < A; ++a) {
      Eigen::MatrixXd z = pi.logits;
      z(s, a) += fd_step;
      const double up =
          soft_objective(mdp, TabularPolicy::from_logits(z), alpha, kTightTol);
      z(s, a) -= 2.0 * fd_step;
      const double down =
          soft_objective(mdp, TabularPolicy::from_logits(z), alpha, kTightTol);
      out.finite_diff(s, a) = (up - down) / (2.0 * fd_step);
    }
  return out;
}

SchemeEquivalenceReport scheme_equivalence_check(const TabularMdp& mdp,
                                                 const TabularPolicy& pi,
                                                 double alpha, long n_samples,
                                                 Rng& rng) {
  if (!pi.has_logits)
    throw std::invalid_argument("scheme_equivalence_check: needs logits");
  const int S = mdp.n_states, A = mdp.n_actions;
  constexpr double kTightTol = 1e-14;
  SoftValues sv = soft_policy_evaluation(mdp, pi, alpha, kTightTol);

  auto sample_categorical = [&](const Eigen::VectorXd& p) {
    const double u = rng.uniform();
    double cum = 0.0;
    for (int i = 0; i < p.size(); ++i) {
      cum += p[i];
      if (u < cum) return i;
    }
    return static_cast<int>(p.size()) - 1;
  };
  auto sample_p0 = [&]() { return sample_categorical(mdp.p0); };

  Eigen::MatrixXd sum1 = Eigen::MatrixXd::Zero(S, A);
  Eigen::MatrixXd sumsq1 = Eigen::MatrixXd::Zero(S, A);
  Eigen::MatrixXd sum2 = Eigen::MatrixXd::Zero(S, A);
  Eigen::MatrixXd sumsq2 = Eigen::MatrixXd::Zero(S, A);
  const double weight = 1.0 / (1.0 - mdp.gamma);

  for (long k = 0; k < n_samples; ++k) {
    // Draw s from the normalized discounted visitation: run the chain with
    // geometric stopping probability (1 - gamma).
    int s = sample_p0();
    while (rng.uniform() < mdp.gamma) {
      const int a = sample_categorical(pi.probs.row(s).transpose());
      s = sample_categorical(mdp.P[a].row(s).transpose());
    }
    const Eigen::VectorXd p = pi.probs.row(s).transpose();
    const int a = sample_categorical(p);
    const double logp_a = std::log(p[a]);
    const double h = pi.entropy(s);

    // grad log pi(a|s) wrt the state's logits: e_a - p.
    Eigen::VectorXd score = -p;
    score[a] += 1.0;

    // Eq-17 sample: [q - alpha log pi] score.
    Eigen::VectorXd g1 = weight * (sv.q(s, a) - alpha * logp_a) * score;
    // Eq-16 sample: q score + alpha grad H (analytic at s).
    Eigen::VectorXd g2 = weight * sv.q(s, a) * score;
    for (int b = 0; b < A; ++b)
      g2[b] += weight * alpha * (-p[b] * (std::log(p[b]) + h));

    sum1.row(s) += g1.transpose();
    sumsq1.row(s) += g1.cwiseProduct(g1).transpose();
    sum2.row(s) += g2.transpose();
    sumsq2.row(s) += g2.cwiseProduct(g2).transpose();
  }

  SchemeEquivalenceReport rep;
  rep.n_samples = n_samples;
  const double n = static_cast<double>(n_samples);
  rep.mean_logpi_form = sum1 / n;
  rep.mean_entropy_form = sum2 / n;
  rep.se_logpi_form.resize(S, A);
  rep.se_entropy_form.resize(S, A);
  for (int s = 0; s < S; ++s)
    for (int a = 0; a < A; ++a) {
      const double var1 =
          std::max(0.0, sumsq1(s, a) / n - rep.mean_logpi_form(s, a) *
                                               rep.mean_logpi_form(s, a));
      const double var2 =
          std::max(0.0, sumsq2(s, a) / n - rep.mean_entropy_form(s, a) *
                                               rep.mean_entropy_form(s, a));
      rep.se_logpi_form(s, a) = std::sqrt(var1 / n);
      rep.se_entropy_form(s, a) = std::sqrt(var2 / n);
    }

  rep.exact = exact_soft_gradient(mdp, pi, alpha).logpi_form;

  rep.max_z_between_forms = 0.0;
  rep.max_z_vs_exact = 0.0;
  for (int s = 0; s < S; ++s)
    for (int a = 0; a < A; ++a) {
      const double se12 = std::sqrt(rep.se_logpi_form(s, a) * rep.se_logpi_form(s, a) +
                                    rep.se_entropy_form(s, a) * rep.se_entropy_form(s, a));
      const double d12 =
          std::abs(rep.mean_logpi_form(s, a) - rep.mean_entropy_form(s, a));
      if (d12 > 0.0)
        rep.max_z_between_forms =
            std::max(rep.max_z_between_forms, se12 > 0 ? d12 / se12 : 1e300);
      for (const auto* pair :
           {&rep.mean_logpi_form, &rep.mean_entropy_form}) {
        const Eigen::MatrixXd& mean = *pair;
        const Eigen::MatrixXd& se = (pair == &rep.mean_logpi_form)
                                        ? rep.se_logpi_form
                                        : rep.se_entropy_form;
        const double d = std::abs(mean(s, a) - rep.exact(s, a));
        if (d > 0.0)
          rep.max_z_vs_exact =
              std::max(rep.max_z_vs_exact, se(s, a) > 0 ? d / se(s, a) : 1e300);
      }
    }
  rep.forms_agree = rep.max_z_between_forms <= 3.0;
  rep.match_exact = rep.max_z_vs_exact <= 3.0;
  return rep;
}

}  // namespace softpg
