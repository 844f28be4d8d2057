#pragma once

#include <Eigen/Dense>

#include "softpg/rng.hpp"
#include "softpg/tabular.hpp"

namespace softpg {

// Explicit policy table pi(a|s); optionally logit-parameterized so it can be
// differentiated (softmax keeps every probability strictly positive).
struct TabularPolicy {
  Eigen::MatrixXd probs;   // S x A
  Eigen::MatrixXd logits;  // S x A, only meaningful when has_logits
  bool has_logits = false;

  static TabularPolicy uniform(int n_states, int n_actions);
  static TabularPolicy from_logits(const Eigen::MatrixXd& logits);

  double entropy(int s) const;  // H(pi(.|s))
  void validate() const;
};

struct SoftValues {
  Eigen::VectorXd v;   // |S|
  Eigen::MatrixXd q;   // |S| x |A|
  double alpha = 0.0;
};

// Fixed point of the soft Bellman backups
//   q(s,a) = alpha*H(pi(.|s)) + sum_s' P(s'|s,a) (R(s,a,s') + gamma v(s'))
//   v(s)   = sum_a pi(a|s) q(s,a)
// iterated until the sup-norm change in v falls below tol.
SoftValues soft_policy_evaluation(const TabularMdp& mdp,
                                  const TabularPolicy& pi, double alpha,
                                  double tol = 1e-12, int max_sweeps = 100000);

// J = sum_s p0(s) v(s).
double soft_objective(const TabularMdp& mdp, const TabularPolicy& pi,
                      double alpha, double tol = 1e-12);

// Unnormalized discounted state visitation, eta = p0 + gamma P_pi^T eta,
// solved directly (the MDPs here are tiny).
Eigen::VectorXd discounted_visitation(const TabularMdp& mdp,
                                      const TabularPolicy& pi);

// Exact gradient of the discounted soft objective with respect to the
// policy logits, computed three ways: the two SPGT forms (which are
// algebraically identical) and central finite differences of the objective.
struct ExactSoftGradient {
  Eigen::MatrixXd entropy_form;    // sum_s eta(s) [ sum_a q grad pi + alpha grad H ]
  Eigen::MatrixXd logpi_form;      // sum_s eta(s) sum_a [q - alpha log pi] grad pi
  Eigen::MatrixXd finite_diff;     // central differences of soft_objective
};
ExactSoftGradient exact_soft_gradient(const TabularMdp& mdp,
                                      const TabularPolicy& pi, double alpha,
                                      double fd_step = 1e-5);

// Monte-Carlo comparison of the two SPGT estimator forms: states are drawn
// from the discounted visitation (geometric stopping), actions from pi, and
// each form's per-sample gradient is accumulated per logit.
struct SchemeEquivalenceReport {
  Eigen::MatrixXd mean_entropy_form;
  Eigen::MatrixXd se_entropy_form;
  Eigen::MatrixXd mean_logpi_form;
  Eigen::MatrixXd se_logpi_form;
  Eigen::MatrixXd exact;
  long n_samples = 0;
  double max_z_between_forms = 0.0;  // |m1-m2| / sqrt(se1^2+se2^2)
  double max_z_vs_exact = 0.0;
  bool forms_agree = false;          // within 3 combined standard errors
  bool match_exact = false;
};
SchemeEquivalenceReport scheme_equivalence_check(const TabularMdp& mdp,
                                                 const TabularPolicy& pi,
                                                 double alpha, long n_samples,
                                                 Rng& rng);

}  // namespace softpg
