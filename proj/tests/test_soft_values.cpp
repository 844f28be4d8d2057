#include <doctest.h>

#include <cmath>

#include "softpg/soft_values.hpp"
#include "test_util.hpp"

using namespace softpg;
using softpg_test::make_random_mdp;
using softpg_test::random_logit_policy;
using softpg_test::soft_values_by_solve;

namespace {

TabularMdp single_state_mdp(int n_actions, double reward, double gamma) {
  TabularMdp mdp;
  mdp.n_states = 1;
  mdp.n_actions = n_actions;
  mdp.gamma = gamma;
  mdp.P.assign(n_actions, Eigen::MatrixXd::Ones(1, 1));
  mdp.R.assign(n_actions, Eigen::MatrixXd::Constant(1, 1, reward));
  mdp.p0 = Eigen::VectorXd::Ones(1);
  mdp.validate();
  return mdp;
}

}  // namespace

TEST_CASE("alpha=0 reduces to standard policy evaluation (solve oracle)") {
  Rng rng(200);
  for (int trial = 0; trial < 20; ++trial) {
    auto mdp = make_random_mdp(rng);
    auto pi = random_logit_policy(rng, mdp.n_states, mdp.n_actions);
    SoftValues sv = soft_policy_evaluation(mdp, pi, 0.0);
    Eigen::VectorXd ref = soft_values_by_solve(mdp, pi, 0.0);
    CHECK((sv.v - ref).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("single state, single action: geometric series") {
  auto mdp = single_state_mdp(1, 1.0, 0.5);
  auto pi = TabularPolicy::uniform(1, 1);
  SoftValues sv = soft_policy_evaluation(mdp, pi, 0.0);
  CHECK(sv.v[0] == doctest::Approx(2.0).epsilon(1e-11));
  // Deterministic policy has zero entropy, so alpha does not matter here.
  SoftValues sva = soft_policy_evaluation(mdp, pi, 3.0);
  CHECK(sva.v[0] == doctest::Approx(2.0).epsilon(1e-11));
}

TEST_CASE("pure entropy value: v = 2 ln 2 for uniform 2-action, alpha=1") {
  auto mdp = single_state_mdp(2, 0.0, 0.5);
  auto pi = TabularPolicy::uniform(1, 2);
  SoftValues sv = soft_policy_evaluation(mdp, pi, 1.0);
  // Independent route: geometric series of the per-step entropy bonus.
  double series = 0.0;
  for (int k = 60; k >= 0; --k) series = std::log(2.0) + 0.5 * series;
  CHECK(sv.v[0] == doctest::Approx(series).epsilon(1e-11));
  CHECK(sv.v[0] == doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-11));
  CHECK(sv.v[0] == doctest::Approx(1.386294).epsilon(1e-6));
}

TEST_CASE("soft Bellman consistency at the fixed point") {
  Rng rng(201);
  for (int trial = 0; trial < 20; ++trial) {
    auto mdp = make_random_mdp(rng);
    auto pi = random_logit_policy(rng, mdp.n_states, mdp.n_actions);
    const double alpha = rng.uniform(0.0, 1.0);
    SoftValues sv = soft_policy_evaluation(mdp, pi, alpha);
    for (int s = 0; s < mdp.n_states; ++s) {
      // Eq. 5: v(s) = E_a q(s,a)
      CHECK(std::abs(sv.v[s] - pi.probs.row(s).dot(sv.q.row(s))) < 1e-10);
      // Eq. 6: q(s,a) = E_s'[r + alpha H(s) + gamma v(s')]
      for (int a = 0; a < mdp.n_actions; ++a) {
        double rhs = alpha * pi.entropy(s);
        for (int next = 0; next < mdp.n_states; ++next)
          rhs += mdp.P[a](s, next) *
                 (mdp.R[a](s, next) + mdp.gamma * sv.v[next]);
        CHECK(std::abs(sv.q(s, a) - rhs) < 1e-10);
      }
    }
  }
}

TEST_CASE("fixed point matches independent linear solve for alpha > 0") {
  Rng rng(202);
  for (int trial = 0; trial < 10; ++trial) {
    auto mdp = make_random_mdp(rng);
    auto pi = random_logit_policy(rng, mdp.n_states, mdp.n_actions);
    const double alpha = rng.uniform(0.1, 2.0);
    SoftValues sv = soft_policy_evaluation(mdp, pi, alpha);
    Eigen::VectorXd ref = soft_values_by_solve(mdp, pi, alpha);
    CHECK((sv.v - ref).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("iteration limit reported") {
  auto mdp = single_state_mdp(1, 1.0, 0.9);
  auto pi = TabularPolicy::uniform(1, 1);
  CHECK_THROWS_AS(soft_policy_evaluation(mdp, pi, 0.0, 1e-12, 3),
                  std::runtime_error);
}

TEST_CASE("soft objective: point-mass start picks v(s0)") {
  auto mdp = make_chain(3, 0.1, {}, 0.9);
  auto pi = TabularPolicy::uniform(3, 2);
  SoftValues sv = soft_policy_evaluation(mdp, pi, 0.3);
  CHECK(soft_objective(mdp, pi, 0.3) == doctest::Approx(sv.v[0]).epsilon(1e-12));
}

TEST_CASE("soft objective: reward-free MDP with alpha=0 is zero") {
  auto mdp = single_state_mdp(3, 0.0, 0.9);
  auto pi = TabularPolicy::uniform(1, 3);
  CHECK(soft_objective(mdp, pi, 0.0) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("soft objective matches Monte-Carlo rollouts of the soft return") {
  auto mdp = make_chain(3, 0.1, {}, 0.9);
  auto pi = TabularPolicy::uniform(3, 2);
  const double alpha = 0.5;
  const double exact = soft_objective(mdp, pi, alpha);

  Rng rng(4242);
  const long n = 1000000;
  const int horizon = 200;  // gamma^200 ~ 7e-10, negligible truncation
  double sum = 0.0, sumsq = 0.0;
  const double h_uniform = std::log(2.0);
  for (long k = 0; k < n; ++k) {
    int s = 0;
    double ret = 0.0, discount = 1.0;
    for (int t = 0; t < horizon; ++t) {
      const int a = rng.uniform() < 0.5 ? 0 : 1;
      const double u = rng.uniform();
      double cum = 0.0;
      int next = mdp.n_states - 1;
      for (int cand = 0; cand < mdp.n_states; ++cand) {
        cum += mdp.P[a](s, cand);
        if (u < cum) {
          next = cand;
          break;
        }
      }
      ret += discount * (mdp.R[a](s, next) + alpha * h_uniform);
      discount *= mdp.gamma;
      s = next;
    }
    sum += ret;
    sumsq += ret * ret;
  }
  const double mean = sum / n;
  const double se = std::sqrt((sumsq / n - mean * mean) / n);
  CHECK(std::abs(mean - exact) < 3 * se);
}

TEST_CASE("reward-free MDP: v nondecreasing in alpha") {
  Rng rng(203);
  auto mdp = make_random_mdp(rng);
  for (auto& r : mdp.R) r.setZero();
  auto pi = random_logit_policy(rng, mdp.n_states, mdp.n_actions);
  Eigen::VectorXd prev = soft_policy_evaluation(mdp, pi, 0.0).v;
  for (double alpha : {0.1, 0.25, 0.5, 1.0, 2.0}) {
    Eigen::VectorXd v = soft_policy_evaluation(mdp, pi, alpha).v;
    for (int s = 0; s < mdp.n_states; ++s) CHECK(v[s] >= prev[s] - 1e-12);
    prev = v;
  }
}

TEST_CASE("chain from make_chain: uniform-policy v equals solve oracle") {
  auto mdp = make_chain(2, 0.0, {}, 0.5);
  auto pi = TabularPolicy::uniform(2, 2);
  SoftValues sv = soft_policy_evaluation(mdp, pi, 0.7);
  Eigen::VectorXd ref = soft_values_by_solve(mdp, pi, 0.7);
  CHECK((sv.v - ref).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("SPGT: both exact forms agree to 1e-12 (scaled)") {
  Rng rng(204);
  for (int trial = 0; trial < 20; ++trial) {
    auto mdp = make_random_mdp(rng);
    auto pi = random_logit_policy(rng, mdp.n_states, mdp.n_actions);
    const double alpha = rng.uniform(0.0, 1.0);
    auto g = exact_soft_gradient(mdp, pi, alpha);
    const double scale =
        std::max(1.0, g.logpi_form.cwiseAbs().maxCoeff());
    CHECK((g.entropy_form - g.logpi_form).cwiseAbs().maxCoeff() <
          1e-12 * scale);
  }
}

TEST_CASE("SPGT: alpha=0 classic policy gradient matches FD within 1e-8") {
  auto mdp = make_chain(3, 0.1, {}, 0.9);
  Rng rng(205);
  auto pi = random_logit_policy(rng, 3, 2);
  auto g = exact_soft_gradient(mdp, pi, 0.0);
  const double scale = std::max(1.0, g.finite_diff.cwiseAbs().maxCoeff());
  CHECK((g.logpi_form - g.finite_diff).cwiseAbs().maxCoeff() < 1e-8 * scale);
}

TEST_CASE("SPGT: matches finite differences on a random MDP, alpha=0.7") {
  Rng rng(206);
  TabularMdp mdp;
  // fixed 4-state 3-action shape
  do {
    mdp = make_random_mdp(rng, 6, 4);
  } while (mdp.n_states != 4 || mdp.n_actions != 3);
  auto pi = random_logit_policy(rng, 4, 3);
  auto g = exact_soft_gradient(mdp, pi, 0.7);
  const double denom = std::max(g.logpi_form.cwiseAbs().maxCoeff(),
                                g.finite_diff.cwiseAbs().maxCoeff());
  CHECK((g.logpi_form - g.finite_diff).cwiseAbs().maxCoeff() / denom < 1e-6);
}

TEST_CASE("SPGT: gradient vanishes at an interior optimum") {
  auto mdp = make_chain(3, 0.1, {}, 0.9);
  Rng rng(207);
  auto pi = random_logit_policy(rng, 3, 2);
  // Gradient ascent to stationarity; the soft objective has an interior
  // optimum for alpha > 0.
  const double alpha = 0.5;
  Eigen::MatrixXd z = pi.logits;
  for (int it = 0; it < 4000; ++it) {
    auto g = exact_soft_gradient(mdp, TabularPolicy::from_logits(z), alpha);
    z += 0.5 * g.logpi_form;
  }
  auto g = exact_soft_gradient(mdp, TabularPolicy::from_logits(z), alpha);
  CHECK(g.logpi_form.cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("scheme equivalence: MC forms agree with exact at 1e5 samples") {
  auto mdp = make_chain(3, 0.1, {}, 0.9);
  Rng rng(208);
  auto pi = random_logit_policy(rng, 3, 2);
  Rng mc(209);
  auto rep = scheme_equivalence_check(mdp, pi, 0.5, 100000, mc);
  CHECK(rep.forms_agree);
  CHECK(rep.match_exact);
  CHECK(rep.n_samples == 100000);
}

TEST_CASE("scheme equivalence: single-action MDP gives exactly zero") {
  auto mdp = single_state_mdp(1, 1.0, 0.5);
  auto pi = TabularPolicy::from_logits(Eigen::MatrixXd::Zero(1, 1));
  Rng mc(210);
  auto rep = scheme_equivalence_check(mdp, pi, 0.5, 1000, mc);
  CHECK(rep.mean_logpi_form.cwiseAbs().maxCoeff() == 0.0);
  CHECK(rep.mean_entropy_form.cwiseAbs().maxCoeff() == 0.0);
  CHECK(rep.exact.cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("tabular policy validation") {
  auto pi = TabularPolicy::uniform(3, 4);
  pi.validate();
  Rng rng(211);
  auto pl = random_logit_policy(rng, 5, 3, 10.0);
  pl.validate();
  for (int s = 0; s < 5; ++s)
    CHECK(std::abs(pl.probs.row(s).sum() - 1.0) <= 1e-12);
  pi.probs(0, 0) += 1e-6;
  CHECK_THROWS_AS(pi.validate(), std::invalid_argument);
}
