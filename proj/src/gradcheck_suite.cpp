#include <chrono>
#include <sstream>

#include "softpg/harness.hpp"
#include "softpg/losses.hpp"
#include "softpg/sddpg.hpp"

namespace softpg {

namespace {

constexpr double kThreshold = 1e-5;

GaussianHead random_gaussian(Rng& rng, SigmaScheme scheme, bool squashed) {
  GaussianHead head(2, 1, {6}, scheme, squashed, Eigen::VectorXd::Constant(1, -2),
                    Eigen::VectorXd::Constant(1, 2), rng);
  // Move off the zero-initialized local rows (scheme 4's clip kink).
  Eigen::VectorXd p = head.flatten();
  for (long i = 0; i < p.size(); ++i) p[i] += rng.uniform(-0.3, 0.3);
  head.set_from_flat(p);
  return head;
}

Batch gaussian_batch(const GaussianHead& behavior, int n, Rng& rng) {
  Batch batch;
  for (int i = 0; i < n; ++i) {
    BatchSample s;
    s.state = Eigen::VectorXd(2);
    s.state << rng.uniform(-1, 1), rng.uniform(-1, 1);
    auto ev = behavior.eval(s.state);
    auto [a, logp] = behavior.sample(ev, rng);
    s.action.cont = a;
    s.logp_behavior = logp;
    s.advantage = rng.uniform(-2, 2);
    s.reward_to_go = rng.uniform(-2, 2);
    batch.push_back(std::move(s));
  }
  return batch;
}

Batch categorical_batch(const CategoricalHead& behavior, int n, Rng& rng) {
  Batch batch;
  for (int i = 0; i < n; ++i) {
    BatchSample s;
    s.state = Eigen::VectorXd(3);
    for (int d = 0; d < 3; ++d) s.state[d] = rng.uniform(-1, 1);
    auto ev = behavior.eval(s.state);
    auto [a, logp] = behavior.sample(ev, rng);
    s.action.disc = a;
    s.logp_behavior = logp;
    s.advantage = rng.uniform(-2, 2);
    s.reward_to_go = rng.uniform(-2, 2);
    batch.push_back(std::move(s));
  }
  return batch;
}

SigmaScheme scheme_cycle(int point) {
  switch (point % 4) {
    case 0: return SigmaScheme::GlobalSigma;
    case 1: return SigmaScheme::LocalSigma;
    case 2: return SigmaScheme::GlobalTimesLocal;
    default: return SigmaScheme::GlobalTimesClippedLocal;
  }
}

}  // namespace

GradCheckReport run_gradcheck_suite(int points, std::uint64_t seed) {
  const auto t0 = std::chrono::steady_clock::now();
  GradCheckReport report;

  auto add_entry = [&](const std::string& name, auto&& one_point) {
    GradCheckEntry entry;
    entry.name = name;
    entry.points = points;
    for (int p = 0; p < points; ++p) {
      Rng rng(mix64(seed ^ (static_cast<std::uint64_t>(p) * 7919 + 13)) ^
              mix64(std::hash<std::string>{}(name)));
      entry.max_rel_err = std::max(entry.max_rel_err, one_point(p, rng));
    }
    entry.passed = entry.max_rel_err < kThreshold;
    report.entries.push_back(entry);
  };

  // Eq. 37: squared-error value loss.
  add_entry("value_loss_eq37", [&](int, Rng& rng) {
    Mlp net({3, 6, 1}, Activation::Tanh, rng);
    Batch batch;
    for (int i = 0; i < 4; ++i) {
      BatchSample s;
      s.state = Eigen::VectorXd(3);
      for (int d = 0; d < 3; ++d) s.state[d] = rng.uniform(-1, 1);
      s.reward_to_go = rng.uniform(-2, 2);
      batch.push_back(std::move(s));
    }
    GradBuffer grad = net.make_grad_buffer();
    value_loss(net, batch, &grad);
    Mlp probe = net;
    auto loss = [&](const Eigen::VectorXd& p) {
      probe.set_from_flat(p);
      return value_loss(probe, batch, nullptr);
    };
    return grad_check(loss, net.flatten(), grad.flatten());
  });

  // Eqs. 42 / 44: the two SPPO policy losses, Gaussian heads, all four
  // sigma schemes in rotation.
  for (auto scheme_pair :
       {std::pair<std::string, LossScheme>{"sppo_scheme2_eq42_gaussian",
                                           LossScheme::Scheme2},
        std::pair<std::string, LossScheme>{"sppo_scheme1_eq44_gaussian",
                                           LossScheme::Scheme1}}) {
    add_entry(scheme_pair.first, [&, scheme_pair](int point, Rng& rng) {
      auto behavior = random_gaussian(rng, scheme_cycle(point), false);
      auto current = random_gaussian(rng, scheme_cycle(point), false);
      Batch batch = gaussian_batch(behavior, 4, rng);
      const double alpha = rng.uniform(0.05, 0.5);
      auto grad = current.make_grad();
      clipped_surrogate(current, batch, scheme_pair.second, alpha, 0.2, &grad);
      auto probe = current;
      auto loss = [&](const Eigen::VectorXd& p) {
        probe.set_from_flat(p);
        return clipped_surrogate_objective(probe, batch, scheme_pair.second,
                                           alpha, 0.2);
      };
      return grad_check(loss, current.flatten(), grad.flatten());
    });
  }

  for (auto scheme_pair :
       {std::pair<std::string, LossScheme>{"sppo_scheme2_eq42_categorical",
                                           LossScheme::Scheme2},
        std::pair<std::string, LossScheme>{"sppo_scheme1_eq44_categorical",
                                           LossScheme::Scheme1}}) {
    add_entry(scheme_pair.first, [&, scheme_pair](int, Rng& rng) {
      CategoricalHead behavior(3, 3, {6}, rng);
      CategoricalHead current(3, 3, {6}, rng);
      Batch batch = categorical_batch(behavior, 4, rng);
      const double alpha = rng.uniform(0.05, 0.5);
      auto grad = current.make_grad();
      clipped_surrogate(current, batch, scheme_pair.second, alpha, 0.2, &grad);
      auto probe = current;
      auto loss = [&](const Eigen::VectorXd& p) {
        probe.set_from_flat(p);
        return clipped_surrogate_objective(probe, batch, scheme_pair.second,
                                           alpha, 0.2);
      };
      return grad_check(loss, current.flatten(), grad.flatten());
    });
  }

  // Eq. 17 sample form: the SPG surrogate.
  add_entry("spg_eq17_surrogate", [&](int point, Rng& rng) {
    auto head = random_gaussian(rng, scheme_cycle(point), false);
    Batch batch = gaussian_batch(head, 4, rng);
    const double alpha = rng.uniform(0.0, 0.5);
    auto grad = head.make_grad();
    spg_surrogate(head, batch, alpha, &grad);
    auto probe = head;
    auto loss = [&](const Eigen::VectorXd& p) {
      probe.set_from_flat(p);
      return spg_surrogate(probe, batch, alpha,
                           static_cast<GaussianGrad*>(nullptr));
    };
    return grad_check(loss, head.flatten(), grad.flatten());
  });

  // Eq. 36: reparametrized soft policy objective with twin Q.
  add_entry("sddpg_policy_eq36", [&](int point, Rng& rng) {
    auto head = random_gaussian(rng, scheme_cycle(point), true);
    Mlp q1({3, 6, 1}, Activation::Relu, rng);
    Mlp q2({3, 6, 1}, Activation::Relu, rng);
    std::vector<ReplayTransition> storage(4);
    std::vector<const ReplayTransition*> batch;
    std::vector<Eigen::VectorXd> noise;
    for (int i = 0; i < 4; ++i) {
      storage[i].state = Eigen::VectorXd(2);
      storage[i].state << rng.uniform(-1, 1), rng.uniform(-1, 1);
      batch.push_back(&storage[i]);
      noise.push_back(Eigen::VectorXd::Constant(1, rng.normal()));
    }
    const double alpha = rng.uniform(0.0, 0.5);
    auto grad = head.make_grad();
    sddpg_policy_gradient(head, q1, q2, batch, noise, alpha, &grad);
    auto probe = head;
    auto obj = [&](const Eigen::VectorXd& p) {
      probe.set_from_flat(p);
      return sddpg_policy_gradient(probe, q1, q2, batch, noise, alpha, nullptr);
    };
    return grad_check(obj, head.flatten(), grad.flatten());
  });

  report.seconds = std::chrono::duration<double>(
                       std::chrono::steady_clock::now() - t0)
                       .count();
  report.all_passed = true;
  for (const auto& e : report.entries) report.all_passed &= e.passed;
  return report;
}

std::string GradCheckReport::to_text() const {
  std::ostringstream out;
  for (const auto& e : entries) {
    out << (e.passed ? "PASS" : "FAIL") << "  " << e.name << "  max_rel_err="
        << e.max_rel_err << "  points=" << e.points << "\n";
  }
  out << (all_passed ? "PASS" : "FAIL") << "  gradcheck suite  ("
      << seconds << " s)\n";
  return out.str();
}

}  // namespace softpg
