// Longer-horizon training smokes for the three updater families. These are
// deterministic end-to-end runs with regression thresholds well below the
// observed results, kept out of the fast unit binary.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>

#include "softpg/harness.hpp"
#include "softpg/soft_values.hpp"
#include "softpg/sppo.hpp"

using namespace softpg;
using Eigen::VectorXd;

namespace {

std::string work_dir(const std::string& tag) {
  auto p = std::filesystem::temp_directory_path() / ("softpg_integ_" + tag);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p.string();
}

}  // namespace

TEST_CASE("sddpg learns pendulum swing-up within 12k steps") {
  RunConfig cfg;
  cfg.algo = "sddpg";
  cfg.env = "pendulum";
  cfg.alpha = 0.2;
  cfg.sigma_scheme = 2;  // state-dependent sigma, the SAC1-style head
  cfg.hidden = {64, 64};
  cfg.sddpg_batch = 256;
  cfg.start_steps = 1000;
  cfg.total_steps = 12000;
  cfg.log_every_steps = 1000;
  cfg.eval_every = 4;
  cfg.eval_episodes = 10;
  cfg.seed = 0;
  TrainResult res = run_training(cfg, work_dir("sddpg"));
  auto rows = read_metrics_csv(res.metrics_path);
  REQUIRE(rows.size() >= 2);
  const double initial = rows.front().mean_episode_return;
  CHECK(initial < -900.0);  // untrained policy hangs
  CHECK(res.final_eval_mean > -800.0);
  CHECK(res.final_eval_mean > initial + 300.0);
}

TEST_CASE("sppo learns cartpole balancing") {
  RunConfig cfg;
  cfg.algo = "sppo";
  cfg.env = "cartpole";
  cfg.alpha = 0.01;
  cfg.gamma = 0.99;
  cfg.horizon = 512;
  cfg.epochs = 8;
  cfg.minibatch = 64;
  cfg.hidden = {32};
  cfg.lr_policy = 1e-3;
  cfg.lr_value = 1e-3;
  cfg.total_steps = 10240;
  cfg.eval_episodes = 10;
  cfg.eval_every = 5;
  cfg.seed = 1;
  TrainResult res = run_training(cfg, work_dir("cartpole"));
  auto rows = read_metrics_csv(res.metrics_path);
  const double initial = rows.front().mean_episode_return;
  CHECK(initial < 100.0);
  CHECK(res.final_eval_mean >= 150.0);
  CHECK(res.final_eval_mean > 2.0 * initial);
}

TEST_CASE("spg improves the soft objective on the chain") {
  RunConfig cfg;
  cfg.algo = "spg";
  cfg.env = "chain";
  cfg.alpha = 0.1;
  cfg.gamma = 0.9;
  cfg.horizon = 512;
  cfg.hidden = {16};
  cfg.lr_policy = 3e-3;
  cfg.lr_value = 3e-3;
  cfg.seed = 2;
  OnPolicyTrainer trainer(cfg);
  TabularMdp mdp = make_chain(3, 0.1, {}, 0.9);

  auto exact_j = [&]() {
    Eigen::MatrixXd logits(3, 2);
    for (int s = 0; s < 3; ++s) {
      VectorXd onehot = VectorXd::Zero(3);
      onehot[s] = 1.0;
      logits.row(s) =
          trainer.policy().categorical().eval(onehot).logits.transpose();
    }
    return soft_objective(mdp, TabularPolicy::from_logits(logits), 0.1);
  };

  const double before = exact_j();
  for (int it = 0; it < 60; ++it) trainer.run_iteration();
  const double after = exact_j();
  CHECK(after > before + 1.0);
  CHECK(after > 6.5);  // exhaustive optimum is ~7.86
}

TEST_CASE("auto-tuned alpha stays inside (1e-4, 10) on a pendulum run") {
  RunConfig cfg;
  cfg.algo = "sppo";
  cfg.env = "pendulum";
  cfg.alpha = 0.2;
  cfg.auto_alpha = true;
  cfg.gamma = 0.9;
  cfg.horizon = 1024;
  cfg.hidden = {32, 32};
  cfg.total_steps = 20000;
  cfg.eval_episodes = 5;
  cfg.eval_every = 2;
  cfg.seed = 3;
  TrainResult res = run_training(cfg, work_dir("auto_alpha"));
  auto rows = read_metrics_csv(res.metrics_path);
  bool moved = false;
  for (const auto& row : rows) {
    CHECK(row.alpha > 1e-4);
    CHECK(row.alpha < 10.0);
    if (row.alpha != rows.front().alpha) moved = true;
  }
  CHECK(moved);
}

TEST_CASE("sddpg rejects discrete-action environments") {
  RunConfig cfg;
  cfg.algo = "sddpg";
  cfg.env = "cartpole";
  CHECK_THROWS_AS(run_training(cfg, work_dir("sddpg_disc")),
                  std::invalid_argument);
}
