// Experiment CLI over the softpg C API.

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "softpg.h"

namespace {

struct ConfigHandle {
  softpg_config* ptr = nullptr;
  ConfigHandle() : ptr(softpg_config_new()) {}
  ~ConfigHandle() { softpg_config_free(ptr); }
  ConfigHandle(const ConfigHandle&) = delete;
  ConfigHandle& operator=(const ConfigHandle&) = delete;
};

struct OwnedString {
  char* ptr = nullptr;
  ~OwnedString() { softpg_string_free(ptr); }
};

[[noreturn]] void die(softpg_status rc) {
  std::fprintf(stderr, "error: %s\n", softpg_last_error());
  std::exit(rc == SOFTPG_ERR_ARG ? 1 : 2);
}

void check(softpg_status rc) {
  if (rc != SOFTPG_OK) die(rc);
}

// Flag storage for `train`: values only applied when the flag was given,
// so CLI flags override config-file values.
struct TrainFlags {
  std::string config_path;
  std::string out = "run_out";
  std::string algo, env, alpha, auto_alpha, clip, gamma, lam, sigma_scheme,
      loss_scheme, steps, seed;
};

void apply_flag(softpg_config* cfg, const CLI::Option* opt,
                const std::string& key, const std::string& value) {
  if (opt->count() > 0) check(softpg_config_set(cfg, key.c_str(), value.c_str()));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"soft policy gradient experiments"};
  app.require_subcommand(1);

  // train ------------------------------------------------------------------
  TrainFlags tf;
  CLI::App* train = app.add_subcommand("train", "run one training config");
  train->add_option("--config", tf.config_path, "key=value config file");
  train->add_option("--out", tf.out, "output directory");
  auto* f_algo = train->add_option("--algo", tf.algo, "sppo|ppo|spg|sddpg");
  auto* f_env = train->add_option("--env", tf.env, "pendulum|cartpole|chain|mdp:<path>");
  auto* f_alpha = train->add_option("--alpha", tf.alpha, "entropy temperature");
  auto* f_auto = train->add_option("--auto-alpha", tf.auto_alpha, "0|1 temperature auto-tuning");
  auto* f_clip = train->add_option("--clip", tf.clip, "PPO clip epsilon");
  auto* f_gamma = train->add_option("--gamma", tf.gamma, "discount");
  auto* f_lam = train->add_option("--lam", tf.lam, "GAE lambda");
  auto* f_sigma = train->add_option("--sigma-scheme", tf.sigma_scheme,
                                    "1 global | 2 local | 3 global*local | 4 clipped");
  auto* f_loss = train->add_option("--loss-scheme", tf.loss_scheme, "1|2");
  auto* f_steps = train->add_option("--steps", tf.steps, "total env steps");
  auto* f_seed = train->add_option("--seed", tf.seed, "master seed");

  // eval -------------------------------------------------------------------
  std::string ev_policy, ev_env = "pendulum";
  int ev_episodes = 100;
  std::uint64_t ev_seed = 0;
  CLI::App* eval = app.add_subcommand("eval", "evaluate a serialized policy");
  eval->add_option("--policy", ev_policy, "policy.bin path")->required();
  eval->add_option("--env", ev_env, "environment name");
  eval->add_option("--episodes", ev_episodes, "evaluation episodes");
  eval->add_option("--seed", ev_seed, "evaluation seed");

  // compare ----------------------------------------------------------------
  std::string cmp_a, cmp_b, cmp_out = "compare_out";
  int cmp_seeds = 5;
  CLI::App* compare = app.add_subcommand("compare", "paired A/B runs over seeds");
  compare->add_option("--config-a", cmp_a, "config file for A")->required();
  compare->add_option("--config-b", cmp_b, "config file for B")->required();
  compare->add_option("--seeds", cmp_seeds, "number of paired seeds");
  compare->add_option("--out", cmp_out, "output directory");

  // oracle -----------------------------------------------------------------
  std::string or_mdp;
  double or_alpha = 0.0;
  long or_samples = 100000;
  std::uint64_t or_seed = 0;
  CLI::App* oracle = app.add_subcommand("oracle", "exact soft values and gradients");
  oracle->add_option("--mdp", or_mdp, "text-spec MDP file")->required();
  oracle->add_option("--alpha", or_alpha, "entropy temperature");
  oracle->add_option("--samples", or_samples, "Monte-Carlo samples");
  oracle->add_option("--seed", or_seed, "Monte-Carlo seed");

  // gradcheck --------------------------------------------------------------
  int gc_points = 100;
  std::uint64_t gc_seed = 0;
  CLI::App* gradcheck =
      app.add_subcommand("gradcheck", "finite-difference gradient suite");
  gradcheck->add_option("--points", gc_points, "random parameter points per loss");
  gradcheck->add_option("--seed", gc_seed, "suite seed");

  CLI11_PARSE(app, argc, argv);

  if (train->parsed()) {
    ConfigHandle cfg;
    if (!cfg.ptr) return 2;
    if (!tf.config_path.empty())
      check(softpg_config_load(cfg.ptr, tf.config_path.c_str()));
    apply_flag(cfg.ptr, f_algo, "algo", tf.algo);
    apply_flag(cfg.ptr, f_env, "env", tf.env);
    apply_flag(cfg.ptr, f_alpha, "alpha", tf.alpha);
    apply_flag(cfg.ptr, f_auto, "auto_alpha", tf.auto_alpha);
    apply_flag(cfg.ptr, f_clip, "clip", tf.clip);
    apply_flag(cfg.ptr, f_gamma, "gamma", tf.gamma);
    apply_flag(cfg.ptr, f_lam, "lam", tf.lam);
    apply_flag(cfg.ptr, f_sigma, "sigma_scheme", tf.sigma_scheme);
    apply_flag(cfg.ptr, f_loss, "loss_scheme", tf.loss_scheme);
    apply_flag(cfg.ptr, f_steps, "total_steps", tf.steps);
    apply_flag(cfg.ptr, f_seed, "seed", tf.seed);
    check(softpg_config_validate(cfg.ptr));
    double mean = 0.0, stddev = 0.0;
    check(softpg_train(cfg.ptr, tf.out.c_str(), &mean, &stddev));
    std::printf("final_eval_mean %.17g\nfinal_eval_stddev %.17g\n", mean,
                stddev);
    std::printf("metrics %s/metrics.csv\npolicy %s/policy.bin\n",
                tf.out.c_str(), tf.out.c_str());
    return 0;
  }

  if (eval->parsed()) {
    double mean = 0.0, stddev = 0.0;
    check(softpg_evaluate(ev_policy.c_str(), ev_env.c_str(), ev_episodes,
                          ev_seed, &mean, &stddev));
    std::printf("mean_return %.17g\nstddev_return %.17g\n", mean, stddev);
    return 0;
  }

  if (compare->parsed()) {
    ConfigHandle a, b;
    if (!a.ptr || !b.ptr) return 2;
    check(softpg_config_load(a.ptr, cmp_a.c_str()));
    check(softpg_config_load(b.ptr, cmp_b.c_str()));
    OwnedString report;
    check(softpg_compare(a.ptr, b.ptr, cmp_seeds, cmp_out.c_str(),
                         &report.ptr));
    std::printf("%s\n", report.ptr);
    return 0;
  }

  if (oracle->parsed()) {
    OwnedString report;
    check(softpg_oracle(or_mdp.c_str(), or_alpha, or_samples, or_seed,
                        &report.ptr));
    std::printf("%s", report.ptr);
    return 0;
  }

  if (gradcheck->parsed()) {
    OwnedString report;
    softpg_status rc =
        softpg_gradcheck(gc_points, gc_seed, &report.ptr);
    if (report.ptr) std::printf("%s", report.ptr);
    if (rc != SOFTPG_OK) {
      std::fprintf(stderr, "error: %s\n", softpg_last_error());
      return 2;
    }
    return 0;
  }

  return 1;
}
