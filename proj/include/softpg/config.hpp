#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace softpg {

// Every knob of a training run. Defaults mirror the usual PPO settings
// (clip 0.2, gamma 0.99, lambda 0.95, 10 epochs, minibatch 64, lr 3e-4,
// horizon 2048) and standard SAC settings for the off-policy path.
struct RunConfig {
  std::string algo = "sppo";  // sppo | ppo | spg | sddpg
  std::string env = "pendulum";

  double alpha = 0.2;
  bool auto_alpha = false;
  double target_entropy = 0.0;  // resolved to -act_dim when auto_alpha is on
  bool target_entropy_set = false;

  double clip = 0.2;
  double gamma = 0.99;
  double lam = 0.95;
  int horizon = 2048;
  int epochs = 10;
  int minibatch = 64;
  double lr_policy = 3e-4;
  double lr_value = 3e-4;
  double lr_alpha = 3e-3;
  int sigma_scheme = 1;  // Table rows 1-4
  int loss_scheme = 2;   // 1 | 2
  long total_steps = 150000;
  std::uint64_t seed = 0;
  int eval_episodes = 100;
  int eval_every = 10;  // iterations between evaluation rows
  bool normalize_adv = true;
  std::vector<int> hidden = {64, 64};

  // off-policy (sddpg) settings
  long buffer_capacity = 100000;
  double tau = 0.005;
  int sddpg_batch = 256;
  long start_steps = 1000;       // uniform-random warmup actions
  long log_every_steps = 1000;   // env steps per metrics row

  // Throws std::invalid_argument with a descriptive message.
  void validate() const;
};

// Sets one key; throws on unknown keys or unparsable values.
void config_set(RunConfig& cfg, const std::string& key,
                const std::string& value);

// Flat key=value file, one per line, '#' comments. Unknown keys are hard
// errors.
RunConfig load_config_file(const std::string& path);
void apply_config_file(RunConfig& cfg, const std::string& path);

}  // namespace softpg
