#include "softpg/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace softpg {

namespace {

bool parse_bool(const std::string& v) {
  if (v == "1" || v == "true" || v == "on" || v == "yes") return true;
  if (v == "0" || v == "false" || v == "off" || v == "no") return false;
  throw std::invalid_argument("config: bad boolean value '" + v + "'");
}

std::vector<int> parse_int_list(const std::string& v) {
  std::vector<int> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    out.push_back(std::stoi(item));
  }
  if (out.empty()) throw std::invalid_argument("config: empty list '" + v + "'");
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

void config_set(RunConfig& cfg, const std::string& key,
                const std::string& value) {
  try {
    if (key == "algo") cfg.algo = value;
    else if (key == "env") cfg.env = value;
    else if (key == "alpha") cfg.alpha = std::stod(value);
    else if (key == "auto_alpha") cfg.auto_alpha = parse_bool(value);
    else if (key == "target_entropy") {
      cfg.target_entropy = std::stod(value);
      cfg.target_entropy_set = true;
    } else if (key == "clip") cfg.clip = std::stod(value);
    else if (key == "gamma") cfg.gamma = std::stod(value);
    else if (key == "lam") cfg.lam = std::stod(value);
    else if (key == "horizon") cfg.horizon = std::stoi(value);
    else if (key == "epochs") cfg.epochs = std::stoi(value);
    else if (key == "minibatch") cfg.minibatch = std::stoi(value);
    else if (key == "lr_policy") cfg.lr_policy = std::stod(value);
    else if (key == "lr_value") cfg.lr_value = std::stod(value);
    else if (key == "lr_alpha") cfg.lr_alpha = std::stod(value);
    else if (key == "sigma_scheme") cfg.sigma_scheme = std::stoi(value);
    else if (key == "loss_scheme") cfg.loss_scheme = std::stoi(value);
    else if (key == "total_steps") cfg.total_steps = std::stol(value);
    else if (key == "seed") cfg.seed = std::stoull(value);
    else if (key == "eval_episodes") cfg.eval_episodes = std::stoi(value);
    else if (key == "eval_every") cfg.eval_every = std::stoi(value);
    else if (key == "normalize_adv") cfg.normalize_adv = parse_bool(value);
    else if (key == "hidden") cfg.hidden = parse_int_list(value);
    else if (key == "buffer_capacity") cfg.buffer_capacity = std::stol(value);
    else if (key == "tau") cfg.tau = std::stod(value);
    else if (key == "sddpg_batch") cfg.sddpg_batch = std::stoi(value);
    else if (key == "start_steps") cfg.start_steps = std::stol(value);
    else if (key == "log_every_steps") cfg.log_every_steps = std::stol(value);
    else
      throw std::invalid_argument("config: unknown key '" + key + "'");
  } catch (const std::invalid_argument&) {
    throw;
  } catch (const std::exception&) {
    throw std::invalid_argument("config: bad value '" + value + "' for key '" +
                                key + "'");
  }
}

void RunConfig::validate() const {
  auto fail = [](const std::string& msg) {
    throw std::invalid_argument("config: " + msg);
  };
  if (algo != "sppo" && algo != "ppo" && algo != "spg" && algo != "sddpg")
    fail("algo must be one of sppo|ppo|spg|sddpg, got '" + algo + "'");
  if (!(clip > 0.0 && clip < 1.0)) fail("clip must be in (0,1)");
  if (!(gamma >= 0.0 && gamma < 1.0)) fail("gamma must be in [0,1)");
  if (!(lam >= 0.0 && lam <= 1.0)) fail("lam must be in [0,1]");
  if (!(alpha >= 0.0)) fail("alpha must be >= 0");
  if (algo == "ppo" && alpha != 0.0)
    fail("ppo is the alpha=0 baseline; set alpha=0 or use sppo");
  if (horizon < 1) fail("horizon must be >= 1");
  if (epochs < 1) fail("epochs must be >= 1");
  if (minibatch < 1) fail("minibatch must be >= 1");
  if (total_steps < 0) fail("total_steps must be >= 0");
  if (eval_episodes < 1) fail("eval_episodes must be >= 1");
  if (eval_every < 1) fail("eval_every must be >= 1");
  if (sigma_scheme < 1 || sigma_scheme > 4) fail("sigma_scheme must be 1..4");
  if (loss_scheme != 1 && loss_scheme != 2) fail("loss_scheme must be 1 or 2");
  if (lr_policy < 0 || lr_value < 0 || lr_alpha < 0)
    fail("learning rates must be >= 0");
  if (hidden.empty()) fail("hidden layer list must not be empty");
  for (int h : hidden)
    if (h < 1) fail("hidden layer sizes must be positive");
  if (buffer_capacity < 1) fail("buffer_capacity must be >= 1");
  if (!(tau > 0.0 && tau <= 1.0)) fail("tau must be in (0,1]");
  if (sddpg_batch < 1) fail("sddpg_batch must be >= 1");
  if (start_steps < 0) fail("start_steps must be >= 0");
  if (log_every_steps < 1) fail("log_every_steps must be >= 1");
}

void apply_config_file(RunConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config: cannot open '" + path + "'");
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config: line " + std::to_string(lineno) +
                                  " is not key=value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw std::invalid_argument("config: empty key at line " +
                                  std::to_string(lineno));
    config_set(cfg, key, value);
  }
}

RunConfig load_config_file(const std::string& path) {
  RunConfig cfg;
  apply_config_file(cfg, path);
  return cfg;
}

}  // namespace softpg
