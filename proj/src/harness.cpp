#include "softpg/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "softpg/sddpg.hpp"
#include "softpg/soft_values.hpp"
#include "softpg/sppo.hpp"

namespace softpg {

namespace {

std::string fmt_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

int rollout_workers() {
  const char* env = std::getenv("SOFTPG_THREADS");
  if (!env) return 1;
  const int n = std::atoi(env);
  return n < 1 ? 1 : n;
}

}  // namespace

std::string metric_csv_header() {
  return "iteration,env_steps,mean_episode_return,mean_entropy,policy_loss,"
         "value_loss,clip_fraction,alpha,wall_time_seconds";
}

std::string metric_row_to_csv(const MetricRow& r) {
  std::ostringstream out;
  out << r.iteration << ',' << r.env_steps << ',' << fmt_real(r.mean_episode_return)
      << ',' << fmt_real(r.mean_entropy) << ',' << fmt_real(r.policy_loss) << ','
      << fmt_real(r.value_loss) << ',' << fmt_real(r.clip_fraction) << ','
      << fmt_real(r.alpha) << ',' << fmt_real(r.wall_time_seconds);
  return out.str();
}

MetricRow parse_metric_row(const std::string& line) {
  MetricRow r;
  std::istringstream in(line);
  std::string field;
  auto next = [&]() {
    if (!std::getline(in, field, ','))
      throw std::invalid_argument("metric row: missing field in '" + line + "'");
    return field;
  };
  r.iteration = std::stol(next());
  r.env_steps = std::stol(next());
  r.mean_episode_return = std::stod(next());
  r.mean_entropy = std::stod(next());
  r.policy_loss = std::stod(next());
  r.value_loss = std::stod(next());
  r.clip_fraction = std::stod(next());
  r.alpha = std::stod(next());
  r.wall_time_seconds = std::stod(next());
  if (std::getline(in, field, ','))
    throw std::invalid_argument("metric row: extra field in '" + line + "'");
  return r;
}

std::vector<MetricRow> read_metrics_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open metrics csv: " + path);
  std::string line;
  if (!std::getline(in, line) || line != metric_csv_header())
    throw std::invalid_argument("metrics csv: bad header in " + path);
  std::vector<MetricRow> rows;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    rows.push_back(parse_metric_row(line));
  }
  return rows;
}

EvalResult evaluate(const Policy& policy, Env& env, int n_episodes, Rng& rng) {
  if (n_episodes < 1)
    throw std::invalid_argument("evaluate: n_episodes must be >= 1");
  double sum = 0.0, sumsq = 0.0;
  for (int ep = 0; ep < n_episodes; ++ep) {
    Eigen::VectorXd state = env.reset(rng);
    double ret = 0.0;
    bool done = false;
    while (!done) {
      Action a = policy.deterministic_action(state);
      if (!env.discrete_actions())
        a.cont = a.cont.cwiseMax(env.act_low()).cwiseMin(env.act_high());
      StepResult res = env.step(a, rng);
      ret += res.r_ext;
      done = res.done;
      state = std::move(res.next_state);
    }
    sum += ret;
    sumsq += ret * ret;
  }
  EvalResult out;
  out.mean = sum / n_episodes;
  out.stddev = std::sqrt(std::max(0.0, sumsq / n_episodes - out.mean * out.mean));
  return out;
}

// ---------------------------------------------------------------------------
// Training driver

namespace {

class CsvWriter {
 public:
  CsvWriter(const std::string& path) : out_(path) {
    if (!out_) throw std::runtime_error("cannot open for writing: " + path);
    out_ << metric_csv_header() << '\n';
    out_.flush();
  }
  void row(const MetricRow& r) {
    out_ << metric_row_to_csv(r) << '\n';
    out_.flush();
  }
  void error_record(const std::string& msg) {
    out_ << "# error: " << msg << '\n';
    out_.flush();
  }

 private:
  std::ofstream out_;
};

double elapsed_seconds(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
      .count();
}

// Off-policy driver around SddpgUpdater.
TrainResult run_sddpg(const RunConfig& cfg, const std::string& out_dir,
                      CsvWriter& csv) {
  auto env = make_env(cfg.env);
  if (env->discrete_actions())
    throw std::invalid_argument("sddpg requires a continuous-action env");
  auto eval_env = env->clone();

  Rng init_rng = Rng::substream(cfg.seed, Stream::Init);
  SddpgUpdater updater(env->obs_dim(), env->act_dim(), env->act_low(),
                       env->act_high(), cfg, init_rng);
  ReplayBuffer buffer(cfg.buffer_capacity);
  Rng env_rng = Rng::substream(cfg.seed, Stream::Env);
  Rng sample_rng = Rng::substream(cfg.seed, Stream::Sample);
  Rng update_rng = Rng::substream(cfg.seed, Stream::Replay);

  const auto t0 = std::chrono::steady_clock::now();
  long eval_index = 0;
  SddpgUpdateMetrics last{};
  last.alpha = updater.alpha();

  auto write_eval_row = [&](long iteration, long steps) {
    Rng eval_rng = Rng::substream(cfg.seed, Stream::Eval,
                                  static_cast<std::uint64_t>(eval_index++));
    Policy snapshot(updater.policy());
    EvalResult ev = evaluate(snapshot, *eval_env, cfg.eval_episodes, eval_rng);
    MetricRow row;
    row.iteration = iteration;
    row.env_steps = steps;
    row.mean_episode_return = ev.mean;
    row.mean_entropy = last.entropy_estimate;
    row.policy_loss = -last.policy_objective;
    row.value_loss = 0.5 * (last.q1_loss + last.q2_loss);
    row.clip_fraction = 0.0;
    row.alpha = last.alpha;
    row.wall_time_seconds = elapsed_seconds(t0);
    csv.row(row);
    return ev;
  };

  EvalResult final_eval = write_eval_row(0, 0);

  Eigen::VectorXd state = env->reset(env_rng);
  const long rows_every = cfg.log_every_steps * cfg.eval_every;
  for (long step = 1; step <= cfg.total_steps; ++step) {
    Action a;
    if (step <= cfg.start_steps) {
      a.cont.resize(env->act_dim());
      for (int d = 0; d < env->act_dim(); ++d)
        a.cont[d] = sample_rng.uniform(env->act_low()[d], env->act_high()[d]);
    } else {
      auto ev = updater.policy().eval(state);
      a.cont = updater.policy().sample(ev, sample_rng).first;
    }
    StepResult res = env->step(a, env_rng);
    ReplayTransition tr;
    tr.state = state;
    tr.action = a.cont;
    tr.reward = res.r_ext;
    tr.next_state = res.next_state;
    tr.done = res.done;
    buffer.push(std::move(tr));
    state = res.done ? env->reset(env_rng) : std::move(res.next_state);

    if (step >= cfg.start_steps) {
      if (auto m = updater.update(buffer, update_rng)) last = *m;
    }
    if (step % rows_every == 0 || step == cfg.total_steps)
      final_eval = write_eval_row(step / cfg.log_every_steps, step);
  }

  TrainResult result;
  result.final_eval_mean = final_eval.mean;
  result.final_eval_stddev = final_eval.stddev;
  result.env_steps = cfg.total_steps;
  result.policy_path = out_dir + "/policy.bin";
  save_policy(result.policy_path, Policy(updater.policy()));
  return result;
}

TrainResult run_on_policy(const RunConfig& cfg, const std::string& out_dir,
                          CsvWriter& csv) {
  OnPolicyTrainer trainer(cfg, rollout_workers());
  auto eval_env = make_env(cfg.env);
  const auto t0 = std::chrono::steady_clock::now();
  long eval_index = 0;
  IterationMetrics last{};
  last.alpha = trainer.alpha();

  auto write_eval_row = [&]() {
    Rng eval_rng = Rng::substream(cfg.seed, Stream::Eval,
                                  static_cast<std::uint64_t>(eval_index++));
    EvalResult ev =
        evaluate(trainer.policy(), *eval_env, cfg.eval_episodes, eval_rng);
    MetricRow row;
    row.iteration = trainer.iteration();
    row.env_steps = trainer.env_steps();
    row.mean_episode_return = ev.mean;
    row.mean_entropy = last.mean_entropy;
    row.policy_loss = last.policy_loss;
    row.value_loss = last.value_loss;
    row.clip_fraction = last.clip_fraction;
    row.alpha = last.alpha;
    row.wall_time_seconds = elapsed_seconds(t0);
    csv.row(row);
    return ev;
  };

  EvalResult final_eval = write_eval_row();
  while (trainer.env_steps() < cfg.total_steps) {
    last = trainer.run_iteration();
    const bool finished = trainer.env_steps() >= cfg.total_steps;
    if (trainer.iteration() % cfg.eval_every == 0 || finished)
      final_eval = write_eval_row();
  }

  TrainResult result;
  result.final_eval_mean = final_eval.mean;
  result.final_eval_stddev = final_eval.stddev;
  result.env_steps = trainer.env_steps();
  result.policy_path = out_dir + "/policy.bin";
  save_policy(result.policy_path, trainer.policy());
  return result;
}

}  // namespace

TrainResult run_training(const RunConfig& cfg, const std::string& out_dir) {
  cfg.validate();
  std::filesystem::create_directories(out_dir);
  const std::string metrics_path = out_dir + "/metrics.csv";
  CsvWriter csv(metrics_path);
  try {
    TrainResult result = cfg.algo == "sddpg" ? run_sddpg(cfg, out_dir, csv)
                                             : run_on_policy(cfg, out_dir, csv);
    result.metrics_path = metrics_path;
    return result;
  } catch (const std::exception& e) {
    csv.error_record(e.what());
    std::ofstream err(out_dir + "/error.txt");
    err << e.what() << '\n';
    throw;
  }
}

// ---------------------------------------------------------------------------
// Comparison runner

namespace {

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double stddev(const std::vector<double>& v) {
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= v.size();
  double var = 0.0;
  for (double x : v) var += (x - mean) * (x - mean);
  return std::sqrt(var / v.size());
}

double two_sided_sign_test(int wins_a, int wins_b) {
  const int n = wins_a + wins_b;
  if (n == 0) return 1.0;
  const int k = std::min(wins_a, wins_b);
  // Exact binomial tail, doubled.
  double tail = 0.0;
  for (int i = 0; i <= k; ++i) {
    double c = 1.0;
    for (int j = 0; j < i; ++j) c = c * (n - j) / (j + 1);
    tail += c * std::pow(0.5, n);
  }
  return std::min(1.0, 2.0 * tail);
}

}  // namespace

std::string CompareReport::to_json() const {
  nlohmann::json j;
  j["n_seeds"] = seeds.size();
  for (const auto& s : seeds) {
    nlohmann::json row;
    row["seed"] = s.seed;
    row["final_a"] = s.final_a;
    row["final_b"] = s.final_b;
    j["seeds"].push_back(row);
  }
  j["median_a"] = median_a;
  j["median_b"] = median_b;
  j["stddev_a"] = stddev_a;
  j["stddev_b"] = stddev_b;
  j["sign_test_p"] = sign_test_p;
  j["no_difference"] = no_difference;
  return j.dump(2);
}

CompareReport compare_runs(RunConfig cfg_a, RunConfig cfg_b, int n_seeds,
                           const std::string& out_dir) {
  if (n_seeds < 3)
    throw std::invalid_argument("compare_runs: need at least 3 seeds");
  cfg_a.validate();
  cfg_b.validate();
  std::filesystem::create_directories(out_dir);

  CompareReport report;
  std::vector<double> finals_a, finals_b;
  for (int k = 0; k < n_seeds; ++k) {
    RunConfig a = cfg_a;
    RunConfig b = cfg_b;
    a.seed = static_cast<std::uint64_t>(k);
    b.seed = static_cast<std::uint64_t>(k);
    TrainResult ra = run_training(a, out_dir + "/a_seed" + std::to_string(k));
    TrainResult rb = run_training(b, out_dir + "/b_seed" + std::to_string(k));
    report.seeds.push_back({static_cast<std::uint64_t>(k), ra.final_eval_mean,
                            rb.final_eval_mean});
    finals_a.push_back(ra.final_eval_mean);
    finals_b.push_back(rb.final_eval_mean);
  }
  report.median_a = median(finals_a);
  report.median_b = median(finals_b);
  report.stddev_a = stddev(finals_a);
  report.stddev_b = stddev(finals_b);
  int wins_a = 0, wins_b = 0;
  for (const auto& s : report.seeds) {
    if (s.final_a > s.final_b) ++wins_a;
    if (s.final_b > s.final_a) ++wins_b;
  }
  report.sign_test_p = two_sided_sign_test(wins_a, wins_b);
  report.no_difference = report.sign_test_p > 0.05;

  std::ofstream out(out_dir + "/report.json");
  out << report.to_json() << '\n';
  return report;
}

// ---------------------------------------------------------------------------
// Oracle report

std::string oracle_report(const std::string& mdp_path, double alpha,
                          long n_samples, std::uint64_t seed) {
  TabularMdp mdp = load_mdp(mdp_path);
  TabularPolicy pi = TabularPolicy::from_logits(
      Eigen::MatrixXd::Zero(mdp.n_states, mdp.n_actions));

  SoftValues sv = soft_policy_evaluation(mdp, pi, alpha);
  auto grad = exact_soft_gradient(mdp, pi, alpha);
  Rng rng = Rng::substream(seed, Stream::Eval);
  auto mc = scheme_equivalence_check(mdp, pi, alpha, n_samples, rng);

  std::ostringstream out;
  out << "mdp: " << mdp_path << "  |S|=" << mdp.n_states
      << " |A|=" << mdp.n_actions << " gamma=" << fmt_real(mdp.gamma)
      << " alpha=" << fmt_real(alpha) << "\n";
  out << "policy: uniform logits\n\nsoft state values v(s):\n";
  for (int s = 0; s < mdp.n_states; ++s)
    out << "  v[" << s << "] = " << fmt_real(sv.v[s]) << "\n";
  out << "\nsoft action values q(s,a):\n";
  for (int s = 0; s < mdp.n_states; ++s)
    for (int a = 0; a < mdp.n_actions; ++a)
      out << "  q[" << s << "][" << a << "] = " << fmt_real(sv.q(s, a)) << "\n";
  out << "\nexact gradient d J / d logits (logpi form):\n";
  for (int s = 0; s < mdp.n_states; ++s)
    for (int a = 0; a < mdp.n_actions; ++a)
      out << "  g[" << s << "][" << a << "] = " << fmt_real(grad.logpi_form(s, a))
          << "\n";
  out << "\nmax |entropy form - logpi form| = "
      << fmt_real((grad.entropy_form - grad.logpi_form).cwiseAbs().maxCoeff())
      << "\n";
  out << "max |logpi form - finite diff|  = "
      << fmt_real((grad.logpi_form - grad.finite_diff).cwiseAbs().maxCoeff())
      << "\n";
  out << "\nscheme equivalence (Monte Carlo, " << mc.n_samples << " samples):\n";
  out << "  max z between forms : " << fmt_real(mc.max_z_between_forms) << "\n";
  out << "  max z vs exact      : " << fmt_real(mc.max_z_vs_exact) << "\n";
  out << "  forms agree (3 se)  : " << (mc.forms_agree ? "yes" : "no") << "\n";
  out << "  match exact (3 se)  : " << (mc.match_exact ? "yes" : "no") << "\n";
  return out.str();
}

}  // namespace softpg
