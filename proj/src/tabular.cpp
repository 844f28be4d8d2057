#include "softpg/tabular.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace softpg {

void TabularMdp::validate() const {
  if (n_states < 1 || n_actions < 1)
    throw std::invalid_argument("TabularMdp: empty state or action set");
  if (!(gamma >= 0.0 && gamma < 1.0))
    throw std::invalid_argument("TabularMdp: gamma must be in [0,1)");
  if (static_cast<int>(P.size()) != n_actions ||
      static_cast<int>(R.size()) != n_actions)
    throw std::invalid_argument("TabularMdp: tensor action count mismatch");
  for (int a = 0; a < n_actions; ++a) {
    if (P[a].rows() != n_states || P[a].cols() != n_states)
      throw std::invalid_argument("TabularMdp: P shape mismatch");
    if (!R[a].allFinite())
      throw std::invalid_argument("TabularMdp: non-finite reward");
    for (int s = 0; s < n_states; ++s) {
      if (P[a].row(s).minCoeff() < 0.0)
        throw std::invalid_argument("TabularMdp: negative probability");
      if (std::abs(P[a].row(s).sum() - 1.0) > 1e-12)
        throw std::invalid_argument("TabularMdp: P row does not sum to 1");
    }
  }
  if (p0.size() != n_states || p0.minCoeff() < 0.0 ||
      std::abs(p0.sum() - 1.0) > 1e-12)
    throw std::invalid_argument("TabularMdp: p0 is not a distribution");
}

TabularMdp make_chain(int n_states, double slip_prob,
                      const ChainRewardSpec& reward, double gamma) {
  if (n_states < 2) throw std::invalid_argument("make_chain: need >= 2 states");
  if (!(slip_prob >= 0.0 && slip_prob < 1.0))
    throw std::invalid_argument("make_chain: slip_prob must be in [0,1)");
  const int goal = reward.goal_state < 0 ? n_states - 1 : reward.goal_state;
  if (goal >= n_states)
    throw std::invalid_argument("make_chain: goal state out of range");

  TabularMdp mdp;
  mdp.n_states = n_states;
  mdp.n_actions = 2;
  mdp.gamma = gamma;
  mdp.P.assign(2, Eigen::MatrixXd::Zero(n_states, n_states));
  mdp.R.assign(2, Eigen::MatrixXd::Zero(n_states, n_states));
  for (int a = 0; a < 2; ++a) {
    const int dir = a == 0 ? -1 : +1;
    for (int s = 0; s < n_states; ++s) {
      const int intended = std::min(std::max(s + dir, 0), n_states - 1);
      const int slipped = std::min(std::max(s - dir, 0), n_states - 1);
      mdp.P[a](s, intended) += 1.0 - slip_prob;
      mdp.P[a](s, slipped) += slip_prob;
    }
    for (int s = 0; s < n_states; ++s)
      for (int next = 0; next < n_states; ++next)
        mdp.R[a](s, next) =
            reward.step_cost + (next == goal ? reward.goal_reward : 0.0);
  }
  mdp.p0 = Eigen::VectorXd::Zero(n_states);
  mdp.p0[0] = 1.0;
  mdp.validate();
  return mdp;
}

TabularMdp parse_mdp(std::istream& in) {
  std::string line;
  TabularMdp mdp;
  bool have_header = false;
  std::vector<Eigen::MatrixXd> mass;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::istringstream ls(line);
    if (!have_header) {
      int ns, na;
      double gamma;
      if (!(ls >> ns >> na >> gamma)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        throw std::invalid_argument("mdp spec: bad header at line " +
                                    std::to_string(lineno));
      }
      mdp.n_states = ns;
      mdp.n_actions = na;
      mdp.gamma = gamma;
      if (ns < 1 || na < 1 || !(gamma >= 0.0 && gamma < 1.0))
        throw std::invalid_argument("mdp spec: invalid header values");
      mdp.P.assign(na, Eigen::MatrixXd::Zero(ns, ns));
      mdp.R.assign(na, Eigen::MatrixXd::Zero(ns, ns));
      have_header = true;
      continue;
    }
    int s, a, next;
    double prob, reward;
    if (!(ls >> s >> a >> next >> prob >> reward)) {
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      throw std::invalid_argument("mdp spec: bad transition at line " +
                                  std::to_string(lineno));
    }
    if (s < 0 || s >= mdp.n_states || a < 0 || a >= mdp.n_actions ||
        next < 0 || next >= mdp.n_states)
      throw std::invalid_argument("mdp spec: index out of range at line " +
                                  std::to_string(lineno));
    if (prob < 0.0 || prob > 1.0)
      throw std::invalid_argument("mdp spec: probability out of range at line " +
                                  std::to_string(lineno));
    if (mdp.P[a](s, next) != 0.0)
      throw std::invalid_argument("mdp spec: duplicate transition at line " +
                                  std::to_string(lineno));
    mdp.P[a](s, next) = prob;
    mdp.R[a](s, next) = reward;
  }
  if (!have_header) throw std::invalid_argument("mdp spec: missing header");
  for (int a = 0; a < mdp.n_actions; ++a)
    for (int s = 0; s < mdp.n_states; ++s)
      if (std::abs(mdp.P[a].row(s).sum() - 1.0) > 1e-9)
        throw std::invalid_argument(
            "mdp spec: probability mass of state " + std::to_string(s) +
            " action " + std::to_string(a) + " does not sum to 1");
  mdp.p0 = Eigen::VectorXd::Zero(mdp.n_states);
  mdp.p0[0] = 1.0;
  mdp.validate();
  return mdp;
}

TabularMdp load_mdp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open mdp spec: " + path);
  return parse_mdp(in);
}

TabularEnv::TabularEnv(TabularMdp mdp, int episode_cap)
    : mdp_(std::move(mdp)), cap_(episode_cap) {
  mdp_.validate();
  if (cap_ < 1) throw std::invalid_argument("TabularEnv: bad episode cap");
}

Eigen::VectorXd TabularEnv::one_hot(int s) const {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(mdp_.n_states);
  v[s] = 1.0;
  return v;
}

Eigen::VectorXd TabularEnv::reset(Rng& rng) {
  const double u = rng.uniform();
  double cum = 0.0;
  state_ = mdp_.n_states - 1;
  for (int s = 0; s < mdp_.n_states; ++s) {
    cum += mdp_.p0[s];
    if (u < cum) {
      state_ = s;
      break;
    }
  }
  t_ = 0;
  live_ = true;
  return one_hot(state_);
}

StepResult TabularEnv::step(const Action& a, Rng& rng) {
  if (!live_) throw std::logic_error("TabularEnv::step after episode end");
  if (a.disc < 0 || a.disc >= mdp_.n_actions)
    throw std::invalid_argument("TabularEnv: action out of range");
  const double u = rng.uniform();
  double cum = 0.0;
  int next = mdp_.n_states - 1;
  for (int s = 0; s < mdp_.n_states; ++s) {
    cum += mdp_.P[a.disc](state_, s);
    if (u < cum) {
      next = s;
      break;
    }
  }
  StepResult out;
  out.r_ext = mdp_.R[a.disc](state_, next);
  state_ = next;
  t_ += 1;
  out.next_state = one_hot(state_);
  out.done = t_ >= cap_;
  if (out.done) live_ = false;
  return out;
}

}  // namespace softpg
