#include "softpg/mlp.hpp"

#include <cmath>
#include <stdexcept>

namespace softpg {

void GradBuffer::set_zero() {
  for (auto& m : dw) m.setZero();
  for (auto& v : db) v.setZero();
}

void GradBuffer::add(const GradBuffer& other, double scale) {
  for (std::size_t l = 0; l < dw.size(); ++l) {
    dw[l] += scale * other.dw[l];
    db[l] += scale * other.db[l];
  }
}

Eigen::VectorXd GradBuffer::flatten() const {
  Eigen::VectorXd flat(param_count());
  long at = 0;
  for (std::size_t l = 0; l < dw.size(); ++l) {
    for (long c = 0; c < dw[l].cols(); ++c)
      for (long r = 0; r < dw[l].rows(); ++r) flat[at++] = dw[l](r, c);
    for (long r = 0; r < db[l].size(); ++r) flat[at++] = db[l][r];
  }
  return flat;
}

long GradBuffer::param_count() const {
  long n = 0;
  for (std::size_t l = 0; l < dw.size(); ++l)
    n += dw[l].size() + db[l].size();
  return n;
}

Mlp::Mlp(std::vector<int> layer_sizes, Activation act, Rng& rng,
         double output_gain)
    : sizes_(std::move(layer_sizes)), act_(act) {
  if (sizes_.size() < 2) throw std::invalid_argument("Mlp needs >= 2 layer sizes");
  for (int s : sizes_)
    if (s <= 0) throw std::invalid_argument("Mlp layer sizes must be positive");

  const int L = static_cast<int>(sizes_.size()) - 1;
  w_.resize(L);
  b_.resize(L);
  for (int l = 0; l < L; ++l) {
    const int in = sizes_[l];
    const int out = sizes_[l + 1];
    const double gain = (l == L - 1) ? output_gain : std::sqrt(2.0);
    w_[l].resize(out, in);
    // Row-wise: unit Gaussian draws, normalized, scaled. Row order is what
    // keeps e.g. the mu rows of a wider output layer identical to a narrower
    // net built from the same stream.
    for (int r = 0; r < out; ++r) {
      Eigen::VectorXd row(in);
      for (int c = 0; c < in; ++c) row[c] = rng.normal();
      double norm = row.norm();
      if (norm == 0.0) norm = 1.0;
      w_[l].row(r) = (gain / norm) * row.transpose();
    }
    b_[l] = Eigen::VectorXd::Zero(out);
  }
}

namespace {

inline double act_fn(Activation a, double x) {
  return a == Activation::Tanh ? std::tanh(x) : (x > 0.0 ? x : 0.0);
}

inline double act_grad(Activation a, double pre, double post) {
  if (a == Activation::Tanh) return 1.0 - post * post;
  (void)pre;
  return post > 0.0 ? 1.0 : 0.0;
}

}  // namespace

Eigen::VectorXd Mlp::forward(const Eigen::VectorXd& x) const {
  MlpTrace trace;
  return forward(x, trace);
}

Eigen::VectorXd Mlp::forward(const Eigen::VectorXd& x, MlpTrace& trace) const {
  if (x.size() != sizes_.front())
    throw std::invalid_argument("Mlp::forward input dimension mismatch");
  const int L = num_layers();
  trace.inputs.assign(L, {});
  trace.preact.assign(L, {});
  Eigen::VectorXd h = x;
  for (int l = 0; l < L; ++l) {
    trace.inputs[l] = h;
    Eigen::VectorXd z = w_[l] * h + b_[l];
    trace.preact[l] = z;
    if (l < L - 1) {
      h.resize(z.size());
      for (long i = 0; i < z.size(); ++i) h[i] = act_fn(act_, z[i]);
    } else {
      h = z;
    }
  }
  return h;
}

Eigen::VectorXd Mlp::backward(const MlpTrace& trace,
                              const Eigen::VectorXd& upstream,
                              GradBuffer& grads) const {
  const int L = num_layers();
  if (upstream.size() != sizes_.back())
    throw std::invalid_argument("Mlp::backward upstream dimension mismatch");
  Eigen::VectorXd delta = upstream;  // dL/d(preact of layer l)
  for (int l = L - 1; l >= 0; --l) {
    if (l < L - 1) {
      // delta currently holds dL/d(post-activation); fold in activation grad.
      for (long i = 0; i < delta.size(); ++i) {
        const double post = act_fn(act_, trace.preact[l][i]);
        delta[i] *= act_grad(act_, trace.preact[l][i], post);
      }
    }
    grads.dw[l].noalias() += delta * trace.inputs[l].transpose();
    grads.db[l] += delta;
    if (l > 0) delta = (w_[l].transpose() * delta).eval();
  }
  return w_[0].transpose() * delta;
}

Eigen::VectorXd Mlp::input_gradient(const MlpTrace& trace,
                                    const Eigen::VectorXd& upstream) const {
  const int L = num_layers();
  if (upstream.size() != sizes_.back())
    throw std::invalid_argument("Mlp::input_gradient upstream dimension mismatch");
  Eigen::VectorXd delta = upstream;
  for (int l = L - 1; l >= 0; --l) {
    if (l < L - 1) {
      for (long i = 0; i < delta.size(); ++i) {
        const double post = act_fn(act_, trace.preact[l][i]);
        delta[i] *= act_grad(act_, trace.preact[l][i], post);
      }
    }
    if (l > 0) delta = (w_[l].transpose() * delta).eval();
  }
  return w_[0].transpose() * delta;
}

GradBuffer Mlp::make_grad_buffer() const {
  GradBuffer g;
  g.dw.reserve(w_.size());
  g.db.reserve(b_.size());
  for (std::size_t l = 0; l < w_.size(); ++l) {
    g.dw.push_back(Eigen::MatrixXd::Zero(w_[l].rows(), w_[l].cols()));
    g.db.push_back(Eigen::VectorXd::Zero(b_[l].size()));
  }
  return g;
}

long Mlp::param_count() const {
  long n = 0;
  for (std::size_t l = 0; l < w_.size(); ++l) n += w_[l].size() + b_[l].size();
  return n;
}

Eigen::VectorXd Mlp::flatten() const {
  Eigen::VectorXd flat(param_count());
  long at = 0;
  for (std::size_t l = 0; l < w_.size(); ++l) {
    for (long c = 0; c < w_[l].cols(); ++c)
      for (long r = 0; r < w_[l].rows(); ++r) flat[at++] = w_[l](r, c);
    for (long r = 0; r < b_[l].size(); ++r) flat[at++] = b_[l][r];
  }
  return flat;
}

void Mlp::set_from_flat(const Eigen::VectorXd& flat) {
  if (flat.size() != param_count())
    throw std::invalid_argument("Mlp::set_from_flat size mismatch");
  long at = 0;
  for (std::size_t l = 0; l < w_.size(); ++l) {
    for (long c = 0; c < w_[l].cols(); ++c)
      for (long r = 0; r < w_[l].rows(); ++r) w_[l](r, c) = flat[at++];
    for (long r = 0; r < b_[l].size(); ++r) b_[l][r] = flat[at++];
  }
}

bool Mlp::all_finite() const {
  for (std::size_t l = 0; l < w_.size(); ++l) {
    if (!w_[l].allFinite() || !b_[l].allFinite()) return false;
  }
  return true;
}

void adam_step(Eigen::VectorXd& params, const Eigen::VectorXd& grads,
               AdamState& state) {
  if (grads.size() != params.size() || params.size() != state.m.size())
    throw std::invalid_argument("adam_step size mismatch");
  if (!grads.allFinite())
    throw std::domain_error("adam_step: non-finite gradient");
  state.step += 1;
  const double b1t = 1.0 - std::pow(state.beta1, state.step);
  const double b2t = 1.0 - std::pow(state.beta2, state.step);
  for (long i = 0; i < params.size(); ++i) {
    state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * grads[i];
    state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * grads[i] * grads[i];
    const double mhat = state.m[i] / b1t;
    const double vhat = state.v[i] / b2t;
    params[i] -= state.lr * mhat / (std::sqrt(vhat) + state.eps);
  }
}

double grad_check(const std::function<double(const Eigen::VectorXd&)>& loss,
                  const Eigen::VectorXd& params,
                  const Eigen::VectorXd& analytic_grad, double h) {
  Eigen::VectorXd p = params;
  double worst = 0.0;
  for (long i = 0; i < p.size(); ++i) {
    const double keep = p[i];
    p[i] = keep + h;
    const double up = loss(p);
    p[i] = keep - h;
    const double down = loss(p);
    p[i] = keep;
    const double fd = (up - down) / (2.0 * h);
    const double a = analytic_grad[i];
    const double err =
        std::abs(a - fd) / std::max({1.0, std::abs(a), std::abs(fd)});
    if (err > worst) worst = err;
  }
  return worst;
}

}  // namespace softpg
