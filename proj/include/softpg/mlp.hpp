#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "softpg/rng.hpp"

namespace softpg {

enum class Activation { Tanh, Relu };

class Mlp;

// Per-parameter gradient accumulators, shape-congruent with an Mlp.
struct GradBuffer {
  std::vector<Eigen::MatrixXd> dw;
  std::vector<Eigen::VectorXd> db;

  void set_zero();
  void add(const GradBuffer& other, double scale = 1.0);
  Eigen::VectorXd flatten() const;
  long param_count() const;
};

// Cached layer values from one forward pass; consumed by Mlp::backward.
struct MlpTrace {
  std::vector<Eigen::VectorXd> inputs;  // input seen by each layer
  std::vector<Eigen::VectorXd> preact;  // W x + b of each layer
};

// Dense feed-forward network, 64-bit throughout. Hidden layers share one
// activation; the output layer is affine. Weight rows are drawn as unit
// Gaussians, normalized, and scaled per layer (sqrt(2) hidden, output_gain
// for the last layer), biases start at zero.
class Mlp {
 public:
  Mlp() = default;
  Mlp(std::vector<int> layer_sizes, Activation act, Rng& rng,
      double output_gain = 1.0);

  Eigen::VectorXd forward(const Eigen::VectorXd& x) const;
  Eigen::VectorXd forward(const Eigen::VectorXd& x, MlpTrace& trace) const;

  // Accumulates the gradient of upstream . forward(x) into `grads` and
  // returns the gradient with respect to the input vector.
  Eigen::VectorXd backward(const MlpTrace& trace,
                           const Eigen::VectorXd& upstream,
                           GradBuffer& grads) const;

  // Input gradient only; parameters are not touched.
  Eigen::VectorXd input_gradient(const MlpTrace& trace,
                                 const Eigen::VectorXd& upstream) const;

  GradBuffer make_grad_buffer() const;

  long param_count() const;
  Eigen::VectorXd flatten() const;
  void set_from_flat(const Eigen::VectorXd& flat);

  const std::vector<int>& layer_sizes() const { return sizes_; }
  int in_dim() const { return sizes_.front(); }
  int out_dim() const { return sizes_.back(); }
  int num_layers() const { return static_cast<int>(w_.size()); }
  Activation activation() const { return act_; }

  Eigen::MatrixXd& weight(int layer) { return w_[layer]; }
  const Eigen::MatrixXd& weight(int layer) const { return w_[layer]; }
  Eigen::VectorXd& bias(int layer) { return b_[layer]; }
  const Eigen::VectorXd& bias(int layer) const { return b_[layer]; }

  bool all_finite() const;

 private:
  std::vector<int> sizes_;
  Activation act_ = Activation::Tanh;
  std::vector<Eigen::MatrixXd> w_;
  std::vector<Eigen::VectorXd> b_;
};

// First-order optimizer state for one flat parameter vector.
struct AdamState {
  Eigen::VectorXd m;
  Eigen::VectorXd v;
  long step = 0;
  double lr;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  AdamState(long n, double learning_rate)
      : m(Eigen::VectorXd::Zero(n)), v(Eigen::VectorXd::Zero(n)),
        lr(learning_rate) {}
};

// One Adam update in place. Throws std::domain_error on non-finite
// gradients; params are untouched in that case.
void adam_step(Eigen::VectorXd& params, const Eigen::VectorXd& grads,
               AdamState& state);

// Max over parameters of |analytic - central FD| / max(1, |analytic|, |FD|).
double grad_check(const std::function<double(const Eigen::VectorXd&)>& loss,
                  const Eigen::VectorXd& params,
                  const Eigen::VectorXd& analytic_grad, double h = 1e-6);

}  // namespace softpg
