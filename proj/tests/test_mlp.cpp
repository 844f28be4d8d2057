#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "softpg/mlp.hpp"
#include "softpg/rng.hpp"

using namespace softpg;
using Eigen::VectorXd;

namespace {

// Straight-line re-implementation of the affine+tanh chain, raw loops only.
// Kept independent of Mlp::forward on purpose.
std::vector<double> reference_forward_2layer(const Mlp& net,
                                             const std::vector<double>& x) {
  const auto& W1 = net.weight(0);
  const auto& b1 = net.bias(0);
  const auto& W2 = net.weight(1);
  const auto& b2 = net.bias(1);
  std::vector<double> h(W1.rows());
  for (long r = 0; r < W1.rows(); ++r) {
    double z = b1[r];
    for (long c = 0; c < W1.cols(); ++c) z += W1(r, c) * x[c];
    h[r] = std::tanh(z);
  }
  std::vector<double> y(W2.rows());
  for (long r = 0; r < W2.rows(); ++r) {
    double z = b2[r];
    for (long c = 0; c < W2.cols(); ++c) z += W2(r, c) * h[c];
    y[r] = z;
  }
  return y;
}

// Scalar Adam, one parameter at a time; oracle for the vector implementation.
struct ScalarAdam {
  double m = 0, v = 0;
  long t = 0;
  double step(double p, double g, double lr) {
    t += 1;
    m = 0.9 * m + 0.1 * g;
    v = 0.999 * v + 0.001 * g * g;
    double mhat = m / (1.0 - std::pow(0.9, t));
    double vhat = v / (1.0 - std::pow(0.999, t));
    return p - lr * mhat / (std::sqrt(vhat) + 1e-8);
  }
};

}  // namespace

TEST_CASE("forward: single linear layer by hand") {
  Rng rng(1);
  Mlp net({1, 1}, Activation::Tanh, rng);
  net.weight(0)(0, 0) = 2.0;
  net.bias(0)[0] = 1.0;
  VectorXd x(1);
  x << 3.0;
  CHECK(net.forward(x)[0] == doctest::Approx(7.0).epsilon(1e-15));
}

TEST_CASE("forward: zero weights and biases give zero output") {
  Rng rng(2);
  Mlp net({3, 4, 2}, Activation::Tanh, rng);
  net.set_from_flat(VectorXd::Zero(net.param_count()));
  VectorXd x(3);
  x << 0.3, -1.2, 5.0;
  VectorXd y = net.forward(x);
  CHECK(y.norm() == 0.0);
}

TEST_CASE("forward: matches straight-line reference on seed-0 parameters") {
  Rng rng(0);
  Mlp net({2, 5, 3}, Activation::Tanh, rng);
  VectorXd x(2);
  x << 0.5, -0.5;
  VectorXd y = net.forward(x);
  auto ref = reference_forward_2layer(net, {0.5, -0.5});
  REQUIRE(y.size() == 3);
  for (int i = 0; i < 3; ++i)
    CHECK(y[i] == doctest::Approx(ref[i]).epsilon(1e-14));
}

TEST_CASE("forward: pure, bit-identical on repeated calls") {
  Rng rng(7);
  Mlp net({4, 8, 8, 2}, Activation::Tanh, rng);
  VectorXd x(4);
  x << 0.1, -0.2, 0.3, -0.4;
  VectorXd a = net.forward(x);
  VectorXd b = net.forward(x);
  for (long i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
}

TEST_CASE("forward: input dimension mismatch throws") {
  Rng rng(3);
  Mlp net({2, 2}, Activation::Tanh, rng);
  CHECK_THROWS_AS((void)net.forward(VectorXd::Zero(3)), std::invalid_argument);
}

TEST_CASE("construction: parameters finite") {
  Rng rng(11);
  Mlp net({6, 64, 64, 4}, Activation::Relu, rng, 0.01);
  CHECK(net.all_finite());
}

TEST_CASE("flatten/unflatten is a bijection") {
  Rng rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<int> sizes = {1 + rng.uniform_int(5), 1 + rng.uniform_int(6),
                              1 + rng.uniform_int(4)};
    Mlp net(sizes, Activation::Tanh, rng);
    VectorXd flat = net.flatten();
    Mlp other(sizes, Activation::Tanh, rng);
    other.set_from_flat(flat);
    VectorXd again = other.flatten();
    REQUIRE(again.size() == flat.size());
    for (long i = 0; i < flat.size(); ++i) CHECK(again[i] == flat[i]);
  }
}

TEST_CASE("backward: linear layer closed form") {
  Rng rng(4);
  Mlp net({3, 1}, Activation::Tanh, rng);
  VectorXd x(3);
  x << 1.5, -2.0, 0.25;
  MlpTrace trace;
  net.forward(x, trace);
  GradBuffer g = net.make_grad_buffer();
  VectorXd upstream(1);
  upstream << 1.0;
  net.backward(trace, upstream, g);
  for (int c = 0; c < 3; ++c)
    CHECK(g.dw[0](0, c) == doctest::Approx(x[c]).epsilon(1e-15));
  CHECK(g.db[0][0] == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("backward: zero upstream gives zero grads") {
  Rng rng(6);
  Mlp net({3, 4, 2}, Activation::Tanh, rng);
  VectorXd x = VectorXd::Constant(3, 0.7);
  MlpTrace trace;
  net.forward(x, trace);
  GradBuffer g = net.make_grad_buffer();
  net.backward(trace, VectorXd::Zero(2), g);
  CHECK(g.flatten().norm() == 0.0);
}

TEST_CASE("backward: every component matches central finite differences") {
  Rng rng(8);
  for (auto act : {Activation::Tanh, Activation::Relu}) {
    Mlp net({3, 6, 2}, act, rng);
    VectorXd x(3), upstream(2);
    for (int i = 0; i < 3; ++i) x[i] = rng.uniform(-1, 1);
    for (int i = 0; i < 2; ++i) upstream[i] = rng.uniform(-1, 1);

    MlpTrace trace;
    net.forward(x, trace);
    GradBuffer g = net.make_grad_buffer();
    VectorXd dx = net.backward(trace, upstream, g);
    VectorXd analytic = g.flatten();

    // In-test FD oracle over the scalar upstream . forward(x).
    const double h = 1e-6;
    VectorXd flat = net.flatten();
    Mlp probe = net;
    for (long i = 0; i < flat.size(); ++i) {
      VectorXd p = flat;
      p[i] = flat[i] + h;
      probe.set_from_flat(p);
      double up = upstream.dot(probe.forward(x));
      p[i] = flat[i] - h;
      probe.set_from_flat(p);
      double down = upstream.dot(probe.forward(x));
      double fd = (up - down) / (2 * h);
      CHECK(std::abs(analytic[i] - fd) /
                std::max({1.0, std::abs(analytic[i]), std::abs(fd)}) <
            1e-5);
    }
    // Input gradient against FD as well.
    for (int i = 0; i < 3; ++i) {
      VectorXd xp = x, xm = x;
      xp[i] += h;
      xm[i] -= h;
      double fd = (upstream.dot(net.forward(xp)) -
                   upstream.dot(net.forward(xm))) /
                  (2 * h);
      CHECK(std::abs(dx[i] - fd) < 1e-5 * std::max(1.0, std::abs(fd)));
    }
  }
}

TEST_CASE("adam: zero gradient leaves parameters, bumps counter") {
  Rng rng(9);
  Mlp net({2, 3, 1}, Activation::Tanh, rng);
  VectorXd params = net.flatten();
  VectorXd before = params;
  AdamState state(params.size(), 1e-3);
  adam_step(params, VectorXd::Zero(params.size()), state);
  CHECK(state.step == 1);
  for (long i = 0; i < params.size(); ++i) CHECK(params[i] == before[i]);
}

TEST_CASE("adam: first step is -lr*g/(|g|+eps) elementwise") {
  VectorXd params(3), grads(3);
  params << 1.0, -2.0, 0.5;
  grads << 0.3, -4.0, 0.0;
  AdamState state(3, 0.01);
  VectorXd before = params;
  adam_step(params, grads, state);
  for (int i = 0; i < 3; ++i) {
    double expect = before[i] - 0.01 * grads[i] / (std::abs(grads[i]) + 1e-8);
    CHECK(params[i] == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("adam: two steps reproduce independent scalar trace") {
  VectorXd params(2), grads(2);
  params << 0.4, -1.1;
  grads << -0.9, 2.5;
  AdamState state(2, 0.05);
  ScalarAdam s0, s1;
  double e0 = s0.step(params[0], grads[0], 0.05);
  double e1 = s1.step(params[1], grads[1], 0.05);
  adam_step(params, grads, state);
  CHECK(params[0] == doctest::Approx(e0).epsilon(1e-15));
  CHECK(params[1] == doctest::Approx(e1).epsilon(1e-15));
  e0 = s0.step(params[0], grads[0], 0.05);
  e1 = s1.step(params[1], grads[1], 0.05);
  adam_step(params, grads, state);
  CHECK(state.step == 2);
  CHECK(params[0] == doctest::Approx(e0).epsilon(1e-15));
  CHECK(params[1] == doctest::Approx(e1).epsilon(1e-15));
}

TEST_CASE("adam: non-finite gradient rejected, parameters untouched") {
  VectorXd params(2);
  params << 1.0, 2.0;
  VectorXd grads(2);
  grads << 0.1, std::numeric_limits<double>::quiet_NaN();
  AdamState state(2, 0.01);
  CHECK_THROWS_AS(adam_step(params, grads, state), std::domain_error);
  CHECK(params[0] == 1.0);
  CHECK(params[1] == 2.0);
  CHECK(state.step == 0);
}

TEST_CASE("adam: steps preserve finiteness under finite gradients") {
  Rng rng(12);
  Mlp net({3, 8, 1}, Activation::Tanh, rng);
  VectorXd params = net.flatten();
  AdamState state(params.size(), 0.1);
  for (int k = 0; k < 50; ++k) {
    VectorXd g(params.size());
    for (long i = 0; i < g.size(); ++i) g[i] = rng.uniform(-10, 10);
    adam_step(params, g, state);
  }
  CHECK(params.allFinite());
}

TEST_CASE("grad_check: quadratic loss") {
  Rng rng(13);
  VectorXd theta(5);
  for (int i = 0; i < 5; ++i) theta[i] = rng.uniform(-2, 2);
  auto loss = [](const VectorXd& p) { return 0.5 * p.squaredNorm(); };
  CHECK(grad_check(loss, theta, theta) < 1e-9);
}

TEST_CASE("grad_check: constant loss gives zero error") {
  VectorXd theta = VectorXd::Constant(4, 0.3);
  auto loss = [](const VectorXd&) { return 2.5; };
  CHECK(grad_check(loss, theta, VectorXd::Zero(4)) == 0.0);
}

TEST_CASE("grad_check: mlp scalar output against its own backward") {
  Rng rng(14);
  Mlp net({4, 8, 1}, Activation::Tanh, rng);
  VectorXd x(4);
  for (int i = 0; i < 4; ++i) x[i] = rng.uniform(-1, 1);
  MlpTrace trace;
  net.forward(x, trace);
  GradBuffer g = net.make_grad_buffer();
  VectorXd one(1);
  one << 1.0;
  net.backward(trace, one, g);
  Mlp probe = net;
  auto loss = [&](const VectorXd& p) {
    probe.set_from_flat(p);
    return probe.forward(x)[0];
  };
  CHECK(grad_check(loss, net.flatten(), g.flatten()) < 1e-5);
}
