#include "softpg/losses.hpp"

namespace softpg {

double value_loss(const Mlp& value_net, const Batch& batch, GradBuffer* grad) {
  if (batch.empty()) return 0.0;
  double total = 0.0;
  const double n = static_cast<double>(batch.size());
  MlpTrace trace;
  Eigen::VectorXd upstream(1);
  for (const BatchSample& s : batch) {
    const double v = value_net.forward(s.state, trace)[0];
    const double err = v - s.reward_to_go;
    total += err * err;
    if (grad) {
      upstream[0] = 2.0 * err / n;
      value_net.backward(trace, upstream, *grad);
    }
  }
  return total / n;
}

double tune_alpha(AlphaState& state, double measured_entropy,
                  double target_entropy) {
  if (!std::isfinite(target_entropy))
    throw std::invalid_argument("tune_alpha: target entropy must be finite");
  // d/dlogalpha of E[-logalpha (log pi + target)] = measured - target.
  state.log_alpha -= state.lr * (measured_entropy - target_entropy);
  state.log_alpha = std::min(std::max(state.log_alpha, -20.0), 5.0);
  return state.alpha();
}

}  // namespace softpg
