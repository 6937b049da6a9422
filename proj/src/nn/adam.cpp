#include "xdboost/nn/adam.hpp"

#include "xdboost/error.hpp"

#include <cmath>

namespace xdboost::nn {

AdamState AdamState::for_parameters(std::span<Parameter* const> params, AdamConfig config) {
  AdamState state;
  state.config = config;
  state.first_moment.reserve(params.size());
  state.second_moment.reserve(params.size());
  for (const Parameter* p : params) {
    state.first_moment.push_back(Matrix::Zero(p->value.rows(), p->value.cols()));
    state.second_moment.push_back(Matrix::Zero(p->value.rows(), p->value.cols()));
  }
  return state;
}

void adam_step(std::span<Parameter* const> params, AdamState& state) {
  if (params.size() != state.first_moment.size() || params.size() != state.second_moment.size()) {
    throw UsageError("adam_step: optimizer state tracks " +
                     std::to_string(state.first_moment.size()) + " tensors, got " +
                     std::to_string(params.size()));
  }
  for (std::size_t k = 0; k < params.size(); ++k) {
    const Parameter& p = *params[k];
    if (p.grad.rows() != p.value.rows() || p.grad.cols() != p.value.cols() ||
        state.first_moment[k].rows() != p.value.rows() ||
        state.first_moment[k].cols() != p.value.cols()) {
      throw UsageError("adam_step: shape mismatch for '" + p.name + "'");
    }
  }

  const AdamConfig& c = state.config;
  state.step += 1;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(c.beta1, t);
  const double correction2 = 1.0 - std::pow(c.beta2, t);

  for (std::size_t k = 0; k < params.size(); ++k) {
    Parameter& p = *params[k];
    auto m = state.first_moment[k].array();
    auto v = state.second_moment[k].array();
    const auto g = p.grad.array();
    m = c.beta1 * m + (1.0 - c.beta1) * g;
    v = c.beta2 * v + (1.0 - c.beta2) * g.square();
    p.value.array() -= c.learning_rate * (m / correction1) / ((v / correction2).sqrt() + c.epsilon);
  }
}

}  // namespace xdboost::nn
