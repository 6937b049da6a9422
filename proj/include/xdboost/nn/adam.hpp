#pragma once

#include "xdboost/nn/tensor.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace xdboost::nn {

struct AdamConfig {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  AdamConfig config;
  std::vector<Matrix> first_moment;
  std::vector<Matrix> second_moment;
  std::uint64_t step = 0;

  // Zeroed accumulators shaped like `params`.
  static AdamState for_parameters(std::span<Parameter* const> params, AdamConfig config);
};

// One bias-corrected Adam update from the gradients stored in `params`.
// Throws UsageError when the state does not mirror the parameter shapes.
void adam_step(std::span<Parameter* const> params, AdamState& state);

}  // namespace xdboost::nn
