#pragma once

#include "xdboost/nn/tensor.hpp"

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace xdboost::nn {

enum class Activation { relu, sigmoid, tanh, identity };

// Throws ConfigError for anything outside {relu, sigmoid, tanh, identity}.
Activation parse_activation(std::string_view name);
std::string to_string(Activation kind);

// Scalar forms. sigmoid and tanh are clamped one ulp inside their open
// ranges so that saturated inputs never reach 0, 1 or +-1 exactly.
double apply(Activation kind, double x);
// Derivative expressed through the activation output `y` (and input `x` for relu).
double derivative(Activation kind, double x, double y);

std::vector<double> activation_apply(Activation kind, std::span<const double> x);

void apply_inplace(Activation kind, Matrix& m);

}  // namespace xdboost::nn
