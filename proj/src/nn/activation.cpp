#include "xdboost/nn/activation.hpp"

#include "xdboost/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace xdboost::nn {

namespace {

// Largest double strictly below 1.
constexpr double kBelowOne = 1.0 - std::numeric_limits<double>::epsilon() / 2.0;
constexpr double kAboveZero = std::numeric_limits<double>::denorm_min();

double sigmoid(double x) {
  double y;
  if (x >= 0.0) {
    y = 1.0 / (1.0 + std::exp(-x));
  } else {
    const double e = std::exp(x);
    y = e / (1.0 + e);
  }
  return std::clamp(y, kAboveZero, kBelowOne);
}

}  // namespace

Activation parse_activation(std::string_view name) {
  if (name == "relu") return Activation::relu;
  if (name == "sigmoid") return Activation::sigmoid;
  if (name == "tanh") return Activation::tanh;
  if (name == "identity") return Activation::identity;
  throw ConfigError("unknown activation '" + std::string(name) + "'");
}

std::string to_string(Activation kind) {
  switch (kind) {
    case Activation::relu: return "relu";
    case Activation::sigmoid: return "sigmoid";
    case Activation::tanh: return "tanh";
    case Activation::identity: return "identity";
  }
  throw ConfigError("unknown activation tag");
}

double apply(Activation kind, double x) {
  switch (kind) {
    case Activation::relu: return x > 0.0 ? x : 0.0;
    case Activation::sigmoid: return sigmoid(x);
    case Activation::tanh: return std::clamp(std::tanh(x), -kBelowOne, kBelowOne);
    case Activation::identity: return x;
  }
  throw ConfigError("unknown activation tag");
}

double derivative(Activation kind, double x, double y) {
  switch (kind) {
    case Activation::relu: return x > 0.0 ? 1.0 : 0.0;
    case Activation::sigmoid: return y * (1.0 - y);
    case Activation::tanh: return 1.0 - y * y;
    case Activation::identity: return 1.0;
  }
  throw ConfigError("unknown activation tag");
}

std::vector<double> activation_apply(Activation kind, std::span<const double> x) {
  std::vector<double> out(x.size());
  std::transform(x.begin(), x.end(), out.begin(), [kind](double v) { return apply(kind, v); });
  return out;
}

void apply_inplace(Activation kind, Matrix& m) {
  switch (kind) {
    case Activation::identity: return;
    case Activation::relu: m = m.cwiseMax(0.0); return;
    default: m = m.unaryExpr([kind](double v) { return apply(kind, v); }); return;
  }
}

}  // namespace xdboost::nn
