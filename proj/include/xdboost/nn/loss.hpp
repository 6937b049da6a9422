#pragma once

#include <span>
#include <vector>

namespace xdboost::nn {

inline constexpr double kProbClip = 1e-7;

struct ClassWeights {
  double nonclick = 1.0;
  double click = 1.0;

  double operator[](double label) const { return label > 0.5 ? click : nonclick; }
};

double clip_probability(double p);

// mean_i w[y_i] * (-y_i ln p_i - (1 - y_i) ln(1 - p_i)), p clipped to [1e-7, 1 - 1e-7].
double weighted_bce_loss(std::span<const double> p, std::span<const double> y,
                         const ClassWeights& w);
// d loss / d p_i. Zero where clipping is active.
std::vector<double> weighted_bce_grad(std::span<const double> p, std::span<const double> y,
                                      const ClassWeights& w);

double mae_loss(std::span<const double> yhat, std::span<const double> target);
// Subgradient with d|x|/dx := 0 at x = 0.
std::vector<double> mae_grad(std::span<const double> yhat, std::span<const double> target);

}  // namespace xdboost::nn
