#include "xdboost/nn/loss.hpp"

#include "xdboost/error.hpp"

#include <cmath>
#include <string>

namespace xdboost::nn {

namespace {

void check_lengths(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw InputError(std::string(what) + ": length mismatch (" + std::to_string(a) + " vs " +
                     std::to_string(b) + ")");
  }
}

}  // namespace

double clip_probability(double p) {
  if (p < kProbClip) return kProbClip;
  if (p > 1.0 - kProbClip) return 1.0 - kProbClip;
  return p;
}

double weighted_bce_loss(std::span<const double> p, std::span<const double> y,
                         const ClassWeights& w) {
  check_lengths(p.size(), y.size(), "weighted_bce_loss");
  if (p.empty()) return 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double q = clip_probability(p[i]);
    total += w[y[i]] * (-y[i] * std::log(q) - (1.0 - y[i]) * std::log(1.0 - q));
  }
  return total / static_cast<double>(p.size());
}

std::vector<double> weighted_bce_grad(std::span<const double> p, std::span<const double> y,
                                      const ClassWeights& w) {
  check_lengths(p.size(), y.size(), "weighted_bce_grad");
  std::vector<double> g(p.size(), 0.0);
  const double n = static_cast<double>(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] < kProbClip || p[i] > 1.0 - kProbClip) continue;
    g[i] = w[y[i]] * (-y[i] / p[i] + (1.0 - y[i]) / (1.0 - p[i])) / n;
  }
  return g;
}

double mae_loss(std::span<const double> yhat, std::span<const double> target) {
  check_lengths(yhat.size(), target.size(), "mae_loss");
  if (yhat.empty()) return 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < yhat.size(); ++i) total += std::abs(yhat[i] - target[i]);
  return total / static_cast<double>(yhat.size());
}

std::vector<double> mae_grad(std::span<const double> yhat, std::span<const double> target) {
  check_lengths(yhat.size(), target.size(), "mae_grad");
  std::vector<double> g(yhat.size(), 0.0);
  const double n = static_cast<double>(yhat.size());
  for (std::size_t i = 0; i < yhat.size(); ++i) {
    const double d = yhat[i] - target[i];
    g[i] = d > 0.0 ? 1.0 / n : (d < 0.0 ? -1.0 / n : 0.0);
  }
  return g;
}

}  // namespace xdboost::nn
