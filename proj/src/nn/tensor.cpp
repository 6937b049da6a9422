#include "xdboost/nn/tensor.hpp"

#include <cmath>

namespace xdboost::nn {

void glorot_uniform(Matrix& p, double fan_in, double fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / (fan_in + fan_out));
  std::uniform_real_distribution<double> dist(-limit, limit);
  for (Eigen::Index r = 0; r < p.rows(); ++r) {
    for (Eigen::Index c = 0; c < p.cols(); ++c) {
      p(r, c) = dist(rng);
    }
  }
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t tag) {
  // splitmix64 over the pair
  std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (tag + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace xdboost::nn
