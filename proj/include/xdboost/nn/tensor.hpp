#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <string>

namespace xdboost::nn {

// Batch-major storage: one row per instance.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

using Rng = std::mt19937_64;

// A trainable tensor together with its gradient accumulator.
struct Parameter {
  std::string name;
  Matrix value;
  Matrix grad;

  Parameter() = default;
  Parameter(std::string n, Eigen::Index rows, Eigen::Index cols)
      : name(std::move(n)), value(Matrix::Zero(rows, cols)), grad(Matrix::Zero(rows, cols)) {}

  void zero_grad() { grad.setZero(); }
};

// Fills `p` with U(-limit, limit), limit = sqrt(6 / (fan_in + fan_out)).
void glorot_uniform(Matrix& p, double fan_in, double fan_out, Rng& rng);

// Derives an independent stream seed from a master seed and a tag.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t tag);

}  // namespace xdboost::nn
