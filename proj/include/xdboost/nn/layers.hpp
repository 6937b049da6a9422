#pragma once

#include "xdboost/nn/activation.hpp"
#include "xdboost/nn/tensor.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace xdboost::nn {

// Per-call state a layer needs for its backward pass. Forward passes are
// const on the layer, so concurrent inference never shares a cache.
struct DenseCache {
  Matrix input;
  Matrix output;
  bool ready = false;
};

struct EmbeddingCache {
  std::vector<std::int32_t> indices;
  bool ready = false;
};

class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  EmbeddingTable(std::string name, std::size_t vocab_size, std::size_t dim);

  std::size_t vocab_size() const { return static_cast<std::size_t>(table_.value.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(table_.value.cols()); }

  void init(Rng& rng);

  // One output row per index. Throws InputError for an index outside [0, vocab_size).
  Matrix forward(std::span<const std::int32_t> indices, EmbeddingCache* cache = nullptr) const;

  // Scatter-adds `grad_out` rows into the looked-up rows. Rows not looked up
  // are left untouched.
  void backward(const EmbeddingCache& cache, const Matrix& grad_out);

  Parameter& table() { return table_; }
  const Parameter& table() const { return table_; }

 private:
  Parameter table_;
};

class DenseLayer {
 public:
  DenseLayer() = default;
  DenseLayer(std::string name, std::size_t in_dim, std::size_t out_dim, Activation act);

  std::size_t in_dim() const { return static_cast<std::size_t>(weights_.value.cols()); }
  std::size_t out_dim() const { return static_cast<std::size_t>(weights_.value.rows()); }
  Activation activation() const { return act_; }

  void init(Rng& rng);

  // act(x W^T + b). `x` is batch x in_dim.
  Matrix forward(const Matrix& x, DenseCache* cache = nullptr) const;

  // Accumulates dW, db and returns d loss / d x.
  Matrix backward(const DenseCache& cache, const Matrix& grad_out);

  Parameter& weights() { return weights_; }
  Parameter& bias() { return bias_; }
  const Parameter& weights() const { return weights_; }
  const Parameter& bias() const { return bias_; }

 private:
  Parameter weights_;  // out x in
  Parameter bias_;     // 1 x out
  Activation act_ = Activation::identity;
};

}  // namespace xdboost::nn
