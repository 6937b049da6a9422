#include "xdboost/nn/layers.hpp"

#include "xdboost/error.hpp"

#include <string>

namespace xdboost::nn {

EmbeddingTable::EmbeddingTable(std::string name, std::size_t vocab_size, std::size_t dim)
    : table_(std::move(name), static_cast<Eigen::Index>(vocab_size),
             static_cast<Eigen::Index>(dim)) {
  if (vocab_size == 0 || dim == 0) {
    throw ConfigError("embedding table '" + table_.name + "' needs positive vocab and dim");
  }
}

void EmbeddingTable::init(Rng& rng) {
  glorot_uniform(table_.value, static_cast<double>(vocab_size()), static_cast<double>(dim()), rng);
}

Matrix EmbeddingTable::forward(std::span<const std::int32_t> indices,
                               EmbeddingCache* cache) const {
  const auto vocab = static_cast<std::int32_t>(vocab_size());
  Matrix out(static_cast<Eigen::Index>(indices.size()), table_.value.cols());
  for (std::size_t r = 0; r < indices.size(); ++r) {
    const std::int32_t idx = indices[r];
    if (idx < 0 || idx >= vocab) {
      throw InputError("embedding '" + table_.name + "': index " + std::to_string(idx) +
                       " outside vocab of size " + std::to_string(vocab));
    }
    out.row(static_cast<Eigen::Index>(r)) = table_.value.row(idx);
  }
  if (cache != nullptr) {
    cache->indices.assign(indices.begin(), indices.end());
    cache->ready = true;
  }
  return out;
}

void EmbeddingTable::backward(const EmbeddingCache& cache, const Matrix& grad_out) {
  if (!cache.ready) {
    throw UsageError("embedding '" + table_.name + "': backward called before forward");
  }
  if (grad_out.rows() != static_cast<Eigen::Index>(cache.indices.size()) ||
      grad_out.cols() != table_.value.cols()) {
    throw UsageError("embedding '" + table_.name + "': gradient shape mismatch");
  }
  for (std::size_t r = 0; r < cache.indices.size(); ++r) {
    table_.grad.row(cache.indices[r]) += grad_out.row(static_cast<Eigen::Index>(r));
  }
}

DenseLayer::DenseLayer(std::string name, std::size_t in_dim, std::size_t out_dim,
                       Activation act)
    : weights_(name + ".weight", static_cast<Eigen::Index>(out_dim),
               static_cast<Eigen::Index>(in_dim)),
      bias_(name + ".bias", 1, static_cast<Eigen::Index>(out_dim)),
      act_(act) {
  if (in_dim == 0 || out_dim == 0) {
    throw ConfigError("dense layer '" + name + "' needs positive dimensions");
  }
}

void DenseLayer::init(Rng& rng) {
  glorot_uniform(weights_.value, static_cast<double>(in_dim()), static_cast<double>(out_dim()),
                 rng);
  bias_.value.setZero();
}

Matrix DenseLayer::forward(const Matrix& x, DenseCache* cache) const {
  if (x.cols() != weights_.value.cols()) {
    throw InputError("dense layer '" + weights_.name + "': expected " +
                     std::to_string(weights_.value.cols()) + " input columns, got " +
                     std::to_string(x.cols()));
  }
  Matrix out = x * weights_.value.transpose();
  out.rowwise() += bias_.value.row(0);
  if (cache != nullptr) cache->input = x;
  apply_inplace(act_, out);
  if (cache != nullptr) {
    cache->output = out;
    cache->ready = true;
  }
  return out;
}

Matrix DenseLayer::backward(const DenseCache& cache, const Matrix& grad_out) {
  if (!cache.ready) {
    throw UsageError("dense layer '" + weights_.name + "': backward called before forward");
  }
  if (grad_out.rows() != cache.output.rows() || grad_out.cols() != cache.output.cols()) {
    throw UsageError("dense layer '" + weights_.name + "': gradient shape mismatch");
  }
  Matrix delta = grad_out;
  switch (act_) {
    case Activation::identity:
      break;
    case Activation::relu:
      delta = (cache.output.array() > 0.0).select(grad_out, 0.0);
      break;
    case Activation::sigmoid:
      delta.array() *= cache.output.array() * (1.0 - cache.output.array());
      break;
    case Activation::tanh:
      delta.array() *= 1.0 - cache.output.array().square();
      break;
  }
  weights_.grad.noalias() += delta.transpose() * cache.input;
  bias_.grad.row(0) += delta.colwise().sum();
  return delta * weights_.value;
}

}  // namespace xdboost::nn
