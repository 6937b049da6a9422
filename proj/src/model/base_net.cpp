#include "xdboost/model/base_net.hpp"

#include "xdboost/config_keys.hpp"
#include "xdboost/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace xdboost::model {

namespace {

nn::Activation head_activation(Head h) {
  return h == Head::sigmoid ? nn::Activation::sigmoid : nn::Activation::tanh;
}

bool finite(double v) { return std::isfinite(v); }

}  // namespace

std::string to_string(Head h) { return h == Head::sigmoid ? "sigmoid" : "tanh"; }
std::string to_string(LossKind l) { return l == LossKind::weighted_bce ? "weighted_bce" : "mae"; }

BaseNetConfig BaseNetConfig::as_regressor() const {
  BaseNetConfig c = *this;
  c.head = Head::tanh;
  c.loss = LossKind::mae;
  return c;
}

void BaseNetConfig::validate() const {
  if ((head == Head::sigmoid) != (loss == LossKind::weighted_bce)) {
    throw ConfigError("head " + to_string(head) + " cannot be trained with loss " +
                      to_string(loss) + " (sigmoid pairs with weighted_bce, tanh with mae)");
  }
  if (embedding_dim == 0) throw ConfigError("embedding_dim must be positive");
  if (batch_size == 0) throw ConfigError("batch_size must be positive");
  for (std::size_t h : hidden) {
    if (h == 0) throw ConfigError("hidden layer sizes must be positive");
  }
  if (!(adam.learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
  if (!(adam.beta1 >= 0.0 && adam.beta1 < 1.0) || !(adam.beta2 >= 0.0 && adam.beta2 < 1.0)) {
    throw ConfigError("Adam betas must lie in [0, 1)");
  }
  if (!(adam.epsilon > 0.0)) throw ConfigError("Adam epsilon must be positive");
}

nlohmann::ordered_json BaseNetConfig::to_json() const {
  nlohmann::ordered_json j;
  j["embedding_dim"] = embedding_dim;
  j["hidden"] = hidden;
  j["head"] = to_string(head);
  j["loss"] = to_string(loss);
  j["learning_rate"] = adam.learning_rate;
  j["beta1"] = adam.beta1;
  j["beta2"] = adam.beta2;
  j["epsilon"] = adam.epsilon;
  j["epochs"] = epochs;
  j["patience"] = patience;
  j["batch_size"] = batch_size;
  j["shuffle"] = shuffle;
  return j;
}

BaseNetConfig BaseNetConfig::from_json(const nlohmann::json& j) {
  BaseNetConfig c;
  require_known_keys(j,
                     {"embedding_dim", "hidden", "head", "loss", "learning_rate", "beta1", "beta2",
                      "epsilon", "epochs", "patience", "batch_size", "shuffle"},
                     "network config");
  try {
    c.embedding_dim = j.value("embedding_dim", c.embedding_dim);
    c.hidden = j.value("hidden", c.hidden);
    const std::string head = j.value("head", to_string(c.head));
    if (head == "sigmoid") {
      c.head = Head::sigmoid;
    } else if (head == "tanh") {
      c.head = Head::tanh;
    } else {
      throw ConfigError("unknown head '" + head + "'");
    }
    const std::string loss = j.value("loss", to_string(c.loss));
    if (loss == "weighted_bce") {
      c.loss = LossKind::weighted_bce;
    } else if (loss == "mae") {
      c.loss = LossKind::mae;
    } else {
      throw ConfigError("unknown loss '" + loss + "'");
    }
    c.adam.learning_rate = j.value("learning_rate", c.adam.learning_rate);
    c.adam.beta1 = j.value("beta1", c.adam.beta1);
    c.adam.beta2 = j.value("beta2", c.adam.beta2);
    c.adam.epsilon = j.value("epsilon", c.adam.epsilon);
    c.epochs = j.value("epochs", c.epochs);
    c.patience = j.value("patience", c.patience);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.shuffle = j.value("shuffle", c.shuffle);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("network config: ") + e.what());
  }
  return c;
}

nlohmann::ordered_json FitReport::to_json() const {
  nlohmann::ordered_json j;
  j["epochs_run"] = epochs.size();
  j["best_epoch"] = best_epoch;
  j["early_stopped"] = early_stopped;
  j["optimizer_steps"] = optimizer_steps;
  j["initial_val_loss"] = initial_val_loss ? nlohmann::ordered_json(*initial_val_loss) : nullptr;
  j["best_val_loss"] = best_val_loss ? nlohmann::ordered_json(*best_val_loss) : nullptr;
  auto& hist = j["history"] = nlohmann::ordered_json::array();
  for (const auto& e : epochs) {
    hist.push_back({{"epoch", e.epoch},
                    {"train_loss", e.train_loss},
                    {"val_loss", e.val_loss ? nlohmann::ordered_json(*e.val_loss) : nullptr}});
  }
  return j;
}

BaseNet::BaseNet(NetLayout layout, BaseNetConfig config, std::uint64_t seed)
    : config_(std::move(config)), layout_(std::move(layout)), seed_(seed) {
  config_.validate();
  if (layout_.fields() == 0) throw ConfigError("network needs at least one input field");
  const std::size_t dim = config_.embedding_dim;
  for (std::size_t f = 0; f < layout_.vocab_sizes.size(); ++f) {
    embeddings_.emplace_back("embedding." + std::to_string(f), layout_.vocab_sizes[f], dim);
    linear_categorical_.emplace_back("linear." + std::to_string(f), layout_.vocab_sizes[f], 1);
  }
  const auto n_cont = static_cast<Eigen::Index>(layout_.continuous);
  projections_ = nn::Parameter("projection", n_cont, static_cast<Eigen::Index>(dim));
  linear_continuous_ = nn::Parameter("linear.continuous", 1, n_cont);
  bias_ = nn::Parameter("bias", 1, 1);

  std::size_t in = layout_.fields() * dim;
  for (std::size_t k = 0; k < config_.hidden.size(); ++k) {
    mlp_.emplace_back("mlp." + std::to_string(k), in, config_.hidden[k], nn::Activation::relu);
    in = config_.hidden[k];
  }
  mlp_.emplace_back("mlp.out", in, 1, nn::Activation::identity);

  initialize();
  const auto params = parameters();
  adam_ = nn::AdamState::for_parameters(params, config_.adam);
}

void BaseNet::initialize() {
  nn::Rng rng(nn::derive_seed(seed_, 0));
  for (auto& e : embeddings_) e.init(rng);
  for (auto& e : linear_categorical_) e.init(rng);
  nn::glorot_uniform(projections_.value, 1.0, static_cast<double>(config_.embedding_dim), rng);
  nn::glorot_uniform(linear_continuous_.value, 1.0, 1.0, rng);
  bias_.value.setZero();
  for (auto& l : mlp_) l.init(rng);
  shuffle_rng_.seed(nn::derive_seed(seed_, 1));
}

std::vector<nn::Parameter*> BaseNet::parameters() {
  std::vector<nn::Parameter*> out;
  for (auto& e : embeddings_) out.push_back(&e.table());
  for (auto& e : linear_categorical_) out.push_back(&e.table());
  out.push_back(&projections_);
  out.push_back(&linear_continuous_);
  out.push_back(&bias_);
  for (auto& l : mlp_) {
    out.push_back(&l.weights());
    out.push_back(&l.bias());
  }
  return out;
}

std::vector<const nn::Parameter*> BaseNet::parameters() const {
  auto mutable_params = const_cast<BaseNet*>(this)->parameters();
  return {mutable_params.begin(), mutable_params.end()};
}

void BaseNet::check_matrix(const DesignMatrix& x) const {
  if (x.categorical_cols() != layout_.vocab_sizes.size() ||
      x.continuous_cols() != layout_.continuous) {
    throw InputError("design matrix has " + std::to_string(x.categorical_cols()) +
                     " categorical and " + std::to_string(x.continuous_cols()) +
                     " continuous columns; network expects " +
                     std::to_string(layout_.vocab_sizes.size()) + " and " +
                     std::to_string(layout_.continuous));
  }
}

std::vector<double> BaseNet::forward(const DesignMatrix& x, std::span<const std::size_t> rows,
                                     ForwardPass* pass) const {
  check_matrix(x);
  const auto batch = static_cast<Eigen::Index>(rows.size());
  const auto dim = static_cast<Eigen::Index>(config_.embedding_dim);
  const std::size_t n_cat = layout_.vocab_sizes.size();
  const std::size_t n_cont = layout_.continuous;

  ForwardPass local;
  ForwardPass& p = pass != nullptr ? *pass : local;
  p.complete = false;
  p.embedding.assign(n_cat, {});
  p.linear.assign(n_cat, {});
  p.dense.assign(mlp_.size(), {});
  p.field_vectors.resize(batch, static_cast<Eigen::Index>(layout_.fields()) * dim);
  p.continuous.resize(batch, static_cast<Eigen::Index>(n_cont));

  nn::Vector z = nn::Vector::Constant(batch, bias_.value(0, 0));
  std::vector<std::int32_t> idx(rows.size());
  for (std::size_t f = 0; f < n_cat; ++f) {
    for (std::size_t r = 0; r < rows.size(); ++r) idx[r] = x.cat(rows[r], f);
    p.field_vectors.middleCols(static_cast<Eigen::Index>(f) * dim, dim) =
        embeddings_[f].forward(idx, &p.embedding[f]);
    z += linear_categorical_[f].forward(idx, &p.linear[f]).col(0);
  }
  for (std::size_t g = 0; g < n_cont; ++g) {
    const auto col = static_cast<Eigen::Index>(g);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      p.continuous(static_cast<Eigen::Index>(r), col) = x.cont(rows[r], g);
    }
    p.field_vectors.middleCols(static_cast<Eigen::Index>(n_cat + g) * dim, dim).noalias() =
        p.continuous.col(col) * projections_.value.row(col);
    z += linear_continuous_.value(0, col) * p.continuous.col(col);
  }

  // FM pairwise term from the sum-square identity.
  p.field_sum = nn::Matrix::Zero(batch, dim);
  nn::Vector square_sum = nn::Vector::Zero(batch);
  for (std::size_t f = 0; f < layout_.fields(); ++f) {
    const auto block = p.field_vectors.middleCols(static_cast<Eigen::Index>(f) * dim, dim);
    p.field_sum += block;
    square_sum += block.rowwise().squaredNorm();
  }
  z += 0.5 * (p.field_sum.rowwise().squaredNorm() - square_sum);

  nn::Matrix h = p.field_vectors;
  for (std::size_t k = 0; k < mlp_.size(); ++k) {
    h = mlp_[k].forward(h, pass != nullptr ? &p.dense[k] : nullptr);
  }
  z += h.col(0);

  const nn::Activation act = head_activation(config_.head);
  p.output.resize(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    p.output[r] = nn::apply(act, z(static_cast<Eigen::Index>(r)));
  }
  p.complete = true;
  if (pass == nullptr) return std::move(local.output);
  return p.output;
}

double BaseNet::forward_row(const DesignMatrix& x, std::size_t row) const {
  const std::size_t rows[1] = {row};
  return forward(x, rows).front();
}

void BaseNet::backward(const ForwardPass& pass, std::span<const double> grad_output) {
  if (!pass.complete) throw UsageError("BaseNet::backward called before a completed forward");
  if (grad_output.size() != pass.output.size()) {
    throw UsageError("BaseNet::backward: gradient for " + std::to_string(grad_output.size()) +
                     " outputs, forward produced " + std::to_string(pass.output.size()));
  }
  const auto batch = static_cast<Eigen::Index>(pass.output.size());
  const auto dim = static_cast<Eigen::Index>(config_.embedding_dim);
  const std::size_t n_cat = layout_.vocab_sizes.size();
  const nn::Activation act = head_activation(config_.head);

  nn::Matrix dz(batch, 1);
  for (Eigen::Index r = 0; r < batch; ++r) {
    const double y = pass.output[static_cast<std::size_t>(r)];
    dz(r, 0) = grad_output[static_cast<std::size_t>(r)] * nn::derivative(act, 0.0, y);
  }
  const auto dz_col = dz.col(0);
  bias_.grad(0, 0) += dz_col.sum();

  nn::Matrix dfields = dz;
  for (std::size_t k = mlp_.size(); k-- > 0;) dfields = mlp_[k].backward(pass.dense[k], dfields);

  for (std::size_t f = 0; f < layout_.fields(); ++f) {
    auto block = dfields.middleCols(static_cast<Eigen::Index>(f) * dim, dim);
    block += dz_col.asDiagonal() *
             (pass.field_sum - pass.field_vectors.middleCols(static_cast<Eigen::Index>(f) * dim, dim));
  }

  for (std::size_t f = 0; f < n_cat; ++f) {
    embeddings_[f].backward(pass.embedding[f],
                            dfields.middleCols(static_cast<Eigen::Index>(f) * dim, dim));
    linear_categorical_[f].backward(pass.linear[f], dz);
  }
  for (std::size_t g = 0; g < layout_.continuous; ++g) {
    const auto col = static_cast<Eigen::Index>(g);
    const auto block = dfields.middleCols(static_cast<Eigen::Index>(n_cat + g) * dim, dim);
    projections_.grad.row(col) += pass.continuous.col(col).transpose() * block;
    linear_continuous_.grad(0, col) += pass.continuous.col(col).dot(dz_col);
  }
}

void BaseNet::zero_grad() {
  for (nn::Parameter* p : parameters()) p->zero_grad();
}

double BaseNet::loss(std::span<const double> output, std::span<const double> targets,
                     const nn::ClassWeights& weights) const {
  return config_.loss == LossKind::weighted_bce ? nn::weighted_bce_loss(output, targets, weights)
                                                : nn::mae_loss(output, targets);
}

std::vector<double> BaseNet::loss_grad(std::span<const double> output,
                                       std::span<const double> targets,
                                       const nn::ClassWeights& weights) const {
  return config_.loss == LossKind::weighted_bce ? nn::weighted_bce_grad(output, targets, weights)
                                                : nn::mae_grad(output, targets);
}

BaseNet::Snapshot BaseNet::snapshot() const {
  Snapshot s;
  for (const nn::Parameter* p : parameters()) s.values.push_back(p->value);
  s.adam = adam_;
  return s;
}

void BaseNet::restore(const Snapshot& s) {
  auto params = parameters();
  for (std::size_t k = 0; k < params.size(); ++k) params[k]->value = s.values[k];
  adam_ = s.adam;
}

FitReport BaseNet::fit(const DesignMatrix& x, std::span<const double> targets,
                       const nn::ClassWeights& weights, std::optional<ValidationSet> val) {
  check_matrix(x);
  if (targets.size() != x.rows()) {
    throw InputError("fit: " + std::to_string(targets.size()) + " targets for " +
                     std::to_string(x.rows()) + " rows");
  }
  auto check_targets = [this](std::span<const double> t, const char* which) {
    for (double v : t) {
      const bool ok = config_.loss == LossKind::weighted_bce ? (v == 0.0 || v == 1.0)
                                                             : (v >= -1.0 && v <= 1.0);
      if (!ok) {
        throw InputError(std::string("fit: ") + which + " target " + std::to_string(v) +
                         (config_.loss == LossKind::weighted_bce ? " is not binary"
                                                                 : " outside [-1, 1]"));
      }
    }
  };
  check_targets(targets, "training");
  if (val) {
    if (val->x == nullptr || val->targets.size() != val->x->rows()) {
      throw InputError("fit: validation targets do not match validation rows");
    }
    check_matrix(*val->x);
    check_targets(val->targets, "validation");
  }

  FitReport report;
  if (config_.epochs == 0 || x.rows() == 0) return report;

  const bool monitor = val.has_value() && val->x->rows() > 0;
  auto val_loss = [&]() { return loss(predict(*val->x), val->targets, weights); };

  Snapshot best;
  double best_loss = 0.0;
  if (monitor) {
    best_loss = val_loss();
    report.initial_val_loss = best_loss;
    report.best_val_loss = best_loss;
    best = snapshot();
  }

  std::vector<std::size_t> order(x.rows());
  std::iota(order.begin(), order.end(), 0);
  auto params = parameters();
  std::size_t since_best = 0;
  ForwardPass pass;
  std::vector<double> batch_targets;

  for (std::size_t epoch = 1; epoch <= config_.epochs; ++epoch) {
    if (config_.shuffle) std::shuffle(order.begin(), order.end(), shuffle_rng_);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config_.batch_size) {
      const std::size_t end = std::min(order.size(), start + config_.batch_size);
      const std::span<const std::size_t> rows(order.data() + start, end - start);
      batch_targets.resize(rows.size());
      for (std::size_t r = 0; r < rows.size(); ++r) batch_targets[r] = targets[rows[r]];

      const std::vector<double>& out = forward(x, rows, &pass);
      const double batch_loss = loss(out, batch_targets, weights);
      if (!finite(batch_loss)) {
        std::ostringstream msg;
        msg << "training diverged: non-finite " << to_string(config_.loss) << " loss at epoch "
            << epoch << ", batch starting at row " << start << " (step " << adam_.step + 1 << ")";
        throw TrainingError(msg.str());
      }
      epoch_loss += batch_loss * static_cast<double>(rows.size());
      zero_grad();
      backward(pass, loss_grad(out, batch_targets, weights));
      nn::adam_step(params, adam_);
      ++report.optimizer_steps;
    }

    EpochRecord rec{epoch, epoch_loss / static_cast<double>(order.size()), std::nullopt};
    if (monitor) {
      const double v = val_loss();
      if (!finite(v)) {
        throw TrainingError("training diverged: non-finite validation loss at epoch " +
                            std::to_string(epoch));
      }
      rec.val_loss = v;
      if (v < best_loss) {
        best_loss = v;
        report.best_epoch = epoch;
        report.best_val_loss = v;
        best = snapshot();
        since_best = 0;
      } else {
        ++since_best;
      }
    } else {
      report.best_epoch = epoch;
    }
    report.epochs.push_back(rec);
    if (monitor && since_best >= config_.patience) {
      report.early_stopped = true;
      break;
    }
  }
  if (monitor && report.best_epoch != report.epochs.size()) restore(best);
  return report;
}

std::vector<double> BaseNet::predict(const DesignMatrix& x) const {
  check_matrix(x);
  std::vector<double> out;
  out.reserve(x.rows());
  std::vector<std::size_t> rows;
  for (std::size_t start = 0; start < x.rows(); start += config_.batch_size) {
    const std::size_t end = std::min(x.rows(), start + config_.batch_size);
    rows.resize(end - start);
    std::iota(rows.begin(), rows.end(), start);
    const auto part = forward(x, rows);
    out.insert(out.end(), part.begin(), part.end());
  }
  return out;
}

bool BaseNet::same_parameters(const BaseNet& other) const {
  const auto a = parameters();
  const auto b = other.parameters();
  if (a.size() != b.size()) return false;
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (a[k]->value.rows() != b[k]->value.rows() || a[k]->value.cols() != b[k]->value.cols() ||
        a[k]->value != b[k]->value) {
      return false;
    }
  }
  return true;
}

NetLayout layout_of(const data::FeatureSchema& schema) {
  return NetLayout{schema.vocab_sizes(), schema.continuous.size() + schema.placeholders,
                   schema.hash()};
}

BaseNet build_base_net(const data::FeatureSchema& schema, const BaseNetConfig& config,
                       std::uint64_t seed) {
  if (schema.field_count() == 0) throw ConfigError("schema has no fields");
  return BaseNet(layout_of(schema), config, seed);
}

double fm_pairwise(std::span<const std::vector<double>> field_vectors) {
  if (field_vectors.empty()) throw UsageError("fm_pairwise needs at least one vector");
  const std::size_t dim = field_vectors.front().size();
  std::vector<double> sum(dim, 0.0);
  double squares = 0.0;
  for (const auto& v : field_vectors) {
    if (v.size() != dim) {
      throw UsageError("fm_pairwise: vector of dimension " + std::to_string(v.size()) +
                       " among vectors of dimension " + std::to_string(dim));
    }
    for (std::size_t k = 0; k < dim; ++k) {
      sum[k] += v[k];
      squares += v[k] * v[k];
    }
  }
  double total = 0.0;
  for (double s : sum) total += s * s;
  return 0.5 * (total - squares);
}

}  // namespace xdboost::model
