#pragma once

#include "json.hpp"

#include <cstddef>
#include <span>

namespace xdboost::metrics {

struct MetricsReport {
  double auc = 0.5;
  double log_loss = 0.0;
  std::size_t n_instances = 0;
  std::size_t n_positive = 0;

  nlohmann::ordered_json to_json() const;
};

// Mann-Whitney AUC from average ranks; tied scores count one half.
// Throws MetricError unless both classes are present.
double auc(std::span<const double> scores, std::span<const double> labels);

// Unweighted mean binary cross-entropy with probabilities clipped to [1e-7, 1 - 1e-7].
double log_loss(std::span<const double> probs, std::span<const double> labels);

MetricsReport evaluate(std::span<const double> probs, std::span<const double> labels);

}  // namespace xdboost::metrics
