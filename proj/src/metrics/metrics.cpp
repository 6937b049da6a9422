#include "xdboost/metrics.hpp"

#include "xdboost/error.hpp"
#include "xdboost/nn/loss.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

namespace xdboost::metrics {

namespace {

void check_lengths(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw MetricError(std::string(what) + ": " + std::to_string(a) + " predictions for " +
                      std::to_string(b) + " labels");
  }
}

}  // namespace

nlohmann::ordered_json MetricsReport::to_json() const {
  return {{"auc", auc}, {"log_loss", log_loss}, {"n_instances", n_instances},
          {"n_positive", n_positive}};
}

double auc(std::span<const double> scores, std::span<const double> labels) {
  check_lengths(scores.size(), labels.size(), "auc");
  std::size_t n_pos = 0;
  for (double y : labels) {
    if (y != 0.0 && y != 1.0) throw MetricError("auc: labels must be 0 or 1");
    if (y == 1.0) ++n_pos;
  }
  const std::size_t n_neg = labels.size() - n_pos;
  if (n_pos == 0 || n_neg == 0) throw MetricError("auc: both classes must be present");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Sum of 1-based average ranks of the positives.
  double rank_sum = 0.0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) {
      if (labels[order[k]] == 1.0) rank_sum += avg_rank;
    }
    i = j;
  }
  const double pos = static_cast<double>(n_pos);
  const double u = rank_sum - pos * (pos + 1.0) / 2.0;
  return u / (pos * static_cast<double>(n_neg));
}

double log_loss(std::span<const double> probs, std::span<const double> labels) {
  check_lengths(probs.size(), labels.size(), "log_loss");
  if (probs.empty()) throw MetricError("log_loss: no instances");
  double total = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const double p = nn::clip_probability(probs[i]);
    total += -labels[i] * std::log(p) - (1.0 - labels[i]) * std::log(1.0 - p);
  }
  return total / static_cast<double>(probs.size());
}

MetricsReport evaluate(std::span<const double> probs, std::span<const double> labels) {
  MetricsReport r;
  r.auc = auc(probs, labels);
  r.log_loss = log_loss(probs, labels);
  r.n_instances = labels.size();
  r.n_positive = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1.0));
  return r;
}

}  // namespace xdboost::metrics
