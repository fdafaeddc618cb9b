#include "groundchat/calibrate.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "groundchat/error.hpp"

namespace groundchat {

namespace {

Eigen::Index label_index(const std::vector<std::string>& labels, const std::string& gold) {
  const auto it = std::find(labels.begin(), labels.end(), gold);
  if (it == labels.end()) throw Error(errc::kInvalidArgument, "gold label '" + gold + "' not among prediction labels");
  return static_cast<Eigen::Index>(it - labels.begin());
}

}  // namespace

Temperature::Temperature(double value) : value_(value) {
  if (!std::isfinite(value) || value <= 0.0) {
    throw Error(errc::kInvalidArgument, "temperature must be positive and finite");
  }
}

CalibratedPrediction softmax_with_temperature(const Logits& logits, Temperature temperature) {
  if (logits.values.size() == 0) throw Error(errc::kInvalidArgument, "empty logits");
  if (!logits.values.allFinite()) throw Error(errc::kInvalidArgument, "non-finite logits");
  CalibratedPrediction out;
  out.probs = softmax(logits.values, temperature.value());
  out.labels = logits.labels;
  out.ranked.resize(static_cast<std::size_t>(logits.values.size()));
  std::iota(out.ranked.begin(), out.ranked.end(), Eigen::Index{0});
  // Ordered on the logits themselves: z / T preserves order for every T > 0.
  std::stable_sort(out.ranked.begin(), out.ranked.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return logits.values[a] > logits.values[b]; });
  return out;
}

double nll(std::span<const CalibratedPrediction> predictions, std::span<const std::string> gold) {
  if (predictions.size() != gold.size()) throw Error(errc::kInvalidArgument, "predictions and gold differ in length");
  if (predictions.empty()) throw Error(errc::kInvalidArgument, "nll of an empty set");
  double total = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const auto k = label_index(predictions[i].labels, gold[i]);
    total -= std::log(std::max(predictions[i].probs[k], kProbabilityFloor));
  }
  return total / static_cast<double>(predictions.size());
}

double nll_at(std::span<const Logits> logits, std::span<const std::string> gold, Temperature temperature) {
  if (logits.size() != gold.size()) throw Error(errc::kInvalidArgument, "logits and gold differ in length");
  if (logits.empty()) throw Error(errc::kInvalidArgument, "nll of an empty set");
  const double t = temperature.value();
  const double floor = std::log(kProbabilityFloor);
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    const auto k = label_index(logits[i].labels, gold[i]);
    const double log_p = logits[i].values[k] / t - log_sum_exp(logits[i].values, t);
    total -= std::max(log_p, floor);
  }
  return total / static_cast<double>(logits.size());
}

Temperature fit_temperature(std::span<const Logits> logits, std::span<const std::string> gold,
                            const TemperatureSearch& search) {
  if (logits.empty()) throw Error(errc::kInvalidArgument, "cannot fit a temperature on an empty set");
  auto objective = [&](double t) { return nll_at(logits, gold, Temperature(t)); };

  const int n = std::max(search.grid_points, 2);
  std::vector<double> grid(static_cast<std::size_t>(n));
  const double log_lo = std::log(search.grid_min);
  const double log_hi = std::log(search.grid_max);
  for (int i = 0; i < n; ++i) grid[i] = std::exp(log_lo + (log_hi - log_lo) * i / (n - 1));

  std::size_t best = 0;
  double best_value = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double v = objective(grid[i]);
    if (v < best_value) {
      best_value = v;
      best = i;
    }
  }

  double a = grid[best == 0 ? 0 : best - 1];
  double b = grid[std::min(best + 1, grid.size() - 1)];
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = objective(c);
  double fd = objective(d);
  while (b - a > search.tolerance) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = objective(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = objective(d);
    }
  }
  double t_star = 0.5 * (a + b);
  double f_star = objective(t_star);
  if (best_value < f_star) {
    t_star = grid[best];
    f_star = best_value;
  }
  if (objective(1.0) < f_star) t_star = 1.0;
  return Temperature(t_star);
}

GateDecision gate(const CalibratedPrediction& prediction, double threshold) {
  if (!(threshold > 0.0 && threshold <= 1.0)) throw Error(errc::kInvalidArgument, "threshold must lie in (0, 1]");
  GateDecision decision;
  if (prediction.top_confidence() > threshold) {
    decision.kind = GateDecision::Kind::Direct;
    decision.candidates = {prediction.top_label()};
    return decision;
  }
  decision.kind = GateDecision::Kind::Confirm;
  const auto count = std::min(kMaxConfirmations, prediction.ranked.size());
  for (std::size_t i = 0; i < count; ++i) decision.candidates.push_back(prediction.labels[prediction.ranked[i]]);
  return decision;
}

}  // namespace groundchat
