#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "groundchat/textmodel.hpp"

namespace groundchat {

/// Softmax of z / T with max-subtraction.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> softmax(const Eigen::MatrixBase<Derived>& z,
                                                                   typename Derived::Scalar temperature = 1) {
  using Scalar = typename Derived::Scalar;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> out = ((z.array() - z.maxCoeff()) / temperature).exp();
  out /= out.sum();
  return out;
}

/// log(sum(exp(z / T))), stable for large logits.
template <typename Derived>
typename Derived::Scalar log_sum_exp(const Eigen::MatrixBase<Derived>& z, typename Derived::Scalar temperature = 1) {
  const auto m = z.maxCoeff();
  return m / temperature + std::log(((z.array() - m) / temperature).exp().sum());
}

/// Positive, finite softmax temperature.
class Temperature {
 public:
  /// Throws groundchat::Error unless value is finite and > 0.
  explicit Temperature(double value);
  double value() const noexcept { return value_; }

 private:
  double value_;
};

struct CalibratedPrediction {
  Eigen::VectorXd probs;
  std::vector<std::string> labels;
  std::vector<Eigen::Index> ranked;  // descending probability, ties -> lower index

  double top_confidence() const { return probs[ranked.front()]; }
  const std::string& top_label() const { return labels[ranked.front()]; }
};

CalibratedPrediction softmax_with_temperature(const Logits& logits, Temperature temperature);

/// Probability floor applied inside nll.
inline constexpr double kProbabilityFloor = 1e-12;

/// Mean of -ln p(gold). Throws if a gold label is missing from its prediction.
double nll(std::span<const CalibratedPrediction> predictions, std::span<const std::string> gold);

/// nll of the logits after scaling by 1/T, without materialising predictions.
double nll_at(std::span<const Logits> logits, std::span<const std::string> gold, Temperature temperature);

struct TemperatureSearch {
  double grid_min = 0.05;
  double grid_max = 20.0;
  int grid_points = 200;
  double tolerance = 1e-4;
};

/// Minimises validation nll: log-spaced grid, then golden-section refinement
/// between the neighbours of the best grid point. Never worse than T = 1.
Temperature fit_temperature(std::span<const Logits> logits, std::span<const std::string> gold,
                            const TemperatureSearch& search = {});

struct GateDecision {
  enum class Kind { Direct, Confirm };
  Kind kind = Kind::Confirm;
  /// Direct: exactly the chosen topic. Confirm: up to four ranked candidates.
  std::vector<std::string> candidates;

  const std::string& topic() const { return candidates.front(); }
};

inline constexpr std::size_t kMaxConfirmations = 4;
inline constexpr double kDefaultConfidenceThreshold = 0.9;

/// Direct when the top probability is strictly above the threshold.
GateDecision gate(const CalibratedPrediction& prediction, double threshold = kDefaultConfidenceThreshold);

}  // namespace groundchat
