#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

namespace groundchat {

using SparseVector = Eigen::SparseVector<double>;

/// tf-idf text encoder. Stands in for any text -> fixed-width vector encoder
/// feeding the linear heads below.
struct Featurizer {
  std::vector<std::string> tokens;  // index -> token, lexicographic
  std::unordered_map<std::string, Eigen::Index> index;
  Eigen::VectorXd idf;
  int min_df = 1;

  Eigen::Index dimension() const noexcept { return static_cast<Eigen::Index>(tokens.size()); }
};

/// Builds a featurizer from parallel token/idf lists (used when loading).
Featurizer make_featurizer(std::vector<std::string> tokens, Eigen::VectorXd idf, int min_df);

/// Vocabulary keeps tokens with document frequency >= min_df;
/// idf(t) = ln((1 + N) / (1 + df(t))) + 1.
Featurizer fit_featurizer(std::span<const std::string> texts, int min_df = 1);

/// count(t) * idf(t), L2-normalised. Out-of-vocabulary tokens are dropped;
/// an all-OOV text yields the zero vector.
SparseVector encode(const Featurizer& featurizer, std::string_view text);

struct TrainConfig {
  double learning_rate = 2.0;
  int epochs = 300;
  double l2 = 1e-4;
  std::uint64_t seed = 0;
};

/// Multinomial logistic regression head: z = W x + b.
struct LinearClassifier {
  Eigen::MatrixXd weights;  // [classes x features]
  Eigen::VectorXd bias;     // [classes]
  std::vector<std::string> labels;

  Eigen::Index num_classes() const noexcept { return weights.rows(); }
  Eigen::Index num_features() const noexcept { return weights.cols(); }
};

struct Logits {
  Eigen::VectorXd values;
  std::vector<std::string> labels;
};

struct Example {
  SparseVector features;
  std::string label;
};

/// Design matrix and class indices for a fixed label order.
struct TrainingSet {
  Eigen::SparseMatrix<double, Eigen::RowMajor> x;
  std::vector<Eigen::Index> y;
  std::vector<std::string> labels;
};

/// Labels are ordered lexicographically. Throws on fewer than two distinct
/// labels or mixed feature dimensions.
TrainingSet make_training_set(std::span<const Example> data);

struct LossGradient {
  double loss = 0.0;
  Eigen::MatrixXd weights;
  Eigen::VectorXd bias;
};

/// Mean cross-entropy plus (l2 / 2) * ||W||^2, with its analytic gradient.
LossGradient cross_entropy_objective(const LinearClassifier& model, const TrainingSet& set, double l2);

struct TrainReport {
  double initial_loss = 0.0;
  double final_loss = 0.0;
  std::vector<double> losses;  // one per epoch, before the update
};

/// Full-batch gradient descent. The seed drives a small uniform weight init.
LinearClassifier train_classifier(std::span<const Example> data, const TrainConfig& config,
                                  TrainReport* report = nullptr);

Logits predict_logits(const LinearClassifier& model, const SparseVector& features);
Logits predict_logits(const LinearClassifier& model, const Featurizer& featurizer, std::string_view text);

/// Index of the largest value; ties go to the lowest index.
Eigen::Index argmax(const Eigen::VectorXd& values);

struct LabeledText {
  std::string text;
  std::string label;
};

/// Fraction of examples whose argmax label equals the gold label.
double evaluate_accuracy(const LinearClassifier& model, const Featurizer& featurizer,
                         std::span<const LabeledText> data);

/// Featurizer and head trained together, persisted as one document.
struct TextClassifier {
  Featurizer featurizer;
  LinearClassifier model;
  TrainConfig config;

  Logits logits(std::string_view text) const { return predict_logits(model, featurizer, text); }
};

TextClassifier train_text_classifier(std::span<const LabeledText> data, const TrainConfig& config,
                                     int min_df = 1, TrainReport* report = nullptr);

}  // namespace groundchat
