#include "groundchat/textmodel.hpp"

#include <algorithm>
#include <map>
#include <random>
#include <set>

#include "groundchat/calibrate.hpp"
#include "groundchat/error.hpp"
#include "groundchat/tokenize.hpp"

namespace groundchat {

Featurizer make_featurizer(std::vector<std::string> tokens, Eigen::VectorXd idf, int min_df) {
  if (static_cast<Eigen::Index>(tokens.size()) != idf.size()) {
    throw Error(errc::kInvalidArgument, "featurizer tokens and idf differ in length");
  }
  if (!idf.allFinite() || (idf.size() > 0 && idf.minCoeff() < 0.0)) {
    throw Error(errc::kInvalidArgument, "idf weights must be finite and non-negative");
  }
  Featurizer f;
  f.tokens = std::move(tokens);
  f.idf = std::move(idf);
  f.min_df = min_df;
  for (std::size_t i = 0; i < f.tokens.size(); ++i) {
    if (!f.index.emplace(f.tokens[i], static_cast<Eigen::Index>(i)).second) {
      throw Error(errc::kInvalidArgument, "duplicate vocabulary token '" + f.tokens[i] + "'");
    }
  }
  return f;
}

Featurizer fit_featurizer(std::span<const std::string> texts, int min_df) {
  if (texts.empty()) throw Error(errc::kInvalidArgument, "cannot fit a featurizer on no texts");
  std::map<std::string, int> df;
  for (const auto& text : texts) {
    const auto tokens = tokenize(text);
    for (const auto& t : std::set<std::string>(tokens.begin(), tokens.end())) ++df[t];
  }
  std::vector<std::string> vocab;
  std::vector<double> weights;
  const double n = static_cast<double>(texts.size());
  for (const auto& [token, count] : df) {
    if (count < min_df) continue;
    vocab.push_back(token);
    weights.push_back(std::log((1.0 + n) / (1.0 + count)) + 1.0);
  }
  return make_featurizer(std::move(vocab), Eigen::Map<Eigen::VectorXd>(weights.data(), static_cast<Eigen::Index>(weights.size())),
                         min_df);
}

SparseVector encode(const Featurizer& featurizer, std::string_view text) {
  std::map<Eigen::Index, double> counts;
  for (const auto& token : tokenize(text)) {
    if (const auto it = featurizer.index.find(token); it != featurizer.index.end()) counts[it->second] += 1.0;
  }
  SparseVector v(featurizer.dimension());
  double norm2 = 0.0;
  for (auto& [i, c] : counts) {
    c *= featurizer.idf[i];
    norm2 += c * c;
  }
  if (norm2 == 0.0) return v;
  const double inv = 1.0 / std::sqrt(norm2);
  v.reserve(static_cast<Eigen::Index>(counts.size()));
  for (const auto& [i, c] : counts) v.insert(i) = c * inv;
  return v;
}

TrainingSet make_training_set(std::span<const Example> data) {
  if (data.empty()) throw Error(errc::kInvalidArgument, "empty training set");
  const auto dim = data.front().features.size();
  std::set<std::string> distinct;
  for (const auto& ex : data) {
    if (ex.features.size() != dim) throw Error(errc::kInvalidArgument, "feature dimension mismatch");
    distinct.insert(ex.label);
  }
  if (distinct.size() < 2) throw Error(errc::kInvalidArgument, "training needs at least two distinct labels");

  TrainingSet set;
  set.labels.assign(distinct.begin(), distinct.end());
  std::vector<Eigen::Triplet<double>> triplets;
  for (std::size_t r = 0; r < data.size(); ++r) {
    for (SparseVector::InnerIterator it(data[r].features); it; ++it) {
      triplets.emplace_back(static_cast<Eigen::Index>(r), it.index(), it.value());
    }
    const auto pos = std::lower_bound(set.labels.begin(), set.labels.end(), data[r].label);
    set.y.push_back(static_cast<Eigen::Index>(pos - set.labels.begin()));
  }
  set.x.resize(static_cast<Eigen::Index>(data.size()), dim);
  set.x.setFromTriplets(triplets.begin(), triplets.end());
  return set;
}

LossGradient cross_entropy_objective(const LinearClassifier& model, const TrainingSet& set, double l2) {
  const auto n = set.x.rows();
  Eigen::MatrixXd z = set.x * model.weights.transpose();  // [n x classes]
  z.rowwise() += model.bias.transpose();

  Eigen::MatrixXd residual(n, model.num_classes());
  double loss = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::VectorXd row = z.row(i).transpose();
    const double lse = log_sum_exp(row);
    loss += lse - row[set.y[i]];
    residual.row(i) = (row.array() - lse).exp().matrix().transpose();
    residual(i, set.y[i]) -= 1.0;
  }
  residual /= static_cast<double>(n);

  LossGradient out;
  out.loss = loss / static_cast<double>(n) + 0.5 * l2 * model.weights.squaredNorm();
  out.weights = (set.x.transpose() * residual).transpose() + l2 * model.weights;
  out.bias = residual.colwise().sum().transpose();
  return out;
}

LinearClassifier train_classifier(std::span<const Example> data, const TrainConfig& config, TrainReport* report) {
  if (!(config.learning_rate > 0.0) || config.epochs < 1 || config.l2 < 0.0) {
    throw Error(errc::kInvalidArgument, "invalid training configuration");
  }
  const auto set = make_training_set(data);
  const auto classes = static_cast<Eigen::Index>(set.labels.size());

  LinearClassifier model;
  model.labels = set.labels;
  model.weights.resize(classes, set.x.cols());
  model.bias = Eigen::VectorXd::Zero(classes);
  std::mt19937_64 rng(config.seed);
  for (Eigen::Index r = 0; r < classes; ++r) {
    for (Eigen::Index c = 0; c < set.x.cols(); ++c) {
      // Uniform in [-0.01, 0.01) from the raw 53 high bits, portable across standard libraries.
      model.weights(r, c) = (static_cast<double>(rng() >> 11) * 0x1.0p-53 - 0.5) * 0.02;
    }
  }

  TrainReport local;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const auto step = cross_entropy_objective(model, set, config.l2);
    local.losses.push_back(step.loss);
    model.weights -= config.learning_rate * step.weights;
    model.bias -= config.learning_rate * step.bias;
  }
  local.initial_loss = local.losses.front();
  local.final_loss = cross_entropy_objective(model, set, config.l2).loss;
  if (report) *report = std::move(local);
  return model;
}

Logits predict_logits(const LinearClassifier& model, const SparseVector& features) {
  if (features.size() != model.num_features()) throw Error(errc::kInvalidArgument, "feature dimension mismatch");
  return {model.weights * features + model.bias, model.labels};
}

Logits predict_logits(const LinearClassifier& model, const Featurizer& featurizer, std::string_view text) {
  return predict_logits(model, encode(featurizer, text));
}

Eigen::Index argmax(const Eigen::VectorXd& values) {
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

double evaluate_accuracy(const LinearClassifier& model, const Featurizer& featurizer,
                         std::span<const LabeledText> data) {
  if (data.empty()) throw Error(errc::kInvalidArgument, "cannot evaluate on an empty dataset");
  std::size_t correct = 0;
  for (const auto& ex : data) {
    const auto z = predict_logits(model, featurizer, ex.text);
    if (model.labels[static_cast<std::size_t>(argmax(z.values))] == ex.label) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

TextClassifier train_text_classifier(std::span<const LabeledText> data, const TrainConfig& config, int min_df,
                                     TrainReport* report) {
  std::vector<std::string> texts;
  texts.reserve(data.size());
  for (const auto& ex : data) texts.push_back(ex.text);
  TextClassifier out;
  out.featurizer = fit_featurizer(texts, min_df);
  out.config = config;
  std::vector<Example> examples;
  examples.reserve(data.size());
  for (const auto& ex : data) examples.push_back({encode(out.featurizer, ex.text), ex.label});
  out.model = train_classifier(examples, config, report);
  return out;
}

}  // namespace groundchat
