#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "groundchat/ground.hpp"

namespace groundchat {

inline constexpr std::string_view kSentenceStart = "<s>";
inline constexpr std::string_view kSentenceEnd = "</s>";
inline constexpr std::string_view kUnknownToken = "<unk>";

/// Add-k smoothed n-gram language model over textmodel tokens.
struct NgramModel {
  using Context = std::vector<std::string>;

  int n = 3;
  double smoothing_k = 0.1;
  int min_count = 2;
  std::set<std::string> vocab;  // includes the three markers
  std::map<Context, std::map<std::string, int>> counts;
  std::map<Context, int> context_totals;

  /// (count + k) / (context_total + k * |vocab|). Unseen contexts give 1 / |vocab|.
  double probability(const Context& context, const std::string& token) const;

  /// Token sequence the model predicts for `text`: tokens mapped to <unk>
  /// when out of vocabulary, terminated by </s>, preceded by n - 1 <s>.
  std::vector<std::string> padded(std::string_view text) const;
};

/// Tokens seen fewer than `min_count` times across the corpus become <unk>.
NgramModel train_ngram(std::span<const std::string> texts, int n = 3, double smoothing_k = 0.1, int min_count = 2);

/// One probability per predicted token, </s> included.
std::vector<double> sequence_prob(const NgramModel& model, std::string_view text);

struct LmEval {
  double nll = 0.0;  // mean per-token, natural log
  double ppl = 1.0;  // exp(nll)
  std::size_t tokens = 0;
};

LmEval evaluate_lm(const NgramModel& model, std::span<const std::string> texts);

/// Deterministic pick from the reply pool keyed by (utterance, seed).
std::string generic_reply(std::string_view utterance, std::uint64_t seed, std::span<const std::string> pool);

/// True when a text names a lexicon body part together with a symptom or
/// treatment word, the pattern of a medical claim.
bool looks_like_medical_advice(const BodyLexicon& lexicon, std::string_view text);

/// JSON array of non-empty strings.
std::vector<std::string> load_reply_pool(const std::filesystem::path& path);

}  // namespace groundchat
