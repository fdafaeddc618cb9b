#include "groundchat/chatfallback.hpp"

#include <cmath>
#include <fstream>
#include <unordered_map>

#include <json.hpp>

#include "groundchat/error.hpp"
#include "groundchat/tokenize.hpp"

namespace groundchat {

namespace {

const std::set<std::string> kConditionWords = {
    "ache",      "aches",     "aching",    "affect",      "affects",     "bleeding",  "cure",    "diagnose",
    "diagnosis", "disease",   "dose",      "hurt",        "hurts",       "infection", "inflamed", "injury",
    "medicine",  "medication", "pain",     "painful",     "prescribe",   "surgery",   "swelling", "swollen",
    "symptom",   "symptoms",  "take",      "treat",       "treatment",   "tumor",     "disorder", "damage",
};

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h = 1469598103934665603ULL) {
  for (const char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace

double NgramModel::probability(const Context& context, const std::string& token) const {
  const double v = static_cast<double>(vocab.size());
  const auto total_it = context_totals.find(context);
  if (total_it == context_totals.end()) return smoothing_k / (smoothing_k * v);
  double count = 0.0;
  const auto& row = counts.at(context);
  if (const auto it = row.find(token); it != row.end()) count = it->second;
  return (count + smoothing_k) / (total_it->second + smoothing_k * v);
}

std::vector<std::string> NgramModel::padded(std::string_view text) const {
  std::vector<std::string> seq(static_cast<std::size_t>(n - 1), std::string(kSentenceStart));
  for (auto& t : tokenize(text)) seq.push_back(vocab.count(t) ? std::move(t) : std::string(kUnknownToken));
  seq.emplace_back(kSentenceEnd);
  return seq;
}

NgramModel train_ngram(std::span<const std::string> texts, int n, double smoothing_k, int min_count) {
  if (texts.empty()) throw Error(errc::kInvalidArgument, "cannot train a language model on no texts");
  if (n < 1) throw Error(errc::kInvalidArgument, "n-gram order must be at least 1");
  if (!(smoothing_k > 0.0)) throw Error(errc::kInvalidArgument, "smoothing k must be positive");

  NgramModel model;
  model.n = n;
  model.smoothing_k = smoothing_k;
  model.min_count = min_count;

  std::unordered_map<std::string, int> frequency;
  for (const auto& text : texts) {
    for (const auto& t : tokenize(text)) ++frequency[t];
  }
  for (const auto& [token, count] : frequency) {
    if (count >= min_count) model.vocab.insert(token);
  }
  model.vocab.insert(std::string(kSentenceStart));
  model.vocab.insert(std::string(kSentenceEnd));
  model.vocab.insert(std::string(kUnknownToken));

  const auto order = static_cast<std::size_t>(n);
  for (const auto& text : texts) {
    const auto seq = model.padded(text);
    for (std::size_t i = order - 1; i < seq.size(); ++i) {
      NgramModel::Context context(seq.begin() + static_cast<std::ptrdiff_t>(i - (order - 1)),
                                  seq.begin() + static_cast<std::ptrdiff_t>(i));
      ++model.counts[context][seq[i]];
      ++model.context_totals[context];
    }
  }
  return model;
}

std::vector<double> sequence_prob(const NgramModel& model, std::string_view text) {
  const auto seq = model.padded(text);
  const auto order = static_cast<std::size_t>(model.n);
  std::vector<double> probs;
  for (std::size_t i = order - 1; i < seq.size(); ++i) {
    NgramModel::Context context(seq.begin() + static_cast<std::ptrdiff_t>(i - (order - 1)),
                                seq.begin() + static_cast<std::ptrdiff_t>(i));
    probs.push_back(model.probability(context, seq[i]));
  }
  return probs;
}

LmEval evaluate_lm(const NgramModel& model, std::span<const std::string> texts) {
  if (texts.empty()) throw Error(errc::kInvalidArgument, "cannot evaluate a language model on no texts");
  double total = 0.0;
  std::size_t count = 0;
  for (const auto& text : texts) {
    for (const double p : sequence_prob(model, text)) {
      total -= std::log(p);
      ++count;
    }
  }
  LmEval out;
  out.tokens = count;
  out.nll = total / static_cast<double>(count);
  out.ppl = std::exp(out.nll);
  return out;
}

std::string generic_reply(std::string_view utterance, std::uint64_t seed, std::span<const std::string> pool) {
  if (pool.empty()) throw Error(errc::kInvalidArgument, "empty reply pool");
  std::string seed_bytes(sizeof seed, '\0');
  for (std::size_t i = 0; i < sizeof seed; ++i) seed_bytes[i] = static_cast<char>((seed >> (8 * i)) & 0xff);
  const auto h = fnv1a(utterance, fnv1a(seed_bytes));
  return pool[h % pool.size()];
}

bool looks_like_medical_advice(const BodyLexicon& lexicon, std::string_view text) {
  if (extract_body_parts(lexicon, text).empty()) return false;
  for (const auto& t : tokenize(text)) {
    if (kConditionWords.count(t)) return true;
  }
  return false;
}

std::vector<std::string> load_reply_pool(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(errc::kIo, "cannot open reply pool " + path.string());
  std::vector<std::string> pool;
  try {
    pool = nlohmann::json::parse(in).get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(errc::kParse, std::string("malformed reply pool: ") + e.what());
  }
  if (pool.empty()) throw Error(errc::kParse, "reply pool is empty");
  for (const auto& r : pool) {
    if (trim(r).empty()) throw Error(errc::kParse, "reply pool contains an empty reply");
  }
  return pool;
}

}  // namespace groundchat
