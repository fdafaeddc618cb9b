#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace groundchat {

/// One curated question/answer pair of the knowledge vault.
struct QaEntry {
  std::string id;
  std::string topic;
  std::string question;
  std::string answer;
  std::string source;

  bool operator==(const QaEntry&) const = default;
};

/// A single answer sentence tagged with the topic and entry it came from.
struct LabeledSentence {
  std::string text;
  std::string topic;
  std::string entry_id;

  bool operator==(const LabeledSentence&) const = default;
};

/// Immutable, validated collection of QA entries. Topics are trimmed and
/// compared case-sensitively.
class Corpus {
 public:
  Corpus() = default;
  /// Throws groundchat::Error on duplicate ids or empty fields.
  explicit Corpus(std::vector<QaEntry> entries);

  const std::vector<QaEntry>& entries() const noexcept { return entries_; }
  const std::set<std::string>& topics() const noexcept { return topics_; }
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }

 private:
  std::vector<QaEntry> entries_;
  std::set<std::string> topics_;
};

struct SplitSpec {
  double train_ratio = 0.8;
  double valid_ratio = 0.1;
  double test_ratio = 0.1;
  std::uint64_t seed = 0;
};

struct CorpusSplit {
  Corpus train;
  Corpus valid;
  Corpus test;
};

/// Reads a JSON-lines corpus: one object per line with exactly the fields
/// id, topic, question, answer, source. Blank lines are skipped.
Corpus load_corpus(const std::filesystem::path& path);
Corpus parse_corpus(std::istream& in, std::string_view source_name = "<stream>");

/// Splits at '.', '?' or '!' followed by whitespace and then an uppercase
/// letter or the end of the text. Known abbreviations never end a sentence.
std::vector<std::string> segment_sentences(std::string_view text);

/// Seeded shuffle, then floor(n * ratio) entries for valid and test with the
/// remainder going to train. Members keep their original corpus order.
CorpusSplit split_corpus(const Corpus& corpus, const SplitSpec& spec);

std::vector<LabeledSentence> sentence_bank(const Corpus& corpus);

}  // namespace groundchat
