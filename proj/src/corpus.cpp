#include "groundchat/corpus.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <unordered_set>

#include <json.hpp>

#include "groundchat/error.hpp"
#include "groundchat/tokenize.hpp"

namespace groundchat {

namespace {

constexpr std::array<std::string_view, 6> kAbbreviations = {"dr.", "e.g.", "i.e.", "vs.", "mr.", "ms."};

constexpr std::array<std::string_view, 5> kFields = {"id", "topic", "question", "answer", "source"};

bool is_terminator(char c) { return c == '.' || c == '?' || c == '!'; }

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

std::string lowercase(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

// Word ending at position `end` (exclusive), delimited on the left by whitespace.
std::string_view word_before(std::string_view text, std::size_t end) {
  std::size_t begin = end;
  while (begin > 0 && !is_space(text[begin - 1])) --begin;
  return text.substr(begin, end - begin);
}

bool is_abbreviation(std::string_view word) {
  const auto lower = lowercase(word);
  return std::find(kAbbreviations.begin(), kAbbreviations.end(), lower) != kAbbreviations.end();
}

}  // namespace

Corpus::Corpus(std::vector<QaEntry> entries) : entries_(std::move(entries)) {
  std::unordered_set<std::string> ids;
  for (auto& e : entries_) {
    e.topic = trim(e.topic);
    if (e.id.empty()) throw Error(errc::kInvalidArgument, "entry with empty id");
    if (!ids.insert(e.id).second) throw Error(errc::kInvalidArgument, "duplicate id '" + e.id + "'");
    if (e.topic.empty()) throw Error(errc::kInvalidArgument, "entry '" + e.id + "' has an empty topic");
    if (trim(e.question).empty()) throw Error(errc::kInvalidArgument, "entry '" + e.id + "' has an empty question");
    if (trim(e.answer).empty()) throw Error(errc::kInvalidArgument, "entry '" + e.id + "' has an empty answer");
    topics_.insert(e.topic);
  }
}

Corpus parse_corpus(std::istream& in, std::string_view source_name) {
  std::vector<QaEntry> entries;
  std::unordered_set<std::string> ids;
  std::string line;
  std::size_t line_no = 0;
  auto fail = [&](const std::string& what) {
    throw Error(errc::kParse, std::string(source_name) + ":" + std::to_string(line_no) + ": " + what);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    nlohmann::json record;
    try {
      record = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      fail(std::string("malformed JSON: ") + e.what());
    }
    if (!record.is_object()) fail("record is not a JSON object");
    for (const auto& [key, value] : record.items()) {
      if (std::find(kFields.begin(), kFields.end(), key) == kFields.end()) fail("unknown field '" + key + "'");
      if (!value.is_string()) fail("field '" + key + "' is not a string");
    }
    for (const auto field : kFields) {
      if (!record.contains(field)) fail("missing field '" + std::string(field) + "'");
    }
    QaEntry entry{record["id"], record["topic"], record["question"], record["answer"], record["source"]};
    if (!ids.insert(entry.id).second) fail("duplicate id '" + entry.id + "'");
    if (trim(entry.topic).empty() || trim(entry.question).empty() || trim(entry.answer).empty()) {
      fail("empty topic, question or answer in '" + entry.id + "'");
    }
    entries.push_back(std::move(entry));
  }
  return Corpus(std::move(entries));
}

Corpus load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(errc::kIo, "cannot open corpus file " + path.string());
  return parse_corpus(in, path.string());
}

std::vector<std::string> segment_sentences(std::string_view text) {
  std::vector<std::string> segments;
  std::size_t start = 0;
  std::size_t i = 0;
  auto emit = [&](std::size_t end) {
    auto seg = normalize_whitespace(text.substr(start, end - start));
    if (!seg.empty()) segments.push_back(std::move(seg));
    start = end;
  };
  while (i < text.size()) {
    if (!is_terminator(text[i])) {
      ++i;
      continue;
    }
    std::size_t end = i;
    while (end < text.size() && is_terminator(text[end])) ++end;  // "?!" or "..."
    std::size_t next = end;
    while (next < text.size() && is_space(text[next])) ++next;
    const bool followed_by_space = next > end;
    const bool at_end = next == text.size();
    const bool boundary = at_end || (followed_by_space && std::isupper(static_cast<unsigned char>(text[next])));
    if (boundary && !is_abbreviation(word_before(text, end))) emit(end);
    i = end;
  }
  emit(text.size());
  return segments;
}

CorpusSplit split_corpus(const Corpus& corpus, const SplitSpec& spec) {
  if (corpus.empty()) throw Error(errc::kInvalidArgument, "cannot split an empty corpus");
  if (spec.train_ratio < 0 || spec.valid_ratio < 0 || spec.test_ratio < 0) {
    throw Error(errc::kInvalidArgument, "split ratios must be non-negative");
  }
  if (std::abs(spec.train_ratio + spec.valid_ratio + spec.test_ratio - 1.0) > 1e-9) {
    throw Error(errc::kInvalidArgument, "split ratios must sum to 1");
  }
  const auto n = corpus.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(spec.seed);
  for (std::size_t i = n; i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng() % i);
    std::swap(order[i - 1], order[j]);
  }
  const auto count = [n](double ratio) {
    return static_cast<std::size_t>(std::floor(static_cast<double>(n) * ratio + 1e-9));
  };
  const auto n_valid = count(spec.valid_ratio);
  const auto n_test = count(spec.test_ratio);

  std::vector<int> bucket(n, 0);  // 0 train, 1 valid, 2 test
  for (std::size_t i = 0; i < n_valid; ++i) bucket[order[i]] = 1;
  for (std::size_t i = n_valid; i < n_valid + n_test; ++i) bucket[order[i]] = 2;

  std::array<std::vector<QaEntry>, 3> parts;
  for (std::size_t i = 0; i < n; ++i) parts[bucket[i]].push_back(corpus.entries()[i]);
  return {Corpus(std::move(parts[0])), Corpus(std::move(parts[1])), Corpus(std::move(parts[2]))};
}

std::vector<LabeledSentence> sentence_bank(const Corpus& corpus) {
  std::vector<LabeledSentence> bank;
  for (const auto& entry : corpus.entries()) {
    for (auto& sentence : segment_sentences(entry.answer)) {
      bank.push_back({std::move(sentence), entry.topic, entry.id});
    }
  }
  return bank;
}

}  // namespace groundchat
