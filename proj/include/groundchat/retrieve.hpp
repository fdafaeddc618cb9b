#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "groundchat/corpus.hpp"

namespace groundchat {

struct Bm25Params {
  double k1 = 1.2;
  double b = 0.75;
};

/// Inverted index over a sentence bank. Sentence ids are positions in the
/// bank. Collection statistics used for scoring (sentence count, document
/// frequency, average length) are taken per topic, since every query is
/// confined to one topic.
struct SentenceIndex {
  struct Posting {
    std::size_t sentence;
    int tf;
  };

  std::unordered_map<std::string, std::vector<Posting>> postings;  // postings sorted by sentence id
  std::vector<LabeledSentence> sentences;
  std::vector<int> doc_lengths;
  double avg_len = 0.0;
  std::map<std::string, std::vector<std::size_t>> by_topic;
  std::map<std::string, double> topic_avg_len;

  bool has_topic(const std::string& topic) const { return by_topic.count(topic) != 0; }
};

/// Throws on an empty bank.
SentenceIndex build_index(std::vector<LabeledSentence> bank);

struct RankedAnswer {
  std::vector<std::size_t> sentence_ids;
  std::vector<double> scores;  // non-increasing
  std::string text;            // selected sentences joined by single spaces

  bool empty() const noexcept { return sentence_ids.empty(); }
};

inline constexpr int kDefaultTopK = 3;

/// BM25 idf: ln(1 + (N - df + 0.5) / (df + 0.5)).
double bm25_idf(double n, double df);

/// Ranks the sentences of `topic` sharing at least one token with the
/// question. Ties go to the lower sentence id. A question with no overlap
/// yields an empty answer.
RankedAnswer score_sentences(const SentenceIndex& index, std::string_view question, const std::string& topic,
                             int k = kDefaultTopK, const Bm25Params& params = {});

struct RetrievalQuery {
  std::string question;
  std::string topic;
  std::string entry_id;
};

struct RetrievalMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double accuracy = 0.0;
};

/// Sentence-level micro counts summed over all queries: a retrieved sentence
/// from the gold entry is a true positive, any other retrieved sentence a
/// false positive, and a gold-entry sentence left out of the top k a false
/// negative. Accuracy is the fraction of queries with at least one hit.
RetrievalMetrics evaluate_retriever(const SentenceIndex& index, std::span<const RetrievalQuery> queries,
                                    int k = kDefaultTopK);

}  // namespace groundchat
