#include "groundchat/retrieve.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "groundchat/error.hpp"
#include "groundchat/tokenize.hpp"

namespace groundchat {

SentenceIndex build_index(std::vector<LabeledSentence> bank) {
  if (bank.empty()) throw Error(errc::kInvalidArgument, "cannot index an empty sentence bank");
  SentenceIndex index;
  index.sentences = std::move(bank);
  index.doc_lengths.reserve(index.sentences.size());
  std::map<std::string, double> topic_tokens;
  double total = 0.0;
  for (std::size_t id = 0; id < index.sentences.size(); ++id) {
    const auto& sentence = index.sentences[id];
    const auto tokens = tokenize(sentence.text);
    std::map<std::string, int> tf;
    for (const auto& t : tokens) ++tf[t];
    for (const auto& [token, count] : tf) index.postings[token].push_back({id, count});
    const auto len = static_cast<int>(tokens.size());
    index.doc_lengths.push_back(len);
    index.by_topic[sentence.topic].push_back(id);
    topic_tokens[sentence.topic] += len;
    total += len;
  }
  index.avg_len = total / static_cast<double>(index.sentences.size());
  for (const auto& [topic, ids] : index.by_topic) {
    index.topic_avg_len[topic] = topic_tokens[topic] / static_cast<double>(ids.size());
  }
  return index;
}

double bm25_idf(double n, double df) { return std::log(1.0 + (n - df + 0.5) / (df + 0.5)); }

RankedAnswer score_sentences(const SentenceIndex& index, std::string_view question, const std::string& topic, int k,
                             const Bm25Params& params) {
  if (k < 1) throw Error(errc::kInvalidArgument, "k must be at least 1");
  const auto topic_it = index.by_topic.find(topic);
  if (topic_it == index.by_topic.end()) throw Error(errc::kUnknownTopic, "unknown topic '" + topic + "'");

  const auto n = static_cast<double>(topic_it->second.size());
  const double avg_len = index.topic_avg_len.at(topic);
  const auto terms = tokenize(question);
  std::map<std::size_t, double> scores;
  for (const auto& term : std::set<std::string>(terms.begin(), terms.end())) {
    const auto it = index.postings.find(term);
    if (it == index.postings.end()) continue;
    std::vector<const SentenceIndex::Posting*> in_topic;
    for (const auto& p : it->second) {
      if (index.sentences[p.sentence].topic == topic) in_topic.push_back(&p);
    }
    if (in_topic.empty()) continue;
    const double idf = bm25_idf(n, static_cast<double>(in_topic.size()));
    for (const auto* p : in_topic) {
      const double tf = p->tf;
      const double norm = params.k1 * (1.0 - params.b + params.b * index.doc_lengths[p->sentence] / avg_len);
      scores[p->sentence] += idf * tf * (params.k1 + 1.0) / (tf + norm);
    }
  }

  std::vector<std::pair<std::size_t, double>> ranked(scores.begin(), scores.end());
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  if (ranked.size() > static_cast<std::size_t>(k)) ranked.resize(static_cast<std::size_t>(k));

  RankedAnswer answer;
  for (const auto& [id, score] : ranked) {
    answer.sentence_ids.push_back(id);
    answer.scores.push_back(score);
    if (!answer.text.empty()) answer.text.push_back(' ');
    answer.text += index.sentences[id].text;
  }
  return answer;
}

RetrievalMetrics evaluate_retriever(const SentenceIndex& index, std::span<const RetrievalQuery> queries, int k) {
  if (queries.empty()) throw Error(errc::kInvalidArgument, "cannot evaluate on an empty query set");
  std::map<std::string, std::size_t> entry_sizes;
  for (const auto& s : index.sentences) ++entry_sizes[s.entry_id];

  double tp = 0.0, fp = 0.0, fn = 0.0, hits = 0.0;
  for (const auto& q : queries) {
    RankedAnswer answer;
    if (index.has_topic(q.topic)) answer = score_sentences(index, q.question, q.topic, k);
    std::size_t relevant_retrieved = 0;
    for (const auto id : answer.sentence_ids) {
      if (index.sentences[id].entry_id == q.entry_id) ++relevant_retrieved;
    }
    const auto it = entry_sizes.find(q.entry_id);
    const std::size_t relevant = it == entry_sizes.end() ? 0 : it->second;
    tp += static_cast<double>(relevant_retrieved);
    fp += static_cast<double>(answer.sentence_ids.size() - relevant_retrieved);
    fn += static_cast<double>(relevant - relevant_retrieved);
    if (relevant_retrieved > 0) hits += 1.0;
  }
  RetrievalMetrics m;
  m.precision = tp + fp > 0 ? tp / (tp + fp) : 0.0;
  m.recall = tp + fn > 0 ? tp / (tp + fn) : 0.0;
  m.f1 = m.precision + m.recall > 0 ? 2 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
  m.accuracy = hits / static_cast<double>(queries.size());
  return m;
}

}  // namespace groundchat
