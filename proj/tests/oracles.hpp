#pragma once

#include <random>
#include <string>
#include <utility>
#include <vector>

#include "groundchat/corpus.hpp"

namespace support {

/// Lowercased runs of ASCII alphanumerics and bytes >= 0x80.
std::vector<std::string> oracle_tokens(const std::string& text);

/// Exhaustive BM25 (k1 = 1.2, b = 0.75) over every sentence of `topic`, with
/// per-topic statistics. Returns (sentence id, score), best first, at most k.
std::vector<std::pair<std::size_t, double>> bm25_brute_force(const std::vector<groundchat::LabeledSentence>& bank,
                                                             const std::string& question, const std::string& topic,
                                                             int k);

/// Short sentences over a small vocabulary, topics t0..t{topics-1}.
std::vector<groundchat::LabeledSentence> random_bank(std::mt19937_64& rng, std::size_t size, int topics);
std::string random_query(std::mt19937_64& rng);

}  // namespace support
