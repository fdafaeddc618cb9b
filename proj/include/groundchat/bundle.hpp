#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "groundchat/calibrate.hpp"
#include "groundchat/chatfallback.hpp"
#include "groundchat/corpus.hpp"
#include "groundchat/dialog.hpp"
#include "groundchat/textmodel.hpp"

namespace groundchat {

inline constexpr int kSchemaVersion = 1;

/// Source corpora for a bundle. `news` supplies non-medical negatives for the
/// mode router; `dialogue` is the in-domain text for the chat language model.
struct Fixtures {
  Corpus medical;
  Corpus social;
  Corpus news;
  std::vector<std::string> dialogue;
};

struct BuildOptions {
  SplitSpec split;
  TrainConfig train;
  int min_df = 1;
  int lm_order = 3;
  int lm_min_count = 2;
  EngineConfig config;
};

struct CorpusSplits {
  CorpusSplit medical;
  CorpusSplit social;
  CorpusSplit news;
};

CorpusSplits split_fixtures(const Fixtures& fixtures, const SplitSpec& spec);

/// Each entry contributes its question and every answer sentence, labelled
/// with the entry topic.
std::vector<LabeledText> topic_examples(const Corpus& corpus);

/// Same texts relabelled "medical" / "social" for the mode router.
std::vector<LabeledText> mode_examples(const Corpus& medical, const std::vector<const Corpus*>& non_medical);

/// Held-out medical and news entries, one document (question + answer) each.
/// This is what the router's reported test accuracy is measured on.
std::vector<LabeledText> mode_test_documents(const Corpus& medical, const Corpus& news);

struct ClassifierSummary {
  double initial_loss = 0.0;
  double final_loss = 0.0;
  double train_accuracy = 0.0;
  double test_accuracy = 0.0;
  std::size_t train_examples = 0;
  std::size_t test_examples = 0;
};

struct CalibrationReport {
  double temperature = 1.0;
  double nll_before = 0.0;
  double nll_after = 0.0;
  double accuracy = 0.0;
};

/// Trained on medical vs (news + social) train splits; tested on the
/// medical and news test splits.
TextClassifier train_mode_classifier(const CorpusSplits& splits, const BuildOptions& options,
                                     ClassifierSummary* summary = nullptr);
TextClassifier train_topic_classifier(const CorpusSplit& split, const BuildOptions& options,
                                      ClassifierSummary* summary = nullptr);

/// Fits the temperature on the validation corpus.
CalibrationReport calibrate_classifier(const TextClassifier& classifier, const Corpus& valid);

NgramModel train_chat_lm(const std::vector<std::string>& dialogue, const BuildOptions& options);

struct BuildReport {
  ClassifierSummary mode;
  ClassifierSummary medical;
  ClassifierSummary social;
  CalibrationReport medical_calibration;
  CalibrationReport social_calibration;
};

/// Trains, calibrates and indexes everything in memory.
EngineBundle build_bundle(const Fixtures& fixtures, const BodyLexicon& lexicon, std::vector<std::string> replies,
                          const BuildOptions& options, BuildReport* report = nullptr);

/// Loads corpora and a plain-text dialogue file (one utterance per line).
Fixtures load_fixtures(const std::filesystem::path& medical, const std::filesystem::path& social,
                       const std::filesystem::path& news, const std::filesystem::path& dialogue);
std::vector<std::string> load_lines(const std::filesystem::path& path);

// Persistence. Every document carries "schema_version"; loading a different
// version throws schema_mismatch.
void save_text_classifier(const std::filesystem::path& path, const TextClassifier& classifier);
TextClassifier load_text_classifier(const std::filesystem::path& path);
std::string text_classifier_json(const TextClassifier& classifier);

void save_index(const std::filesystem::path& path, const SentenceIndex& index);
SentenceIndex load_index(const std::filesystem::path& path);

void save_ngram(const std::filesystem::path& path, const NgramModel& model);
NgramModel load_ngram(const std::filesystem::path& path);

void save_calibration(const std::filesystem::path& path, const CalibrationReport& report);
CalibrationReport load_calibration(const std::filesystem::path& path);
std::string calibration_json(const CalibrationReport& report);

std::string metrics_json(const RetrievalMetrics& metrics);
std::string lm_eval_json(const LmEval& eval);
std::string build_report_json(const BuildReport& report);

/// Optional overrides: threshold, top_k, smoothing_k, reply_seed.
EngineConfig load_engine_config(const std::filesystem::path& path, EngineConfig base = {});

/// File names inside a bundle directory.
namespace bundle_files {
inline constexpr const char* kManifest = "manifest.json";
inline constexpr const char* kModeClassifier = "mode_classifier.json";
inline constexpr const char* kMedicalTopic = "medical_topic.json";
inline constexpr const char* kSocialTopic = "social_topic.json";
inline constexpr const char* kMedicalCalibration = "calibration_medical.json";
inline constexpr const char* kSocialCalibration = "calibration_social.json";
inline constexpr const char* kMedicalIndex = "medical_index.json";
inline constexpr const char* kSocialIndex = "social_index.json";
inline constexpr const char* kLanguageModel = "lm.json";
inline constexpr const char* kLexicon = "lexicon.json";
inline constexpr const char* kReplies = "replies.json";
inline constexpr const char* kConfig = "config.json";
inline constexpr const char* kTrainReport = "train_report.json";
}  // namespace bundle_files

/// Writes every bundle file, the manifest and the training report into `dir`.
void save_bundle(const std::filesystem::path& dir, const EngineBundle& bundle, const BuildOptions& options,
                 const BuildReport& report);
/// Reads a complete bundle; config.json, when present, overrides defaults.
EngineBundle load_bundle(const std::filesystem::path& dir);

/// Split seed recorded in the manifest.
std::uint64_t manifest_seed(const std::filesystem::path& dir);
void write_manifest(const std::filesystem::path& dir, const BuildOptions& options);

}  // namespace groundchat
