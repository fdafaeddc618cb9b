#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "groundchat/calibrate.hpp"
#include "groundchat/chatfallback.hpp"
#include "groundchat/ground.hpp"
#include "groundchat/retrieve.hpp"
#include "groundchat/textmodel.hpp"

namespace groundchat {

/// Labels of the binary mode router.
inline constexpr std::string_view kMedicalLabel = "medical";
inline constexpr std::string_view kSocialLabel = "social";

enum class Mode { Medical, Social };
enum class ResponseKind { Answer, ConfirmQuestion, Fallback };
enum class ModeUsed { MedicalQA, Social, Chat };
enum class DialogState { Idle, AwaitingConfirmation };
enum class Speaker { User, Agent };

std::string_view to_string(ResponseKind kind);
std::string_view to_string(ModeUsed mode);
std::string_view to_string(DialogState state);

/// Topic classifier, its fitted temperature and the sentence index it routes into.
struct TopicBranch {
  TextClassifier classifier;
  Temperature temperature{1.0};
  SentenceIndex index;
};

struct EngineConfig {
  double threshold = kDefaultConfidenceThreshold;
  int top_k = kDefaultTopK;
  double smoothing_k = 0.1;
  std::uint64_t reply_seed = 0;
};

/// Everything the dialog engine reads. Shared read-only between sessions.
struct EngineBundle {
  TextClassifier mode_classifier;
  TopicBranch medical;
  TopicBranch social;
  BodyLexicon lexicon;
  NgramModel lm;
  std::vector<std::string> replies;
  EngineConfig config;
};

struct Turn {
  Speaker speaker;
  std::string text;
  std::chrono::system_clock::time_point timestamp;
};

struct ConfirmationContext {
  std::vector<std::string> candidates;
  std::size_t cursor = 0;
  std::string origin_utterance;
  Mode mode = Mode::Medical;
};

struct Session {
  std::string id;
  DialogState state = DialogState::Idle;
  std::vector<Turn> history;
  std::optional<ConfirmationContext> pending;
};

struct AgentResponse {
  ResponseKind kind = ResponseKind::Fallback;
  std::string text;
  std::set<std::string> highlights;
  Side side_hint = Side::Front;
  ModeUsed mode_used = ModeUsed::Chat;
  std::optional<std::string> topic;

  bool operator==(const AgentResponse&) const = default;
};

/// Idle session with a fresh 128-bit random hex id.
Session new_session();

/// The per-utterance pipeline: mode routing, calibrated topic gating, the
/// confirmation loop, retrieval with grounding, and the
/// MedicalQA -> Social -> Chat fallback cascade.
class DialogEngine {
 public:
  explicit DialogEngine(std::shared_ptr<const EngineBundle> bundle);

  /// Throws empty_utterance for blank text and wrong_state while a topic
  /// confirmation is pending.
  AgentResponse handle_utterance(Session& session, std::string_view text) const;
  /// Throws wrong_state unless a confirmation is pending.
  AgentResponse handle_confirmation(Session& session, bool affirmed) const;
  /// Treats an avatar click as medical text evidence.
  AgentResponse handle_point(Session& session, const PointEvent& event) const;

  const EngineBundle& bundle() const noexcept { return *bundle_; }

  /// Confirmation prompt wording for a candidate topic.
  static std::string confirm_text(Mode mode, const std::string& topic);

 private:
  AgentResponse run(Session& session, const std::string& text, std::optional<Mode> forced) const;
  AgentResponse answer_in_topic(Mode mode, const std::string& text, const std::string& topic) const;
  AgentResponse take_over(Mode failed, const std::string& text) const;
  AgentResponse chat(const std::string& text) const;
  AgentResponse finish(Session& session, std::string user_text, AgentResponse response) const;

  std::shared_ptr<const EngineBundle> bundle_;
};

/// Optional append-only JSON-lines transcript. One line per handled turn,
/// holding the session id, timestamp and texts only.
class TranscriptLog {
 public:
  explicit TranscriptLog(const std::filesystem::path& path);
  void append(const std::string& session_id, const Turn& user, const AgentResponse& agent);

 private:
  std::mutex mutex_;
  std::ofstream out_;
};

/// Session store plus engine: per-session requests are serialised, distinct
/// sessions run concurrently.
class ConversationService {
 public:
  explicit ConversationService(std::shared_ptr<const EngineBundle> bundle, std::shared_ptr<TranscriptLog> log = nullptr);

  std::string create_session();
  AgentResponse message(const std::string& session_id, std::string_view text);
  AgentResponse confirm(const std::string& session_id, bool affirmed);
  AgentResponse point(const std::string& session_id, const PointEvent& event);

  /// Copy of a session; throws unknown_session.
  Session snapshot(const std::string& session_id) const;
  std::size_t session_count() const;
  const DialogEngine& engine() const noexcept { return engine_; }

 private:
  struct Slot {
    std::mutex mutex;
    Session session;
  };
  std::shared_ptr<Slot> slot(const std::string& session_id) const;
  template <typename F>
  AgentResponse with_session(const std::string& session_id, F&& step);

  DialogEngine engine_;
  std::shared_ptr<TranscriptLog> log_;
  mutable std::mutex sessions_mutex_;
  std::map<std::string, std::shared_ptr<Slot>> sessions_;
};

}  // namespace groundchat
