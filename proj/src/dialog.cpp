#include "groundchat/dialog.hpp"

#include <iomanip>
#include <random>
#include <sstream>

#include <json.hpp>

#include "groundchat/error.hpp"
#include "groundchat/tokenize.hpp"

namespace groundchat {

namespace {

ModeUsed mode_used_for(Mode mode) { return mode == Mode::Medical ? ModeUsed::MedicalQA : ModeUsed::Social; }

std::string iso_timestamp(std::chrono::system_clock::time_point tp) {
  const auto secs = std::chrono::time_point_cast<std::chrono::seconds>(tp);
  const auto millis = std::chrono::duration_cast<std::chrono::milliseconds>(tp - secs).count();
  const std::time_t t = std::chrono::system_clock::to_time_t(secs);
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream out;
  out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%S") << '.' << std::setw(3) << std::setfill('0') << millis << 'Z';
  return out.str();
}

}  // namespace

std::string_view to_string(ResponseKind kind) {
  switch (kind) {
    case ResponseKind::Answer: return "answer";
    case ResponseKind::ConfirmQuestion: return "confirm_question";
    case ResponseKind::Fallback: return "fallback";
  }
  return "fallback";
}

std::string_view to_string(ModeUsed mode) {
  switch (mode) {
    case ModeUsed::MedicalQA: return "medical_qa";
    case ModeUsed::Social: return "social";
    case ModeUsed::Chat: return "chat";
  }
  return "chat";
}

std::string_view to_string(DialogState state) {
  return state == DialogState::Idle ? "idle" : "awaiting_confirmation";
}

Session new_session() {
  std::random_device device;
  std::ostringstream id;
  for (int i = 0; i < 4; ++i) id << std::hex << std::setw(8) << std::setfill('0') << static_cast<std::uint32_t>(device());
  Session s;
  s.id = id.str();
  return s;
}

DialogEngine::DialogEngine(std::shared_ptr<const EngineBundle> bundle) : bundle_(std::move(bundle)) {
  if (!bundle_) throw Error(errc::kInvalidArgument, "dialog engine needs a bundle");
  if (bundle_->replies.empty()) throw Error(errc::kInvalidArgument, "dialog engine needs a reply pool");
}

std::string DialogEngine::confirm_text(Mode mode, const std::string& topic) {
  if (mode == Mode::Medical) return "Is your question about " + topic + "?";
  return "Would you like to talk about " + topic + "?";
}

AgentResponse DialogEngine::handle_utterance(Session& session, std::string_view text) const {
  if (session.state == DialogState::AwaitingConfirmation) {
    throw Error(errc::kWrongState, "a topic confirmation is pending; answer it first");
  }
  auto utterance = trim(text);
  if (utterance.empty()) throw Error(errc::kEmptyUtterance, "utterance is empty");
  auto response = run(session, utterance, std::nullopt);
  return finish(session, std::move(utterance), std::move(response));
}

AgentResponse DialogEngine::handle_point(Session& session, const PointEvent& event) const {
  if (session.state == DialogState::AwaitingConfirmation) {
    throw Error(errc::kWrongState, "a topic confirmation is pending; answer it first");
  }
  auto utterance = "I am not feeling well \xE2\x80\x94 it is " + phrase_for_point(bundle_->lexicon, event);
  auto response = run(session, utterance, Mode::Medical);
  return finish(session, std::move(utterance), std::move(response));
}

AgentResponse DialogEngine::handle_confirmation(Session& session, bool affirmed) const {
  if (session.state != DialogState::AwaitingConfirmation || !session.pending) {
    throw Error(errc::kWrongState, "no topic confirmation is pending");
  }
  auto context = *session.pending;
  session.pending.reset();
  AgentResponse response;
  if (affirmed) {
    response = answer_in_topic(context.mode, context.origin_utterance, context.candidates[context.cursor]);
  } else if (context.cursor + 1 >= std::min(context.candidates.size(), kMaxConfirmations)) {
    response = take_over(context.mode, context.origin_utterance);
  } else {
    ++context.cursor;
    const auto& topic = context.candidates[context.cursor];
    response.kind = ResponseKind::ConfirmQuestion;
    response.text = confirm_text(context.mode, topic);
    response.mode_used = mode_used_for(context.mode);
    response.topic = topic;
    session.pending = std::move(context);
  }
  return finish(session, affirmed ? "yes" : "no", std::move(response));
}

AgentResponse DialogEngine::run(Session& session, const std::string& text, std::optional<Mode> forced) const {
  const auto& b = *bundle_;
  Mode mode = Mode::Medical;
  if (forced) {
    mode = *forced;
  } else {
    const auto z = b.mode_classifier.logits(text);
    mode = z.labels[static_cast<std::size_t>(argmax(z.values))] == kMedicalLabel ? Mode::Medical : Mode::Social;
  }
  const auto& branch = mode == Mode::Medical ? b.medical : b.social;
  // No known token: there is no topic evidence to confirm.
  if (encode(branch.classifier.featurizer, text).nonZeros() == 0) return take_over(mode, text);
  const auto prediction = softmax_with_temperature(branch.classifier.logits(text), branch.temperature);
  const auto decision = gate(prediction, b.config.threshold);
  if (decision.kind == GateDecision::Kind::Direct) return answer_in_topic(mode, text, decision.topic());

  session.pending = ConfirmationContext{decision.candidates, 0, text, mode};
  AgentResponse response;
  response.kind = ResponseKind::ConfirmQuestion;
  response.text = confirm_text(mode, decision.candidates.front());
  response.mode_used = mode_used_for(mode);
  response.topic = decision.candidates.front();
  return response;
}

AgentResponse DialogEngine::answer_in_topic(Mode mode, const std::string& text, const std::string& topic) const {
  const auto& b = *bundle_;
  const auto& index = mode == Mode::Medical ? b.medical.index : b.social.index;
  RankedAnswer ranked;
  if (index.has_topic(topic)) ranked = score_sentences(index, text, topic, b.config.top_k);
  if (ranked.empty()) return take_over(mode, text);

  AgentResponse response;
  response.kind = ResponseKind::Answer;
  response.mode_used = mode_used_for(mode);
  response.topic = topic;
  if (mode == Mode::Medical) {
    auto grounded = ground_answer(b.lexicon, std::move(ranked.text));
    response.text = std::move(grounded.text);
    response.highlights = std::move(grounded.highlights);
    response.side_hint = grounded.side_hint;
  } else {
    response.text = std::move(ranked.text);
  }
  return response;
}

AgentResponse DialogEngine::take_over(Mode failed, const std::string& text) const {
  const auto& b = *bundle_;
  if (failed == Mode::Medical) {
    const auto z = b.social.classifier.logits(text);
    const auto& topic = z.labels[static_cast<std::size_t>(argmax(z.values))];
    RankedAnswer ranked;
    if (b.social.index.has_topic(topic)) ranked = score_sentences(b.social.index, text, topic, b.config.top_k);
    if (!ranked.empty()) {
      AgentResponse response;
      response.kind = ResponseKind::Fallback;
      response.mode_used = ModeUsed::Social;
      response.topic = topic;
      response.text = std::move(ranked.text);
      return response;
    }
  }
  return chat(text);
}

AgentResponse DialogEngine::chat(const std::string& text) const {
  AgentResponse response;
  response.kind = ResponseKind::Fallback;
  response.mode_used = ModeUsed::Chat;
  response.text = generic_reply(text, bundle_->config.reply_seed, bundle_->replies);
  return response;
}

AgentResponse DialogEngine::finish(Session& session, std::string user_text, AgentResponse response) const {
  const auto now = std::chrono::system_clock::now();
  session.history.push_back({Speaker::User, std::move(user_text), now});
  session.history.push_back({Speaker::Agent, response.text, now});
  if (response.kind == ResponseKind::ConfirmQuestion) {
    session.state = DialogState::AwaitingConfirmation;
  } else {
    session.state = DialogState::Idle;
    session.pending.reset();
  }
  return response;
}

TranscriptLog::TranscriptLog(const std::filesystem::path& path) : out_(path, std::ios::app) {
  if (!out_) throw Error(errc::kIo, "cannot open transcript log " + path.string());
}

void TranscriptLog::append(const std::string& session_id, const Turn& user, const AgentResponse& agent) {
  nlohmann::json line = {
      {"session_id", session_id},
      {"timestamp", iso_timestamp(user.timestamp)},
      {"user", user.text},
      {"agent", agent.text},
      {"kind", to_string(agent.kind)},
      {"mode_used", to_string(agent.mode_used)},
  };
  std::lock_guard lock(mutex_);
  out_ << line.dump() << '\n';
  out_.flush();
}

ConversationService::ConversationService(std::shared_ptr<const EngineBundle> bundle, std::shared_ptr<TranscriptLog> log)
    : engine_(std::move(bundle)), log_(std::move(log)) {}

std::string ConversationService::create_session() {
  auto slot = std::make_shared<Slot>();
  slot->session = new_session();
  auto id = slot->session.id;
  std::lock_guard lock(sessions_mutex_);
  sessions_.emplace(id, std::move(slot));
  return id;
}

std::shared_ptr<ConversationService::Slot> ConversationService::slot(const std::string& session_id) const {
  std::lock_guard lock(sessions_mutex_);
  const auto it = sessions_.find(session_id);
  if (it == sessions_.end()) throw Error(errc::kUnknownSession, "unknown session");
  return it->second;
}

template <typename F>
AgentResponse ConversationService::with_session(const std::string& session_id, F&& step) {
  const auto s = slot(session_id);
  std::lock_guard lock(s->mutex);
  auto response = step(s->session);
  if (log_) log_->append(session_id, s->session.history[s->session.history.size() - 2], response);
  return response;
}

AgentResponse ConversationService::message(const std::string& session_id, std::string_view text) {
  return with_session(session_id, [&](Session& s) { return engine_.handle_utterance(s, text); });
}

AgentResponse ConversationService::confirm(const std::string& session_id, bool affirmed) {
  return with_session(session_id, [&](Session& s) { return engine_.handle_confirmation(s, affirmed); });
}

AgentResponse ConversationService::point(const std::string& session_id, const PointEvent& event) {
  return with_session(session_id, [&](Session& s) { return engine_.handle_point(s, event); });
}

Session ConversationService::snapshot(const std::string& session_id) const {
  const auto s = slot(session_id);
  std::lock_guard lock(s->mutex);
  return s->session;
}

std::size_t ConversationService::session_count() const {
  std::lock_guard lock(sessions_mutex_);
  return sessions_.size();
}

}  // namespace groundchat
