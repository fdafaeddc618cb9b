#pragma once

#include <iosfwd>
#include <string>
#include <string_view>

#include "groundchat/dialog.hpp"

namespace groundchat {

/// One conversation as seen by the line-oriented chat front end. Failures are
/// reported as groundchat::Error whatever the transport.
class ChatBackend {
 public:
  virtual ~ChatBackend() = default;
  virtual AgentResponse message(std::string_view text) = 0;
  virtual AgentResponse confirm(bool affirmed) = 0;
  virtual AgentResponse point(const PointEvent& event) = 0;
};

/// A fresh session on an in-process service.
class ServiceBackend : public ChatBackend {
 public:
  explicit ServiceBackend(ConversationService& service);
  AgentResponse message(std::string_view text) override;
  AgentResponse confirm(bool affirmed) override;
  AgentResponse point(const PointEvent& event) override;
  const std::string& session_id() const noexcept { return session_id_; }

 private:
  ConversationService& service_;
  std::string session_id_;
};

/// "[kind | mode_used | topic] text", plus a highlights line when any.
std::string format_response(const AgentResponse& response);

/// Reads commands line by line and writes a transcript:
///   /point <region_id> [front|back]   avatar click
///   yes | no (also y, n, /yes, /no)   answer a pending topic confirmation
///   /quit                             stop
///   anything else                     an utterance
/// Each non-blank input line is echoed as "> line"; errors print as
/// "error: <code>: <message>" and leave the conversation unchanged.
void run_chat(ChatBackend& backend, std::istream& in, std::ostream& out);

}  // namespace groundchat
