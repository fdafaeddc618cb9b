#pragma once

#include <memory>
#include <string>

#include "groundchat/dialog.hpp"

namespace httplib {
class Server;
}

namespace groundchat {

/// {kind, text, highlights[], side_hint, mode_used, topic?}
std::string response_json(const AgentResponse& response);
AgentResponse parse_response_json(const std::string& body);

/// API error codes. The set is closed; anything unexpected maps to internal_error.
namespace api_error {
inline constexpr const char* kBadRequest = "bad_request";
inline constexpr const char* kEmptyUtterance = "empty_utterance";
inline constexpr const char* kWrongState = "wrong_state";
inline constexpr const char* kUnknownSession = "unknown_session";
inline constexpr const char* kUnknownRegion = "unknown_region";
inline constexpr const char* kNotFound = "not_found";
inline constexpr const char* kInternal = "internal_error";
}  // namespace api_error

/// JSON-over-HTTP binding of a ConversationService.
///
///   POST /sessions                   -> 201 {session_id}
///   POST /sessions/{id}/message      {text}              -> AgentResponse
///   POST /sessions/{id}/confirm      {affirmed}          -> AgentResponse
///   POST /sessions/{id}/point        {region_id, side}   -> AgentResponse
///   GET  /avatar/regions             -> {regions: [{region_id, phrase, side}]}
///   GET  /healthz                    -> {status: "ok"}
///
/// Errors are {"error": {code, message}}. No client address is read or logged.
class GatewayServer {
 public:
  explicit GatewayServer(std::shared_ptr<ConversationService> service);
  ~GatewayServer();
  GatewayServer(const GatewayServer&) = delete;
  GatewayServer& operator=(const GatewayServer&) = delete;

  /// Binds; port 0 picks a free port. Returns the bound port, or -1.
  int bind(const std::string& host, int port);
  /// Blocks until stop() is called.
  bool listen_after_bind();
  void stop();
  bool is_running() const;

 private:
  void install_routes();

  std::shared_ptr<ConversationService> service_;
  std::unique_ptr<httplib::Server> server_;
};

}  // namespace groundchat
