#pragma once

#include <memory>
#include <string>
#include <thread>

#include "groundchat/repl.hpp"
#include "groundchat/server.hpp"

// After Eigen: <resolv.h> defines a _res macro.
#include <httplib.h>

namespace support {

/// A live gateway over the fixture bundle on an ephemeral loopback port.
class TestServer {
 public:
  explicit TestServer(std::shared_ptr<groundchat::TranscriptLog> log = nullptr);
  ~TestServer();
  TestServer(const TestServer&) = delete;
  TestServer& operator=(const TestServer&) = delete;

  int port() const noexcept { return port_; }
  httplib::Client client() const { return httplib::Client("127.0.0.1", port_); }

 private:
  std::shared_ptr<groundchat::ConversationService> service_;
  groundchat::GatewayServer server_;
  int port_ = -1;
  std::thread thread_;
};

/// One session driven through the JSON API. API errors come back as
/// groundchat::Error with the API code and message.
class HttpBackend : public groundchat::ChatBackend {
 public:
  explicit HttpBackend(const TestServer& server);
  groundchat::AgentResponse message(std::string_view text) override;
  groundchat::AgentResponse confirm(bool affirmed) override;
  groundchat::AgentResponse point(const groundchat::PointEvent& event) override;

 private:
  groundchat::AgentResponse call(const std::string& action, const std::string& body);

  httplib::Client client_;
  std::string id_;
};

std::string replay_over_http(const TestServer& server, const std::string& script);

}  // namespace support
