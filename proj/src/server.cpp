#include "groundchat/server.hpp"

#include <httplib.h>

#include <json.hpp>

#include "groundchat/error.hpp"

namespace groundchat {

using nlohmann::json;

namespace {

struct ApiError {
  std::string code;
  std::string message;
  int http_status;
};

ApiError map_error(const Error& e) {
  const auto& c = e.code();
  if (c == errc::kEmptyUtterance) return {api_error::kEmptyUtterance, e.what(), 400};
  if (c == errc::kWrongState) return {api_error::kWrongState, e.what(), 409};
  if (c == errc::kUnknownSession) return {api_error::kUnknownSession, e.what(), 404};
  if (c == errc::kUnknownRegion) return {api_error::kUnknownRegion, e.what(), 400};
  if (c == errc::kInvalidArgument || c == errc::kParse) return {api_error::kBadRequest, e.what(), 400};
  return {api_error::kInternal, "internal error", 500};
}

void send_error(httplib::Response& res, const ApiError& err) {
  res.status = err.http_status;
  res.set_content(json{{"error", {{"code", err.code}, {"message", err.message}}}}.dump(), "application/json");
}

void send_json(httplib::Response& res, const std::string& body, int status = 200) {
  res.status = status;
  res.set_content(body, "application/json");
}

/// Parses a request body as a JSON object; an empty body is an empty object.
json body_object(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  json doc = json::parse(req.body, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) throw Error(errc::kParse, "request body must be a JSON object");
  return doc;
}

template <typename F>
void guarded(httplib::Response& res, F&& handler) {
  try {
    handler();
  } catch (const Error& e) {
    send_error(res, map_error(e));
  } catch (const json::exception&) {
    send_error(res, {api_error::kBadRequest, "malformed request", 400});
  } catch (const std::exception&) {
    send_error(res, {api_error::kInternal, "internal error", 500});
  }
}

}  // namespace

std::string response_json(const AgentResponse& r) {
  json doc = {
      {"kind", to_string(r.kind)},
      {"text", r.text},
      {"highlights", r.highlights},
      {"side_hint", to_string(r.side_hint)},
      {"mode_used", to_string(r.mode_used)},
  };
  if (r.topic) doc["topic"] = *r.topic;
  return doc.dump();
}

AgentResponse parse_response_json(const std::string& body) {
  const auto doc = json::parse(body);
  AgentResponse r;
  const auto kind = doc.at("kind").get<std::string>();
  if (kind == "answer") r.kind = ResponseKind::Answer;
  else if (kind == "confirm_question") r.kind = ResponseKind::ConfirmQuestion;
  else if (kind == "fallback") r.kind = ResponseKind::Fallback;
  else throw Error(errc::kParse, "unknown response kind '" + kind + "'");
  const auto mode = doc.at("mode_used").get<std::string>();
  if (mode == "medical_qa") r.mode_used = ModeUsed::MedicalQA;
  else if (mode == "social") r.mode_used = ModeUsed::Social;
  else if (mode == "chat") r.mode_used = ModeUsed::Chat;
  else throw Error(errc::kParse, "unknown mode '" + mode + "'");
  r.text = doc.at("text").get<std::string>();
  r.highlights = doc.at("highlights").get<std::set<std::string>>();
  r.side_hint = parse_side(doc.at("side_hint").get<std::string>());
  if (doc.contains("topic")) r.topic = doc.at("topic").get<std::string>();
  return r;
}

GatewayServer::GatewayServer(std::shared_ptr<ConversationService> service)
    : service_(std::move(service)), server_(std::make_unique<httplib::Server>()) {
  install_routes();
}

GatewayServer::~GatewayServer() { stop(); }

int GatewayServer::bind(const std::string& host, int port) {
  if (port == 0) return server_->bind_to_any_port(host);
  return server_->bind_to_port(host, port) ? port : -1;
}

bool GatewayServer::listen_after_bind() { return server_->listen_after_bind(); }

void GatewayServer::stop() {
  if (server_) server_->stop();
}

bool GatewayServer::is_running() const { return server_->is_running(); }

void GatewayServer::install_routes() {
  auto& s = *server_;
  auto service = service_;

  s.Get("/healthz", [](const httplib::Request&, httplib::Response& res) { send_json(res, R"({"status":"ok"})"); });

  s.Get("/avatar/regions", [service](const httplib::Request&, httplib::Response& res) {
    guarded(res, [&] {
      json regions = json::array();
      for (const auto& r : service->engine().bundle().lexicon.regions()) {
        regions.push_back({{"region_id", r.id}, {"phrase", r.phrase}, {"side", to_string(r.side)}});
      }
      send_json(res, json{{"regions", regions}}.dump());
    });
  });

  s.Post("/sessions", [service](const httplib::Request&, httplib::Response& res) {
    guarded(res, [&] { send_json(res, json{{"session_id", service->create_session()}}.dump(), 201); });
  });

  s.Post(R"(/sessions/([^/]+)/message)", [service](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const auto body = body_object(req);
      const auto text = body.contains("text") ? body.at("text").get<std::string>() : std::string();
      send_json(res, response_json(service->message(req.matches[1], text)));
    });
  });

  s.Post(R"(/sessions/([^/]+)/confirm)", [service](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const auto body = body_object(req);
      if (!body.contains("affirmed") || !body.at("affirmed").is_boolean()) {
        throw Error(errc::kInvalidArgument, "field 'affirmed' must be a boolean");
      }
      send_json(res, response_json(service->confirm(req.matches[1], body.at("affirmed").get<bool>())));
    });
  });

  s.Post(R"(/sessions/([^/]+)/point)", [service](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const auto body = body_object(req);
      PointEvent event;
      event.region_id = body.at("region_id").get<std::string>();
      event.side = body.contains("side") ? parse_side(body.at("side").get<std::string>()) : Side::Front;
      send_json(res, response_json(service->point(req.matches[1], event)));
    });
  });

  s.set_error_handler([](const httplib::Request&, httplib::Response& res) {
    if (res.body.empty()) {
      const bool not_found = res.status == 404;
      send_error(res, {not_found ? api_error::kNotFound : api_error::kBadRequest,
                       not_found ? "no such endpoint" : "bad request", res.status});
    }
  });
}

}  // namespace groundchat
