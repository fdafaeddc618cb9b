#include "groundchat/repl.hpp"

#include <istream>
#include <ostream>
#include <sstream>

#include "groundchat/error.hpp"
#include "groundchat/tokenize.hpp"

namespace groundchat {

ServiceBackend::ServiceBackend(ConversationService& service)
    : service_(service), session_id_(service.create_session()) {}

AgentResponse ServiceBackend::message(std::string_view text) { return service_.message(session_id_, text); }

AgentResponse ServiceBackend::confirm(bool affirmed) { return service_.confirm(session_id_, affirmed); }

AgentResponse ServiceBackend::point(const PointEvent& event) { return service_.point(session_id_, event); }

std::string format_response(const AgentResponse& r) {
  std::ostringstream out;
  out << "[" << to_string(r.kind) << " | " << to_string(r.mode_used);
  if (r.topic) out << " | " << *r.topic;
  out << "] " << r.text << '\n';
  if (!r.highlights.empty()) {
    out << "  highlights (" << to_string(r.side_hint) << "):";
    for (const auto& h : r.highlights) out << ' ' << h;
    out << '\n';
  }
  return out.str();
}

namespace {

bool is_yes(const std::string& t) { return t == "yes" || t == "y" || t == "/yes"; }
bool is_no(const std::string& t) { return t == "no" || t == "n" || t == "/no"; }

PointEvent parse_point(const std::string& args) {
  std::istringstream in(args);
  PointEvent event;
  std::string side;
  in >> event.region_id >> side;
  if (event.region_id.empty()) throw Error(errc::kInvalidArgument, "usage: /point <region_id> [front|back]");
  if (!side.empty()) event.side = parse_side(side);
  return event;
}

}  // namespace

void run_chat(ChatBackend& backend, std::istream& in, std::ostream& out) {
  bool awaiting = false;
  std::string line;
  while (std::getline(in, line)) {
    const auto text = trim(line);
    if (text.empty()) continue;
    out << "> " << text << '\n';
    if (text == "/quit") break;
    try {
      AgentResponse r;
      if (text == "/point" || text.rfind("/point ", 0) == 0) {
        r = backend.point(parse_point(text.substr(6)));
      } else if (awaiting && is_yes(text)) {
        r = backend.confirm(true);
      } else if (awaiting && is_no(text)) {
        r = backend.confirm(false);
      } else {
        r = backend.message(text);
      }
      awaiting = r.kind == ResponseKind::ConfirmQuestion;
      out << format_response(r);
    } catch (const Error& e) {
      out << "error: " << e.code() << ": " << e.what() << '\n';
    }
    out.flush();
  }
}

}  // namespace groundchat
