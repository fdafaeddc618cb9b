#include <doctest.h>

#include <json.hpp>
#include <random>
#include <set>

#include "groundchat/dialog.hpp"
#include "groundchat/repl.hpp"
#include "support.hpp"

using namespace groundchat;
using support::error_code;

namespace {

DialogEngine engine() { return DialogEngine(support::fixture_bundle()); }

bool in_pool(const std::string& text) {
  const auto& pool = support::fixture_bundle()->replies;
  return std::find(pool.begin(), pool.end(), text) != pool.end();
}

void check_state_matches(const Session& s, const AgentResponse& r) {
  if (r.kind == ResponseKind::ConfirmQuestion) {
    CHECK(s.state == DialogState::AwaitingConfirmation);
    REQUIRE(s.pending.has_value());
    CHECK(s.pending->cursor < s.pending->candidates.size());
    CHECK(s.pending->candidates.size() <= kMaxConfirmations);
  } else {
    CHECK(s.state == DialogState::Idle);
    CHECK_FALSE(s.pending.has_value());
  }
  if (!r.highlights.empty()) {
    CHECK(r.kind == ResponseKind::Answer);
    CHECK(r.mode_used == ModeUsed::MedicalQA);
  }
}

}  // namespace

TEST_SUITE("dialog") {
  TEST_CASE("golden transcripts replay in process") {
    const auto cases = support::golden_cases();
    REQUIRE(cases.size() >= 4);
    for (const auto& c : cases) CHECK_MESSAGE(support::replay_in_process(c.input) == c.expected, c.name);
  }

  TEST_CASE("a cirrhosis question is answered directly with the liver highlighted") {
    const auto e = engine();
    auto s = new_session();
    const auto r = e.handle_utterance(s, "What is cirrhosis?");
    CHECK(r.kind == ResponseKind::Answer);
    CHECK(r.mode_used == ModeUsed::MedicalQA);
    CHECK(r.topic == std::optional<std::string>("Cirrhosis"));
    CHECK(r.highlights.count("liver") == 1);
    CHECK(s.history.size() == 2);
  }

  TEST_CASE("photography talk routes to the social bot") {
    const auto e = engine();
    auto s = new_session();
    const auto r = e.handle_utterance(s, "Tell me about photography gear");
    CHECK(r.mode_used == ModeUsed::Social);
    CHECK((r.kind == ResponseKind::Answer || r.kind == ResponseKind::ConfirmQuestion));
    if (r.kind == ResponseKind::Answer) CHECK(r.topic == std::optional<std::string>("AskPhotography"));
  }

  TEST_CASE("gibberish falls through to a chat reply") {
    const auto e = engine();
    auto s = new_session();
    const auto r = e.handle_utterance(s, "zzqx vvbn");
    CHECK(r.kind == ResponseKind::Fallback);
    CHECK(r.mode_used == ModeUsed::Chat);
    CHECK(in_pool(r.text));
    CHECK(r.highlights.empty());
  }

  TEST_CASE("no then yes answers in the second candidate") {
    const auto e = engine();
    auto s = new_session();
    const auto first = e.handle_utterance(s, "What happens during treatment?");
    REQUIRE(first.kind == ResponseKind::ConfirmQuestion);
    const auto candidates = s.pending->candidates;
    REQUIRE(candidates.size() >= 2);
    const auto second = e.handle_confirmation(s, false);
    CHECK(second.kind == ResponseKind::ConfirmQuestion);
    CHECK(second.topic == std::optional<std::string>(candidates[1]));
    CHECK(s.pending->cursor == 1);
    const auto answer = e.handle_confirmation(s, true);
    CHECK(answer.kind != ResponseKind::ConfirmQuestion);
    if (answer.kind == ResponseKind::Answer) CHECK(answer.topic == std::optional<std::string>(candidates[1]));
    CHECK(s.state == DialogState::Idle);
    CHECK(s.history.size() == 6);
  }

  TEST_CASE("four refusals end the confirmation loop") {
    const auto e = engine();
    auto s = new_session();
    auto r = e.handle_utterance(s, "What happens during treatment?");
    REQUIRE(r.kind == ResponseKind::ConfirmQuestion);
    REQUIRE(s.pending->candidates.size() == kMaxConfirmations);
    for (int i = 0; i < 3; ++i) CHECK(e.handle_confirmation(s, false).kind == ResponseKind::ConfirmQuestion);
    r = e.handle_confirmation(s, false);
    CHECK(r.kind == ResponseKind::Fallback);
    CHECK(s.state == DialogState::Idle);
  }

  TEST_CASE("state errors") {
    const auto e = engine();
    auto s = new_session();
    CHECK(error_code([&] { e.handle_utterance(s, "   "); }) == errc::kEmptyUtterance);
    CHECK(error_code([&] { e.handle_confirmation(s, true); }) == errc::kWrongState);
    CHECK(s.history.empty());
    REQUIRE(e.handle_utterance(s, "What happens during treatment?").kind == ResponseKind::ConfirmQuestion);
    CHECK(error_code([&] { e.handle_utterance(s, "hello"); }) == errc::kWrongState);
    CHECK(error_code([&] { e.handle_point(s, {"liver", Side::Front}); }) == errc::kWrongState);
    CHECK(s.history.size() == 2);
    auto idle = new_session();
    CHECK(error_code([&] { e.handle_point(idle, {"spleen", Side::Front}); }) == errc::kUnknownRegion);
  }

  TEST_CASE("a click is routed as medical evidence") {
    const auto e = engine();
    auto s = new_session();
    const auto r = e.handle_point(s, {"liver", Side::Front});
    CHECK(r.mode_used == ModeUsed::MedicalQA);
    CHECK(s.history.front().text.find("my liver") != std::string::npos);
  }

  TEST_CASE("fresh sessions are idle with distinct opaque ids") {
    std::set<std::string> ids;
    for (int i = 0; i < 1000; ++i) {
      const auto s = new_session();
      CHECK(s.state == DialogState::Idle);
      CHECK_FALSE(s.pending.has_value());
      CHECK(s.history.empty());
      CHECK(s.id.size() == 32);
      CHECK(s.id.find_first_not_of("0123456789abcdef") == std::string::npos);
      ids.insert(s.id);
    }
    CHECK(ids.size() == 1000);
  }

  TEST_CASE("state machine invariants over random input sequences") {
    const auto e = engine();
    const auto& bundle = *support::fixture_bundle();
    std::vector<std::string> utterances = {"", "  ", "zzqx vvbn", "What happens during treatment?",
                                           "Would medicines help?", "hello there", "What is cirrhosis?"};
    for (const auto& q : support::fixtures().medical.entries()) utterances.push_back(q.question);
    for (const auto& q : support::fixtures().social.entries()) utterances.push_back(q.question);
    std::vector<PointEvent> clicks = {{"spleen", Side::Front}};
    for (const auto& r : bundle.lexicon.regions()) {
      clicks.push_back({r.id, Side::Front});
      clicks.push_back({r.id, Side::Back});
    }

    std::mt19937_64 rng(10000);
    std::size_t handled = 0;
    for (int seq = 0; seq < 10000; ++seq) {
      auto s = new_session();
      int confirms_in_a_row = 0;
      const auto steps = 1 + rng() % 8;
      for (std::size_t step = 0; step < steps; ++step) {
        const auto before = s.history.size();
        const auto state_before = s.state;
        std::optional<AgentResponse> r;
        std::string code;
        try {
          switch (rng() % 4) {
            case 0:
            case 1: r = e.handle_utterance(s, utterances[rng() % utterances.size()]); break;
            case 2: r = e.handle_confirmation(s, rng() % 2 == 0); break;
            default: r = e.handle_point(s, clicks[rng() % clicks.size()]); break;
          }
        } catch (const Error& err) {
          code = err.code();
        }
        if (!r) {
          // Rejected input leaves the session untouched.
          REQUIRE(!code.empty());
          CHECK(s.history.size() == before);
          CHECK(s.state == state_before);
          continue;
        }
        ++handled;
        CHECK(s.history.size() == before + 2);
        CHECK(s.history[before].speaker == Speaker::User);
        CHECK(s.history[before + 1].speaker == Speaker::Agent);
        CHECK_FALSE(r->text.empty());
        check_state_matches(s, *r);
        confirms_in_a_row = r->kind == ResponseKind::ConfirmQuestion ? confirms_in_a_row + 1 : 0;
        CHECK(confirms_in_a_row <= static_cast<int>(kMaxConfirmations));
      }
    }
    CHECK(handled > 10000);
  }

  TEST_CASE("concurrent service sessions stay isolated") {
    ConversationService service(support::fixture_bundle());
    const auto a = service.create_session();
    const auto b = service.create_session();
    CHECK(a != b);
    service.message(a, "What happens during treatment?");
    CHECK(service.snapshot(a).state == DialogState::AwaitingConfirmation);
    CHECK(service.snapshot(b).state == DialogState::Idle);
    CHECK(error_code([&] { service.message("nope", "hi"); }) == errc::kUnknownSession);
    CHECK(service.session_count() == 2);
  }

  TEST_CASE("transcript log holds ids, timestamps and texts only") {
    const auto dir = support::scratch_dir("transcript");
    const auto path = dir / "log.jsonl";
    {
      auto log = std::make_shared<TranscriptLog>(path);
      ConversationService service(support::fixture_bundle(), log);
      ServiceBackend backend(service);
      backend.message("What is cirrhosis?");
      backend.message("zzqx vvbn");
    }
    std::istringstream in(support::read_file(path));
    std::string line;
    int lines = 0;
    const std::set<std::string> allowed = {"session_id", "timestamp", "user", "agent", "kind", "mode_used"};
    while (std::getline(in, line)) {
      const auto doc = nlohmann::json::parse(line);
      for (const auto& [key, value] : doc.items()) CHECK_MESSAGE(allowed.count(key) == 1, key);
      CHECK(line.find("127.0.0.1") == std::string::npos);
      ++lines;
    }
    CHECK(lines == 2);
  }
}
