#include <doctest.h>

#include <algorithm>
#include <random>

#include "groundchat/ground.hpp"
#include "support.hpp"

using namespace groundchat;
using support::error_code;

namespace {

const std::vector<std::string> kFrontTable = {
    "ankle",       "arm",      "breast",   "cheeks",   "chin",      "collar bone",    "ear lobe", "ear",
    "elbow",       "eyebrows", "eyelashes", "eyelids", "eyes",      "finger",         "foot",     "forehead",
    "groin",       "hair",     "hand",     "heart",    "hip",       "intestines",     "jaw",      "knee",
    "lips",        "liver",    "lungs",    "mouth",    "neck",      "nipple",         "nose",     "nostril",
    "pancreas",    "pelvis",   "rectum",   "ribs",     "shin",      "shoulder blade", "shoulder", "spinal cord",
    "spine",       "stomach",  "teeth",    "thigh",    "throat",    "thumb",          "toes",     "tongue",
    "waist",       "wrist"};

const std::vector<std::string> kBackTable = {
    "ankle",  "anus",     "arm",    "back",   "brain",  "buttocks", "calf",           "ear lobe", "ear",
    "elbow",  "finger",   "foot",   "heart",  "intestines", "kidney", "knee",         "liver",    "lungs",
    "neck",   "palm",     "pancreas", "pelvis", "rectum", "ribs",     "scalp",        "shoulder blade",
    "shoulder", "spinal cord", "spine", "stomach", "thigh", "thumb", "wrist"};

const BodyRegion& region_for_phrase(const BodyLexicon& lex, const std::string& phrase) {
  const auto it = std::find_if(lex.regions().begin(), lex.regions().end(),
                               [&](const BodyRegion& r) { return r.phrase == phrase; });
  REQUIRE(it != lex.regions().end());
  return *it;
}

}  // namespace

TEST_SUITE("ground") {
  TEST_CASE("front and back tables are fully represented") {
    const auto lex = builtin_lexicon();
    CHECK(kFrontTable.size() == 50);
    CHECK(kBackTable.size() == 33);
    for (const auto& p : kFrontTable) CHECK_MESSAGE(region_for_phrase(lex, p).visible_from_front(), p);
    for (const auto& p : kBackTable) CHECK_MESSAGE(region_for_phrase(lex, p).visible_from_back(), p);

    std::size_t back_visible = 0, front_visible = 0;
    for (const auto& r : lex.regions()) {
      back_visible += r.visible_from_back();
      front_visible += r.visible_from_front();
      const bool in_front = std::count(kFrontTable.begin(), kFrontTable.end(), r.phrase) > 0;
      const bool in_back = std::count(kBackTable.begin(), kBackTable.end(), r.phrase) > 0;
      CHECK(r.side == (in_front && in_back ? Side::Both : in_front ? Side::Front : Side::Back));
    }
    CHECK(back_visible == 33);
    CHECK(front_visible == 50);
    CHECK(lex.regions().size() == 58);
  }

  TEST_CASE("liver is in both views, buttocks only on the back") {
    const auto lex = builtin_lexicon();
    CHECK(lex.find("liver")->side == Side::Both);
    CHECK(lex.find("buttocks")->side == Side::Back);
    CHECK(lex.find("spleen") == nullptr);
  }

  TEST_CASE("extraction examples") {
    const auto lex = builtin_lexicon();
    CHECK(extract_body_parts(lex, "Cirrhosis scars the liver.") == std::set<std::string>{"liver"});
    CHECK(extract_body_parts(lex, "Pain near the shoulder blade") == std::set<std::string>{"shoulder_blade"});
    CHECK(extract_body_parts(lex, "It can affect the large intestine.") == std::set<std::string>{"intestines"});
    CHECK(extract_body_parts(lex, "My TUMMY and Feet hurt") == std::set<std::string>{"stomach", "foot"});
    CHECK(extract_body_parts(lex, "Blood sugar is high.").empty());
    CHECK(extract_body_parts(lex, "").empty());
  }

  TEST_CASE("longer phrases dominate their sub-phrases") {
    const auto lex = builtin_lexicon();
    std::vector<std::string> phrases;
    for (const auto& r : lex.regions()) phrases.push_back(r.phrase);
    for (const auto& [alias, id] : lex.aliases()) phrases.push_back(alias);
    for (const auto& p : phrases) {
      const auto* whole = lex.lookup(p);
      REQUIRE(whole != nullptr);
      CHECK_MESSAGE(extract_body_parts(lex, "a " + p + " b") == std::set<std::string>{*whole}, p);
    }
    CHECK(extract_body_parts(lex, "the shoulder blade and the shoulder") ==
          std::set<std::string>{"shoulder_blade", "shoulder"});
  }

  TEST_CASE("side hint rule") {
    const auto lex = builtin_lexicon();
    const auto none = ground_answer(lex, "Rest helps.");
    CHECK(none.highlights.empty());
    CHECK(none.side_hint == Side::Front);
    CHECK(ground_answer(lex, "It affects the buttocks.").side_hint == Side::Back);
    CHECK(ground_answer(lex, "It affects the liver.").side_hint == Side::Front);

    const auto mixed = ground_answer(lex, "The liver and the brain are involved.");
    CHECK(mixed.highlights == std::set<std::string>{"liver", "brain"});
    bool all_front = true, all_back_only = true;
    for (const auto& id : mixed.highlights) {
      all_front = all_front && lex.find(id)->visible_from_front();
      all_back_only = all_back_only && lex.find(id)->side == Side::Back;
    }
    const Side expected = all_front ? Side::Front : all_back_only ? Side::Back : Side::Both;
    CHECK(mixed.side_hint == expected);
  }

  TEST_CASE("clicks become utterance fragments") {
    const auto lex = builtin_lexicon();
    CHECK(phrase_for_point(lex, {"liver", Side::Front}) == "my liver");
    CHECK(phrase_for_point(lex, {"shoulder_blade", Side::Back}) == "my shoulder blade");
    CHECK(error_code([&] { phrase_for_point(lex, {"spleen", Side::Front}); }) == errc::kUnknownRegion);
    CHECK(error_code([&] { phrase_for_point(lex, {"kidney", Side::Front}); }) == errc::kUnknownRegion);
    CHECK(error_code([&] { phrase_for_point(lex, {"nose", Side::Back}); }) == errc::kUnknownRegion);
    CHECK(error_code([&] { phrase_for_point(lex, {"liver", Side::Both}); }) == errc::kInvalidArgument);
  }

  TEST_CASE("round trip over every region and visible side") {
    const auto lex = builtin_lexicon();
    for (const auto& r : lex.regions()) {
      for (const Side side : {Side::Front, Side::Back}) {
        if (side == Side::Front ? !r.visible_from_front() : !r.visible_from_back()) continue;
        CHECK_MESSAGE(extract_body_parts(lex, phrase_for_point(lex, {r.id, side})) == std::set<std::string>{r.id},
                      r.id);
      }
    }
  }

  TEST_CASE("closure and idempotence on random texts") {
    const auto lex = builtin_lexicon();
    std::vector<std::string> words = {"the", "pain", "in", "my", "and", "large", "blade", "spinal", "lobe"};
    for (const auto& r : lex.regions()) words.push_back(r.phrase);
    for (const auto& [alias, id] : lex.aliases()) words.push_back(alias);
    std::mt19937_64 rng(8);
    for (int i = 0; i < 500; ++i) {
      std::string text;
      const auto len = rng() % 12;
      for (std::size_t w = 0; w < len; ++w) text += words[rng() % words.size()] + (rng() % 3 ? " " : ", ");
      const auto g = ground_answer(lex, text);
      for (const auto& id : g.highlights) CHECK(lex.find(id) != nullptr);
      CHECK(ground_answer(lex, g.text).highlights == g.highlights);
    }
  }

  TEST_CASE("lexicon validation") {
    CHECK_FALSE(error_code([] { BodyLexicon({{"a", "a", Side::Front}, {"a", "b", Side::Front}}, {}); }).empty());
    CHECK_FALSE(error_code([] { BodyLexicon({{"a", "Arm", Side::Front}}, {}); }).empty());
    CHECK_FALSE(error_code([] { BodyLexicon({{"a", "arm", Side::Front}}, {{"arms", "leg"}}); }).empty());
    CHECK_FALSE(error_code([] { BodyLexicon({{"a", "arm", Side::Front}, {"b", "leg", Side::Front}}, {{"arm", "b"}}); })
                    .empty());
    CHECK(error_code([] { parse_lexicon("{\"regions\": 3}"); }) == errc::kParse);
    CHECK(error_code([] { parse_side("left"); }) == errc::kInvalidArgument);
    CHECK(parse_side("BACK") == Side::Back);
  }

  TEST_CASE("shipped lexicon file equals the built-in lexicon") {
    CHECK(load_lexicon(support::data_dir() / "lexicon.json") == builtin_lexicon());
    const auto lex = builtin_lexicon();
    CHECK(parse_lexicon(lexicon_to_json(lex)) == lex);
    CHECK(lex.aliases().size() == 69);
  }
}
