#include "groundchat/ground.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "groundchat/error.hpp"
#include "groundchat/tokenize.hpp"

namespace groundchat {

namespace {

// Avatar front view.
constexpr std::array<std::string_view, 50> kFrontParts = {
    "ankle",    "arm",      "breast",    "cheeks",         "chin",     "collar bone", "ear lobe",    "ear",
    "elbow",    "eyebrows", "eyelashes", "eyelids",        "eyes",     "finger",      "foot",        "forehead",
    "groin",    "hair",     "hand",      "heart",          "hip",      "intestines",  "jaw",         "knee",
    "lips",     "liver",    "lungs",     "mouth",          "neck",     "nipple",      "nose",        "nostril",
    "pancreas", "pelvis",   "rectum",    "ribs",           "shin",     "shoulder blade", "shoulder", "spinal cord",
    "spine",    "stomach",  "teeth",     "thigh",          "throat",   "thumb",       "toes",        "tongue",
    "waist",    "wrist",
};

// Avatar back view.
constexpr std::array<std::string_view, 33> kBackParts = {
    "ankle",    "anus",   "arm",     "back",   "brain",          "buttocks", "calf",        "ear lobe",
    "ear",      "elbow",  "finger",  "foot",   "heart",          "intestines", "kidney",    "knee",
    "liver",    "lungs",  "neck",    "palm",   "pancreas",       "pelvis",   "rectum",      "ribs",
    "scalp",    "shoulder blade", "shoulder", "spinal cord", "spine", "stomach", "thigh",   "thumb",
    "wrist",
};

struct Alias {
  std::string_view alias;
  std::string_view phrase;
};

constexpr Alias kAliases[] = {
    {"ankles", "ankle"},          {"arms", "arm"},
    {"breasts", "breast"},        {"cheek", "cheeks"},
    {"chins", "chin"},            {"collar bones", "collar bone"},
    {"collarbone", "collar bone"}, {"collarbones", "collar bone"},
    {"ear lobes", "ear lobe"},    {"earlobe", "ear lobe"},
    {"earlobes", "ear lobe"},     {"ears", "ear"},
    {"elbows", "elbow"},          {"eyebrow", "eyebrows"},
    {"eyelash", "eyelashes"},     {"eyelid", "eyelids"},
    {"eye", "eyes"},              {"fingers", "finger"},
    {"feet", "foot"},             {"foreheads", "forehead"},
    {"groins", "groin"},          {"hairs", "hair"},
    {"hands", "hand"},            {"hearts", "heart"},
    {"hips", "hip"},              {"intestine", "intestines"},
    {"large intestine", "intestines"}, {"small intestine", "intestines"},
    {"bowel", "intestines"},      {"bowels", "intestines"},
    {"jaws", "jaw"},              {"knees", "knee"},
    {"lip", "lips"},              {"livers", "liver"},
    {"lung", "lungs"},            {"mouths", "mouth"},
    {"necks", "neck"},            {"nipples", "nipple"},
    {"noses", "nose"},            {"nostrils", "nostril"},
    {"pancreases", "pancreas"},   {"pelvises", "pelvis"},
    {"rectums", "rectum"},        {"rib", "ribs"},
    {"shins", "shin"},            {"shoulder blades", "shoulder blade"},
    {"shoulders", "shoulder"},    {"spinal cords", "spinal cord"},
    {"spines", "spine"},          {"stomachs", "stomach"},
    {"tummy", "stomach"},         {"belly", "stomach"},
    {"abdomen", "stomach"},       {"tooth", "teeth"},
    {"thighs", "thigh"},          {"throats", "throat"},
    {"thumbs", "thumb"},          {"toe", "toes"},
    {"tongues", "tongue"},        {"waists", "waist"},
    {"wrists", "wrist"},          {"anuses", "anus"},
    {"backs", "back"},            {"brains", "brain"},
    {"buttock", "buttocks"},      {"calves", "calf"},
    {"kidneys", "kidney"},        {"palms", "palm"},
    {"scalps", "scalp"},
};

std::string region_id_for(std::string_view phrase) {
  std::string id(phrase);
  std::replace(id.begin(), id.end(), ' ', '_');
  return id;
}

std::string join_tokens(const std::vector<std::string>& tokens, std::size_t begin, std::size_t end) {
  std::string out;
  for (std::size_t i = begin; i < end; ++i) {
    if (i > begin) out.push_back(' ');
    out += tokens[i];
  }
  return out;
}

std::string token_key(std::string_view phrase) {
  const auto tokens = tokenize(phrase);
  return join_tokens(tokens, 0, tokens.size());
}

}  // namespace

std::string_view to_string(Side side) {
  switch (side) {
    case Side::Front: return "front";
    case Side::Back: return "back";
    case Side::Both: return "both";
  }
  return "front";
}

Side parse_side(std::string_view text) {
  std::string lower(text);
  for (auto& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (lower == "front") return Side::Front;
  if (lower == "back") return Side::Back;
  if (lower == "both") return Side::Both;
  throw Error(errc::kInvalidArgument, "unknown side '" + std::string(text) + "'");
}

BodyLexicon::BodyLexicon(std::vector<BodyRegion> regions, std::map<std::string, std::string> aliases)
    : regions_(std::move(regions)), aliases_(std::move(aliases)) {
  auto claim = [this](const std::string& phrase, const std::string& id) {
    const auto key = token_key(phrase);
    if (key.empty()) throw Error(errc::kInvalidArgument, "empty lexicon phrase");
    const auto [it, inserted] = phrase_to_region_.emplace(key, id);
    if (!inserted && it->second != id) throw Error(errc::kInvalidArgument, "phrase '" + phrase + "' claimed twice");
    longest_ = std::max(longest_, tokenize(key).size());
  };
  std::set<std::string> ids;
  for (const auto& r : regions_) {
    if (r.id.empty() || !ids.insert(r.id).second) throw Error(errc::kInvalidArgument, "duplicate region id '" + r.id + "'");
    if (std::any_of(r.phrase.begin(), r.phrase.end(), [](unsigned char c) { return std::isupper(c); })) {
      throw Error(errc::kInvalidArgument, "region phrase '" + r.phrase + "' is not lowercase");
    }
    claim(r.phrase, r.id);
  }
  for (const auto& [alias, id] : aliases_) {
    if (!ids.count(id)) throw Error(errc::kInvalidArgument, "alias '" + alias + "' maps to unknown region '" + id + "'");
    claim(alias, id);
  }
}

const BodyRegion* BodyLexicon::find(std::string_view region_id) const {
  const auto it = std::find_if(regions_.begin(), regions_.end(), [&](const auto& r) { return r.id == region_id; });
  return it == regions_.end() ? nullptr : &*it;
}

const std::string* BodyLexicon::lookup(const std::string& joined_tokens) const {
  const auto it = phrase_to_region_.find(joined_tokens);
  return it == phrase_to_region_.end() ? nullptr : &it->second;
}

BodyLexicon builtin_lexicon() {
  const auto& front = kFrontParts;
  auto in_back = [](std::string_view p) { return std::find(kBackParts.begin(), kBackParts.end(), p) != kBackParts.end(); };
  auto in_front = [&](std::string_view p) { return std::find(front.begin(), front.end(), p) != front.end(); };

  std::vector<BodyRegion> regions;
  for (const auto p : front) regions.push_back({region_id_for(p), std::string(p), in_back(p) ? Side::Both : Side::Front});
  for (const auto p : kBackParts) {
    if (!in_front(p)) regions.push_back({region_id_for(p), std::string(p), Side::Back});
  }
  std::map<std::string, std::string> aliases;
  for (const auto& a : kAliases) aliases.emplace(std::string(a.alias), region_id_for(a.phrase));
  return BodyLexicon(std::move(regions), std::move(aliases));
}

BodyLexicon parse_lexicon(std::string_view json_text) {
  try {
    const auto doc = nlohmann::json::parse(json_text);
    std::vector<BodyRegion> regions;
    for (const auto& r : doc.at("regions")) {
      regions.push_back({r.at("region_id").get<std::string>(), r.at("phrase").get<std::string>(),
                         parse_side(r.at("side").get<std::string>())});
    }
    std::map<std::string, std::string> aliases;
    if (doc.contains("aliases")) aliases = doc.at("aliases").get<std::map<std::string, std::string>>();
    return BodyLexicon(std::move(regions), std::move(aliases));
  } catch (const nlohmann::json::exception& e) {
    throw Error(errc::kParse, std::string("malformed lexicon: ") + e.what());
  } catch (const Error& e) {
    throw Error(errc::kParse, std::string("malformed lexicon: ") + e.what());
  }
}

BodyLexicon load_lexicon(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(errc::kIo, "cannot open lexicon file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_lexicon(buffer.str());
}

std::string lexicon_to_json(const BodyLexicon& lexicon, int indent) {
  nlohmann::json doc;
  doc["regions"] = nlohmann::json::array();
  for (const auto& r : lexicon.regions()) {
    doc["regions"].push_back({{"region_id", r.id}, {"phrase", r.phrase}, {"side", to_string(r.side)}});
  }
  doc["aliases"] = lexicon.aliases();
  return doc.dump(indent);
}

std::set<std::string> extract_body_parts(const BodyLexicon& lexicon, std::string_view text) {
  const auto tokens = tokenize(text);
  std::set<std::string> found;
  std::size_t i = 0;
  while (i < tokens.size()) {
    std::size_t matched = 0;
    for (std::size_t len = std::min(lexicon.longest_phrase_tokens(), tokens.size() - i); len >= 1; --len) {
      if (const auto* id = lexicon.lookup(join_tokens(tokens, i, i + len))) {
        found.insert(*id);
        matched = len;
        break;
      }
    }
    i += matched > 0 ? matched : 1;
  }
  return found;
}

GroundedAnswer ground_answer(const BodyLexicon& lexicon, std::string answer_text) {
  GroundedAnswer out;
  out.highlights = extract_body_parts(lexicon, answer_text);
  out.text = std::move(answer_text);
  if (out.highlights.empty()) return out;
  bool all_front = true;
  bool all_back_only = true;
  for (const auto& id : out.highlights) {
    const auto* region = lexicon.find(id);
    all_front = all_front && region->visible_from_front();
    all_back_only = all_back_only && region->side == Side::Back;
  }
  out.side_hint = all_front ? Side::Front : all_back_only ? Side::Back : Side::Both;
  return out;
}

std::string phrase_for_point(const BodyLexicon& lexicon, const PointEvent& event) {
  const auto* region = lexicon.find(event.region_id);
  if (!region) throw Error(errc::kUnknownRegion, "unknown region '" + event.region_id + "'");
  if (event.side == Side::Both) throw Error(errc::kInvalidArgument, "a click lands on the front or the back view");
  const bool visible = event.side == Side::Back ? region->visible_from_back() : region->visible_from_front();
  if (!visible) {
    throw Error(errc::kUnknownRegion,
                "region '" + event.region_id + "' is not on the " + std::string(to_string(event.side)) + " view");
  }
  return "my " + region->phrase;
}

}  // namespace groundchat
