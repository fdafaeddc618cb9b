#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace groundchat {

enum class Side { Front, Back, Both };

std::string_view to_string(Side side);
/// Accepts "front", "back", "both" (any case).
Side parse_side(std::string_view text);

struct BodyRegion {
  std::string id;      // stable key shared with the avatar graphic
  std::string phrase;  // canonical lowercase phrase
  Side side;

  bool visible_from_front() const { return side != Side::Back; }
  bool visible_from_back() const { return side != Side::Front; }
  bool operator==(const BodyRegion&) const = default;
};

/// Avatar body-part vocabulary: canonical regions plus alias phrases.
class BodyLexicon {
 public:
  BodyLexicon() = default;
  /// Throws on duplicate ids, non-lowercase phrases, aliases to unknown
  /// regions, or a phrase claimed by two regions.
  BodyLexicon(std::vector<BodyRegion> regions, std::map<std::string, std::string> aliases);

  const std::vector<BodyRegion>& regions() const noexcept { return regions_; }
  const std::map<std::string, std::string>& aliases() const noexcept { return aliases_; }
  const BodyRegion* find(std::string_view region_id) const;

  /// Region id for a tokenized phrase (canonical or alias), or nullptr.
  const std::string* lookup(const std::string& joined_tokens) const;
  std::size_t longest_phrase_tokens() const noexcept { return longest_; }

  bool operator==(const BodyLexicon& other) const {
    return regions_ == other.regions_ && aliases_ == other.aliases_;
  }

 private:
  std::vector<BodyRegion> regions_;
  std::map<std::string, std::string> aliases_;
  std::map<std::string, std::string> phrase_to_region_;
  std::size_t longest_ = 0;
};

/// The shipped avatar lexicon: 50 front phrases, 33 back phrases, parts in
/// both views marked Both, plus plural/singular and anatomical aliases.
BodyLexicon builtin_lexicon();

/// Reads {"regions": [{region_id, phrase, side}], "aliases": {alias: region_id}}.
BodyLexicon load_lexicon(const std::filesystem::path& path);
BodyLexicon parse_lexicon(std::string_view json_text);
std::string lexicon_to_json(const BodyLexicon& lexicon, int indent = 2);

/// Case-insensitive longest-match scan over tokens; aliases resolve to their
/// region. A span matched by a longer phrase is not re-matched by its parts.
std::set<std::string> extract_body_parts(const BodyLexicon& lexicon, std::string_view text);

struct GroundedAnswer {
  std::string text;
  std::set<std::string> highlights;
  Side side_hint = Side::Front;
};

/// side_hint: Front when every highlight is front-visible (also when there
/// are none), Back when every highlight is back-only, Both otherwise.
GroundedAnswer ground_answer(const BodyLexicon& lexicon, std::string answer_text);

struct PointEvent {
  std::string region_id;
  Side side = Side::Front;
};

/// "my <phrase>". Throws unknown_region if the region is missing or not
/// visible on the clicked side, invalid_argument for Side::Both.
std::string phrase_for_point(const BodyLexicon& lexicon, const PointEvent& event);

}  // namespace groundchat
