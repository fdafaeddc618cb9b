#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace groundchat {

/// Lowercases ASCII and splits on every byte that is not an ASCII letter or
/// digit. Bytes >= 0x80 are kept inside tokens so UTF-8 words stay whole.
/// Single-character tokens are kept.
std::vector<std::string> tokenize(std::string_view text);

std::string trim(std::string_view text);

/// Collapses runs of whitespace to one space and trims both ends.
std::string normalize_whitespace(std::string_view text);

}  // namespace groundchat
