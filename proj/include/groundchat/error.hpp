#pragma once

#include <stdexcept>
#include <string>

namespace groundchat {

/// Error carrying a machine-readable code. Codes form a closed set so the
/// gateway can map them onto API errors without inspecting messages.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

namespace errc {
inline constexpr const char* kIo = "io_error";
inline constexpr const char* kParse = "parse_error";
inline constexpr const char* kInvalidArgument = "invalid_argument";
inline constexpr const char* kSchemaMismatch = "schema_mismatch";
inline constexpr const char* kEmptyUtterance = "empty_utterance";
inline constexpr const char* kWrongState = "wrong_state";
inline constexpr const char* kUnknownRegion = "unknown_region";
inline constexpr const char* kUnknownTopic = "unknown_topic";
inline constexpr const char* kUnknownSession = "unknown_session";
}  // namespace errc

}  // namespace groundchat
