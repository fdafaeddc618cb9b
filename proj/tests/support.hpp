#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "groundchat/bundle.hpp"
#include "groundchat/error.hpp"

namespace support {

std::filesystem::path data_dir();
std::filesystem::path golden_dir();
std::string read_file(const std::filesystem::path& path);

const groundchat::Fixtures& fixtures();
const groundchat::CorpusSplits& fixture_splits();

/// Bundle trained in memory from the shipped fixtures with default options.
/// Built once per process.
std::shared_ptr<const groundchat::EngineBundle> fixture_bundle();
const groundchat::BuildReport& fixture_report();

struct GoldenCase {
  std::string name;
  std::string input;
  std::string expected;
};
std::vector<GoldenCase> golden_cases();

/// Runs a golden script against a fresh in-process session.
std::string replay_in_process(const std::string& script);

/// Code of the groundchat::Error thrown by f, or "" when nothing is thrown.
template <typename F>
std::string error_code(F&& f) {
  try {
    f();
  } catch (const groundchat::Error& e) {
    return e.code();
  }
  return "";
}

/// Fresh empty directory under the system temp dir.
std::filesystem::path scratch_dir(const std::string& name);

}  // namespace support
