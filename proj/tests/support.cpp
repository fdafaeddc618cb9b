#include "support.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "groundchat/error.hpp"
#include "groundchat/repl.hpp"

namespace support {

namespace fs = std::filesystem;
using namespace groundchat;

fs::path data_dir() { return GROUNDCHAT_DATA_DIR; }

fs::path golden_dir() { return GROUNDCHAT_GOLDEN_DIR; }

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(errc::kIo, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const Fixtures& fixtures() {
  static const Fixtures f = load_fixtures(data_dir() / "medical.jsonl", data_dir() / "social.jsonl",
                                          data_dir() / "news.jsonl", data_dir() / "dialogue_train.txt");
  return f;
}

const CorpusSplits& fixture_splits() {
  static const CorpusSplits s = split_fixtures(fixtures(), BuildOptions{}.split);
  return s;
}

namespace {

struct Built {
  std::shared_ptr<const EngineBundle> bundle;
  BuildReport report;
};

const Built& built() {
  static const Built b = [] {
    Built out;
    auto replies = load_reply_pool(data_dir() / "replies.json");
    out.bundle = std::make_shared<const EngineBundle>(
        build_bundle(fixtures(), load_lexicon(data_dir() / "lexicon.json"), std::move(replies), BuildOptions{}, &out.report));
    return out;
  }();
  return b;
}

}  // namespace

std::shared_ptr<const EngineBundle> fixture_bundle() { return built().bundle; }

const BuildReport& fixture_report() { return built().report; }

std::vector<GoldenCase> golden_cases() {
  std::vector<GoldenCase> out;
  for (const auto& entry : fs::directory_iterator(golden_dir())) {
    if (entry.path().extension() != ".in") continue;
    auto expected = entry.path();
    expected.replace_extension(".out");
    out.push_back({entry.path().stem().string(), read_file(entry.path()), read_file(expected)});
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.name < b.name; });
  return out;
}

std::string replay_in_process(const std::string& script) {
  ConversationService service(fixture_bundle());
  ServiceBackend backend(service);
  std::istringstream in(script);
  std::ostringstream out;
  run_chat(backend, in, out);
  return out.str();
}

fs::path scratch_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("groundchat_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace support
