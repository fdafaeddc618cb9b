// groundchat command-line tool: build a bundle, evaluate it, serve it, chat with it.

#include <atomic>
#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "groundchat/bundle.hpp"
#include "groundchat/error.hpp"
#include "groundchat/repl.hpp"
#include "groundchat/server.hpp"

namespace fs = std::filesystem;
using namespace groundchat;
using nlohmann::json;

namespace {

std::string env_or(const char* name, std::string fallback) {
  const char* v = std::getenv(name);
  return v && *v ? std::string(v) : std::move(fallback);
}

struct CorpusArg {
  fs::path path;
  std::optional<std::string> label;
};

// "path" or "path=label"
CorpusArg parse_corpus_arg(const std::string& arg) {
  const auto eq = arg.rfind('=');
  if (eq == std::string::npos) return {arg, std::nullopt};
  return {arg.substr(0, eq), arg.substr(eq + 1)};
}

Corpus pick_split(const Corpus& corpus, const std::string& split, std::uint64_t seed) {
  if (split == "all") return corpus;
  SplitSpec spec;
  spec.seed = seed;
  auto parts = split_corpus(corpus, spec);
  if (split == "train") return parts.train;
  if (split == "valid") return parts.valid;
  return parts.test;
}

std::pair<std::string, int> parse_bind(const std::string& bind) {
  const auto colon = bind.rfind(':');
  if (colon == std::string::npos) throw Error(errc::kInvalidArgument, "bind address must be host:port");
  return {bind.substr(0, colon), std::stoi(bind.substr(colon + 1))};
}

struct EngineFlags {
  std::string bundle;
  std::string config;
  std::optional<double> threshold;
  std::optional<int> top_k;
  std::optional<std::uint64_t> reply_seed;

  void add(CLI::App* cmd) {
    cmd->add_option("--bundle", bundle, "Bundle directory (env GROUNDCHAT_BUNDLE)");
    cmd->add_option("--config", config, "JSON config overriding threshold, top_k, smoothing_k, reply_seed, bind");
    cmd->add_option("--threshold", threshold, "Confidence threshold for answering without confirmation");
    cmd->add_option("--top-k", top_k, "Sentences concatenated per answer");
    cmd->add_option("--reply-seed", reply_seed, "Seed for chitchat reply selection");
  }

  std::shared_ptr<EngineBundle> load() {
    if (bundle.empty()) bundle = env_or("GROUNDCHAT_BUNDLE", "bundle");
    auto b = std::make_shared<EngineBundle>(load_bundle(bundle));
    if (!config.empty()) b->config = load_engine_config(config, b->config);
    if (threshold) b->config.threshold = *threshold;
    if (top_k) b->config.top_k = *top_k;
    if (reply_seed) b->config.reply_seed = *reply_seed;
    if (!(b->config.threshold > 0.0 && b->config.threshold <= 1.0) || b->config.top_k < 1) {
      throw Error(errc::kInvalidArgument, "threshold must lie in (0, 1] and top-k must be positive");
    }
    return b;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Grounded well-being conversational engine"};
  app.require_subcommand(1);

  // train
  auto* train = app.add_subcommand("train", "Train the mode router, topic classifiers and chat language model");
  std::string medical, social, news, dialogue, lexicon_path, replies, out_dir = "bundle";
  BuildOptions options;
  train->add_option("--medical", medical, "Medical QA corpus (JSON lines)")->required()->check(CLI::ExistingFile);
  train->add_option("--social", social, "Social QA corpus (JSON lines)")->required()->check(CLI::ExistingFile);
  train->add_option("--news", news, "Non-medical news corpus (JSON lines)")->required()->check(CLI::ExistingFile);
  train->add_option("--dialogue", dialogue, "In-domain dialogue text, one utterance per line")
      ->required()
      ->check(CLI::ExistingFile);
  train->add_option("--replies", replies, "Chitchat reply pool (JSON array)")->required()->check(CLI::ExistingFile);
  train->add_option("--lexicon", lexicon_path, "Avatar lexicon (defaults to the built-in one)")->check(CLI::ExistingFile);
  train->add_option("--out", out_dir, "Bundle directory");
  train->add_option("--seed", options.split.seed, "Split and initialisation seed");
  train->add_option("--learning-rate", options.train.learning_rate);
  train->add_option("--epochs", options.train.epochs);
  train->add_option("--l2", options.train.l2);
  train->add_option("--min-df", options.min_df);
  train->add_option("--lm-order", options.lm_order);
  train->add_option("--smoothing", options.config.smoothing_k);

  // calibrate
  auto* calibrate = app.add_subcommand("calibrate", "Fit softmax temperatures on the validation split");
  std::string bundle_dir = "bundle";
  calibrate->add_option("--bundle", bundle_dir)->check(CLI::ExistingDirectory);
  calibrate->add_option("--medical", medical)->required()->check(CLI::ExistingFile);
  calibrate->add_option("--social", social)->required()->check(CLI::ExistingFile);

  // index
  auto* index_cmd = app.add_subcommand("index", "Build the topic-labelled sentence indices");
  index_cmd->add_option("--bundle", bundle_dir)->check(CLI::ExistingDirectory);
  index_cmd->add_option("--medical", medical)->required()->check(CLI::ExistingFile);
  index_cmd->add_option("--social", social)->required()->check(CLI::ExistingFile);

  // eval-classifier
  auto* eval_cls = app.add_subcommand("eval-classifier", "Accuracy of a saved classifier");
  std::string model_path, split = "test";
  std::vector<std::string> corpus_args;
  std::uint64_t eval_seed = 0;
  eval_cls->add_option("--model", model_path)->required()->check(CLI::ExistingFile);
  eval_cls->add_option("--corpus", corpus_args, "path or path=label (label overrides entry topics)")->required();
  eval_cls->add_option("--split", split)->check(CLI::IsMember({"all", "train", "valid", "test"}));
  eval_cls->add_option("--seed", eval_seed);

  // eval-retriever
  auto* eval_ret = app.add_subcommand("eval-retriever", "Retrieval metrics for a saved index");
  std::string index_path, corpus_path;
  int k = kDefaultTopK;
  eval_ret->add_option("--index", index_path)->required()->check(CLI::ExistingFile);
  eval_ret->add_option("--corpus", corpus_path)->required()->check(CLI::ExistingFile);
  eval_ret->add_option("--split", split)->check(CLI::IsMember({"all", "train", "valid", "test"}));
  eval_ret->add_option("--seed", eval_seed);
  eval_ret->add_option("--k", k);

  // eval-lm
  auto* eval_lm = app.add_subcommand("eval-lm", "NLL and perplexity of language models on text files");
  std::vector<std::string> lm_models, lm_texts;
  eval_lm->add_option("--model", lm_models)->required()->check(CLI::ExistingFile);
  eval_lm->add_option("--text", lm_texts)->required()->check(CLI::ExistingFile);

  // serve
  auto* serve = app.add_subcommand("serve", "Run the HTTP gateway");
  EngineFlags serve_flags;
  serve_flags.add(serve);
  std::string bind, log_path;
  serve->add_option("--bind", bind, "host:port (env GROUNDCHAT_BIND, default 127.0.0.1:8080)");
  serve->add_option("--log", log_path, "Append-only transcript log (env GROUNDCHAT_LOG)");

  // chat
  auto* chat = app.add_subcommand("chat", "Interactive terminal chat over the same engine");
  EngineFlags chat_flags;
  chat_flags.add(chat);

  CLI11_PARSE(app, argc, argv);

  try {
    if (train->parsed()) {
      auto fixtures = load_fixtures(medical, social, news, dialogue);
      const auto lexicon = lexicon_path.empty() ? builtin_lexicon() : load_lexicon(lexicon_path);
      options.train.seed = options.split.seed;
      const auto splits = split_fixtures(fixtures, options.split);
      BuildReport report;
      EngineBundle b;
      b.mode_classifier = train_mode_classifier(splits, options, &report.mode);
      b.medical.classifier = train_topic_classifier(splits.medical, options, &report.medical);
      b.social.classifier = train_topic_classifier(splits.social, options, &report.social);
      b.lm = train_chat_lm(fixtures.dialogue, options);
      fs::create_directories(out_dir);
      const fs::path dir = out_dir;
      write_manifest(dir, options);
      save_text_classifier(dir / bundle_files::kModeClassifier, b.mode_classifier);
      save_text_classifier(dir / bundle_files::kMedicalTopic, b.medical.classifier);
      save_text_classifier(dir / bundle_files::kSocialTopic, b.social.classifier);
      save_ngram(dir / bundle_files::kLanguageModel, b.lm);
      std::ofstream(dir / bundle_files::kLexicon) << lexicon_to_json(lexicon) << '\n';
      std::ofstream(dir / bundle_files::kReplies) << json(load_reply_pool(replies)).dump(2) << '\n';
      const auto full = json::parse(build_report_json(report));
      const json train_report = {{"mode", full["mode"]}, {"medical_topic", full["medical_topic"]},
                                 {"social_topic", full["social_topic"]}};
      std::ofstream(dir / bundle_files::kTrainReport) << train_report.dump(2) << '\n';
      std::cout << train_report.dump(2) << '\n';
    } else if (calibrate->parsed()) {
      const fs::path dir = bundle_dir;
      SplitSpec spec;
      spec.seed = manifest_seed(dir);
      const auto med = calibrate_classifier(load_text_classifier(dir / bundle_files::kMedicalTopic),
                                            split_corpus(load_corpus(medical), spec).valid);
      const auto soc = calibrate_classifier(load_text_classifier(dir / bundle_files::kSocialTopic),
                                            split_corpus(load_corpus(social), spec).valid);
      save_calibration(dir / bundle_files::kMedicalCalibration, med);
      save_calibration(dir / bundle_files::kSocialCalibration, soc);
      std::cout << json{{"medical", json::parse(calibration_json(med))}, {"social", json::parse(calibration_json(soc))}}.dump(2)
                << '\n';
    } else if (index_cmd->parsed()) {
      const fs::path dir = bundle_dir;
      const auto med = build_index(sentence_bank(load_corpus(medical)));
      const auto soc = build_index(sentence_bank(load_corpus(social)));
      save_index(dir / bundle_files::kMedicalIndex, med);
      save_index(dir / bundle_files::kSocialIndex, soc);
      std::cout << json{{"medical_sentences", med.sentences.size()}, {"social_sentences", soc.sentences.size()}}.dump()
                << '\n';
    } else if (eval_cls->parsed()) {
      const auto classifier = load_text_classifier(model_path);
      std::vector<LabeledText> data;
      for (const auto& arg : corpus_args) {
        const auto c = parse_corpus_arg(arg);
        auto examples = topic_examples(pick_split(load_corpus(c.path), split, eval_seed));
        for (auto& ex : examples) {
          if (c.label) ex.label = *c.label;
          data.push_back(std::move(ex));
        }
      }
      const double accuracy = evaluate_accuracy(classifier.model, classifier.featurizer, data);
      std::cout << json{{"accuracy", accuracy}, {"examples", data.size()}}.dump() << '\n';
    } else if (eval_ret->parsed()) {
      const auto index = load_index(index_path);
      std::vector<RetrievalQuery> queries;
      const auto corpus = pick_split(load_corpus(corpus_path), split, eval_seed);
      for (const auto& e : corpus.entries()) {
        queries.push_back({e.question, e.topic, e.id});
      }
      std::cout << metrics_json(evaluate_retriever(index, queries, k)) << '\n';
    } else if (eval_lm->parsed()) {
      if (lm_models.size() != lm_texts.size()) throw Error(errc::kInvalidArgument, "--model and --text must pair up");
      for (std::size_t i = 0; i < lm_models.size(); ++i) {
        std::cout << lm_eval_json(evaluate_lm(load_ngram(lm_models[i]), load_lines(lm_texts[i]))) << '\n';
      }
    } else if (serve->parsed()) {
      auto bundle = serve_flags.load();
      std::string bind_cfg;
      if (!serve_flags.config.empty()) {
        std::ifstream in(serve_flags.config);
        bind_cfg = json::parse(in).value("bind", std::string());
      }
      if (bind.empty()) bind = env_or("GROUNDCHAT_BIND", bind_cfg.empty() ? "127.0.0.1:8080" : bind_cfg);
      if (log_path.empty()) log_path = env_or("GROUNDCHAT_LOG", "");
      std::shared_ptr<TranscriptLog> log;
      if (!log_path.empty()) log = std::make_shared<TranscriptLog>(log_path);
      auto service = std::make_shared<ConversationService>(bundle, log);
      GatewayServer server(service);
      const auto [host, port] = parse_bind(bind);
      const int bound = server.bind(host, port);
      if (bound < 0) throw Error(errc::kIo, "cannot bind " + bind);

      sigset_t signals;
      sigemptyset(&signals);
      sigaddset(&signals, SIGINT);
      sigaddset(&signals, SIGTERM);
      pthread_sigmask(SIG_BLOCK, &signals, nullptr);
      std::atomic<bool> signalled{false};
      std::thread waiter([&] {
        int sig = 0;
        sigwait(&signals, &sig);
        signalled = true;
        server.stop();
      });
      std::cerr << "listening on " << host << ':' << bound << std::endl;
      server.listen_after_bind();
      // Wake the waiter if listen returned on its own; a queued signal is harmless.
      if (!signalled) pthread_kill(waiter.native_handle(), SIGTERM);
      waiter.join();
    } else if (chat->parsed()) {
      ConversationService service(chat_flags.load());
      ServiceBackend backend(service);
      run_chat(backend, std::cin, std::cout);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.code() << ": " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
