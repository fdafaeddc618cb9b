#include "groundchat/bundle.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "groundchat/error.hpp"
#include "groundchat/tokenize.hpp"

namespace groundchat {

using nlohmann::json;

namespace {

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(errc::kIo, "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(errc::kParse, path.string() + ": " + e.what());
  }
}

json read_versioned(const std::filesystem::path& path) {
  auto doc = read_json(path);
  if (!doc.is_object() || doc.value("schema_version", -1) != kSchemaVersion) {
    throw Error(errc::kSchemaMismatch, path.string() + ": expected schema_version " + std::to_string(kSchemaVersion));
  }
  return doc;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(errc::kIo, "cannot write " + path.string());
  out << text << '\n';
}

template <typename F>
auto parse_guard(const std::filesystem::path& path, F&& f) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw Error(errc::kParse, path.string() + ": " + e.what());
  }
}

json vector_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Eigen::VectorXd vector_from(const json& j) {
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

json summary_json(const ClassifierSummary& s) {
  return {{"initial_loss", s.initial_loss},     {"final_loss", s.final_loss},
          {"train_accuracy", s.train_accuracy}, {"test_accuracy", s.test_accuracy},
          {"train_examples", s.train_examples}, {"test_examples", s.test_examples}};
}

json calibration_to_json(const CalibrationReport& r) {
  return {{"T", r.temperature}, {"nll_before", r.nll_before}, {"nll_after", r.nll_after}, {"accuracy", r.accuracy}};
}

std::vector<LabeledText> relabel(std::vector<LabeledText> data, std::string_view label) {
  for (auto& ex : data) ex.label = std::string(label);
  return data;
}

}  // namespace

CorpusSplits split_fixtures(const Fixtures& fixtures, const SplitSpec& spec) {
  return {split_corpus(fixtures.medical, spec), split_corpus(fixtures.social, spec), split_corpus(fixtures.news, spec)};
}

std::vector<LabeledText> topic_examples(const Corpus& corpus) {
  std::vector<LabeledText> out;
  for (const auto& e : corpus.entries()) {
    out.push_back({e.question, e.topic});
    for (auto& s : segment_sentences(e.answer)) out.push_back({std::move(s), e.topic});
  }
  return out;
}

std::vector<LabeledText> mode_examples(const Corpus& medical, const std::vector<const Corpus*>& non_medical) {
  auto out = relabel(topic_examples(medical), kMedicalLabel);
  for (const auto* corpus : non_medical) {
    auto part = relabel(topic_examples(*corpus), kSocialLabel);
    out.insert(out.end(), part.begin(), part.end());
  }
  return out;
}

std::vector<LabeledText> mode_test_documents(const Corpus& medical, const Corpus& news) {
  std::vector<LabeledText> out;
  for (const auto& e : medical.entries()) out.push_back({e.question + " " + e.answer, std::string(kMedicalLabel)});
  for (const auto& e : news.entries()) out.push_back({e.question + " " + e.answer, std::string(kSocialLabel)});
  return out;
}

TextClassifier train_mode_classifier(const CorpusSplits& splits, const BuildOptions& options,
                                     ClassifierSummary* summary) {
  const auto train = mode_examples(splits.medical.train, {&splits.news.train, &splits.social.train});
  TrainReport report;
  auto classifier = train_text_classifier(train, options.train, options.min_df, &report);
  if (summary) {
    const auto test = mode_test_documents(splits.medical.test, splits.news.test);
    summary->initial_loss = report.initial_loss;
    summary->final_loss = report.final_loss;
    summary->train_accuracy = evaluate_accuracy(classifier.model, classifier.featurizer, train);
    summary->test_accuracy = test.empty() ? 0.0 : evaluate_accuracy(classifier.model, classifier.featurizer, test);
    summary->train_examples = train.size();
    summary->test_examples = test.size();
  }
  return classifier;
}

TextClassifier train_topic_classifier(const CorpusSplit& split, const BuildOptions& options,
                                      ClassifierSummary* summary) {
  const auto train = topic_examples(split.train);
  TrainReport report;
  auto classifier = train_text_classifier(train, options.train, options.min_df, &report);
  if (summary) {
    const auto test = topic_examples(split.test);
    summary->initial_loss = report.initial_loss;
    summary->final_loss = report.final_loss;
    summary->train_accuracy = evaluate_accuracy(classifier.model, classifier.featurizer, train);
    summary->test_accuracy = test.empty() ? 0.0 : evaluate_accuracy(classifier.model, classifier.featurizer, test);
    summary->train_examples = train.size();
    summary->test_examples = test.size();
  }
  return classifier;
}

CalibrationReport calibrate_classifier(const TextClassifier& classifier, const Corpus& valid) {
  const auto examples = topic_examples(valid);
  if (examples.empty()) throw Error(errc::kInvalidArgument, "calibration needs a non-empty validation set");
  std::vector<Logits> logits;
  std::vector<std::string> gold;
  for (const auto& ex : examples) {
    logits.push_back(classifier.logits(ex.text));
    gold.push_back(ex.label);
  }
  const auto t = fit_temperature(logits, gold);
  CalibrationReport report;
  report.temperature = t.value();
  report.nll_before = nll_at(logits, gold, Temperature(1.0));
  report.nll_after = nll_at(logits, gold, t);
  report.accuracy = evaluate_accuracy(classifier.model, classifier.featurizer, examples);
  return report;
}

NgramModel train_chat_lm(const std::vector<std::string>& dialogue, const BuildOptions& options) {
  return train_ngram(dialogue, options.lm_order, options.config.smoothing_k, options.lm_min_count);
}

EngineBundle build_bundle(const Fixtures& fixtures, const BodyLexicon& lexicon, std::vector<std::string> replies,
                          const BuildOptions& options, BuildReport* report) {
  const auto splits = split_fixtures(fixtures, options.split);
  BuildReport local;
  EngineBundle bundle;
  bundle.mode_classifier = train_mode_classifier(splits, options, &local.mode);
  bundle.medical.classifier = train_topic_classifier(splits.medical, options, &local.medical);
  bundle.social.classifier = train_topic_classifier(splits.social, options, &local.social);
  local.medical_calibration = calibrate_classifier(bundle.medical.classifier, splits.medical.valid);
  local.social_calibration = calibrate_classifier(bundle.social.classifier, splits.social.valid);
  bundle.medical.temperature = Temperature(local.medical_calibration.temperature);
  bundle.social.temperature = Temperature(local.social_calibration.temperature);
  bundle.medical.index = build_index(sentence_bank(fixtures.medical));
  bundle.social.index = build_index(sentence_bank(fixtures.social));
  bundle.lexicon = lexicon;
  bundle.lm = train_chat_lm(fixtures.dialogue, options);
  bundle.replies = std::move(replies);
  bundle.config = options.config;
  if (report) *report = local;
  return bundle;
}

std::vector<std::string> load_lines(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(errc::kIo, "cannot open " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    auto t = trim(line);
    if (!t.empty()) lines.push_back(std::move(t));
  }
  return lines;
}

Fixtures load_fixtures(const std::filesystem::path& medical, const std::filesystem::path& social,
                       const std::filesystem::path& news, const std::filesystem::path& dialogue) {
  return {load_corpus(medical), load_corpus(social), load_corpus(news), load_lines(dialogue)};
}

std::string text_classifier_json(const TextClassifier& c) {
  json weights = json::array();
  for (Eigen::Index r = 0; r < c.model.weights.rows(); ++r) weights.push_back(vector_json(c.model.weights.row(r)));
  const json doc = {
      {"schema_version", kSchemaVersion},
      {"featurizer", {{"tokens", c.featurizer.tokens}, {"idf", vector_json(c.featurizer.idf)}, {"min_df", c.featurizer.min_df}}},
      {"weights", weights},
      {"bias", vector_json(c.model.bias)},
      {"labels", c.model.labels},
      {"config",
       {{"learning_rate", c.config.learning_rate}, {"epochs", c.config.epochs}, {"l2", c.config.l2}, {"seed", c.config.seed}}},
  };
  return doc.dump();
}

void save_text_classifier(const std::filesystem::path& path, const TextClassifier& classifier) {
  write_text(path, text_classifier_json(classifier));
}

TextClassifier load_text_classifier(const std::filesystem::path& path) {
  const auto doc = read_versioned(path);
  return parse_guard(path, [&] {
    TextClassifier c;
    const auto& f = doc.at("featurizer");
    c.featurizer = make_featurizer(f.at("tokens").get<std::vector<std::string>>(), vector_from(f.at("idf")),
                                   f.at("min_df").get<int>());
    c.model.labels = doc.at("labels").get<std::vector<std::string>>();
    c.model.bias = vector_from(doc.at("bias"));
    const auto& rows = doc.at("weights");
    c.model.weights.resize(static_cast<Eigen::Index>(rows.size()), c.featurizer.dimension());
    for (std::size_t r = 0; r < rows.size(); ++r) {
      const auto row = vector_from(rows[r]);
      if (row.size() != c.featurizer.dimension()) throw Error(errc::kParse, path.string() + ": weight row width mismatch");
      c.model.weights.row(static_cast<Eigen::Index>(r)) = row.transpose();
    }
    if (c.model.labels.size() != rows.size() || c.model.bias.size() != static_cast<Eigen::Index>(rows.size())) {
      throw Error(errc::kParse, path.string() + ": labels, weights and bias disagree");
    }
    if (!c.model.weights.allFinite() || !c.model.bias.allFinite()) throw Error(errc::kParse, path.string() + ": non-finite parameters");
    const auto& cfg = doc.at("config");
    c.config = {cfg.at("learning_rate").get<double>(), cfg.at("epochs").get<int>(), cfg.at("l2").get<double>(),
                cfg.at("seed").get<std::uint64_t>()};
    return c;
  });
}

void save_index(const std::filesystem::path& path, const SentenceIndex& index) {
  json sentences = json::array();
  for (const auto& s : index.sentences) sentences.push_back({{"text", s.text}, {"topic", s.topic}, {"entry_id", s.entry_id}});
  write_text(path, json{{"schema_version", kSchemaVersion}, {"sentences", sentences}}.dump());
}

SentenceIndex load_index(const std::filesystem::path& path) {
  const auto doc = read_versioned(path);
  return parse_guard(path, [&] {
    std::vector<LabeledSentence> bank;
    for (const auto& s : doc.at("sentences")) {
      bank.push_back({s.at("text").get<std::string>(), s.at("topic").get<std::string>(), s.at("entry_id").get<std::string>()});
    }
    return build_index(std::move(bank));
  });
}

void save_ngram(const std::filesystem::path& path, const NgramModel& model) {
  json counts = json::array();
  for (const auto& [context, row] : model.counts) {
    for (const auto& [token, count] : row) counts.push_back({{"context", context}, {"token", token}, {"count", count}});
  }
  const json doc = {{"schema_version", kSchemaVersion}, {"n", model.n}, {"smoothing_k", model.smoothing_k},
                    {"min_count", model.min_count},     {"vocab", model.vocab}, {"counts", counts}};
  write_text(path, doc.dump());
}

NgramModel load_ngram(const std::filesystem::path& path) {
  const auto doc = read_versioned(path);
  return parse_guard(path, [&] {
    NgramModel m;
    m.n = doc.at("n").get<int>();
    m.smoothing_k = doc.at("smoothing_k").get<double>();
    m.min_count = doc.at("min_count").get<int>();
    m.vocab = doc.at("vocab").get<std::set<std::string>>();
    for (const auto& c : doc.at("counts")) {
      auto context = c.at("context").get<NgramModel::Context>();
      const auto count = c.at("count").get<int>();
      if (static_cast<int>(context.size()) != m.n - 1 || count < 1) throw Error(errc::kParse, path.string() + ": bad n-gram record");
      m.counts[context][c.at("token").get<std::string>()] = count;
      m.context_totals[context] += count;
    }
    return m;
  });
}

std::string calibration_json(const CalibrationReport& report) { return calibration_to_json(report).dump(); }

void save_calibration(const std::filesystem::path& path, const CalibrationReport& report) {
  auto doc = calibration_to_json(report);
  doc["schema_version"] = kSchemaVersion;
  write_text(path, doc.dump());
}

CalibrationReport load_calibration(const std::filesystem::path& path) {
  const auto doc = read_versioned(path);
  return parse_guard(path, [&] {
    CalibrationReport r;
    r.temperature = Temperature(doc.at("T").get<double>()).value();
    r.nll_before = doc.at("nll_before").get<double>();
    r.nll_after = doc.at("nll_after").get<double>();
    r.accuracy = doc.at("accuracy").get<double>();
    return r;
  });
}

std::string metrics_json(const RetrievalMetrics& m) {
  return json{{"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1}, {"accuracy", m.accuracy}}.dump();
}

std::string lm_eval_json(const LmEval& eval) { return json{{"nll", eval.nll}, {"ppl", eval.ppl}}.dump(); }

std::string build_report_json(const BuildReport& r) {
  return json{{"mode", summary_json(r.mode)},
              {"medical_topic", summary_json(r.medical)},
              {"social_topic", summary_json(r.social)},
              {"medical_calibration", calibration_to_json(r.medical_calibration)},
              {"social_calibration", calibration_to_json(r.social_calibration)}}
      .dump(2);
}

EngineConfig load_engine_config(const std::filesystem::path& path, EngineConfig base) {
  const auto doc = read_json(path);
  return parse_guard(path, [&] {
    if (!doc.is_object()) throw Error(errc::kParse, path.string() + ": config must be a JSON object");
    base.threshold = doc.value("threshold", base.threshold);
    base.top_k = doc.value("top_k", base.top_k);
    base.smoothing_k = doc.value("smoothing_k", base.smoothing_k);
    base.reply_seed = doc.value("reply_seed", base.reply_seed);
    if (!(base.threshold > 0.0 && base.threshold <= 1.0) || base.top_k < 1 || !(base.smoothing_k > 0.0)) {
      throw Error(errc::kInvalidArgument, path.string() + ": config value out of range");
    }
    return base;
  });
}

void write_manifest(const std::filesystem::path& dir, const BuildOptions& options) {
  write_text(dir / bundle_files::kManifest,
             json{{"schema_version", kSchemaVersion}, {"seed", options.split.seed}}.dump(2));
}

std::uint64_t manifest_seed(const std::filesystem::path& dir) {
  const auto path = dir / bundle_files::kManifest;
  const auto doc = read_versioned(path);
  return parse_guard(path, [&] { return doc.at("seed").get<std::uint64_t>(); });
}

void save_bundle(const std::filesystem::path& dir, const EngineBundle& bundle, const BuildOptions& options,
                 const BuildReport& report) {
  namespace bf = bundle_files;
  std::filesystem::create_directories(dir);
  write_manifest(dir, options);
  save_text_classifier(dir / bf::kModeClassifier, bundle.mode_classifier);
  save_text_classifier(dir / bf::kMedicalTopic, bundle.medical.classifier);
  save_text_classifier(dir / bf::kSocialTopic, bundle.social.classifier);
  save_calibration(dir / bf::kMedicalCalibration, report.medical_calibration);
  save_calibration(dir / bf::kSocialCalibration, report.social_calibration);
  write_text(dir / bf::kTrainReport, build_report_json(report));
  save_index(dir / bf::kMedicalIndex, bundle.medical.index);
  save_index(dir / bf::kSocialIndex, bundle.social.index);
  save_ngram(dir / bf::kLanguageModel, bundle.lm);
  write_text(dir / bf::kLexicon, lexicon_to_json(bundle.lexicon));
  write_text(dir / bf::kReplies, json(bundle.replies).dump(2));
}

EngineBundle load_bundle(const std::filesystem::path& dir) {
  namespace bf = bundle_files;
  EngineBundle b;
  manifest_seed(dir);
  b.mode_classifier = load_text_classifier(dir / bf::kModeClassifier);
  b.medical.classifier = load_text_classifier(dir / bf::kMedicalTopic);
  b.social.classifier = load_text_classifier(dir / bf::kSocialTopic);
  b.medical.temperature = Temperature(load_calibration(dir / bf::kMedicalCalibration).temperature);
  b.social.temperature = Temperature(load_calibration(dir / bf::kSocialCalibration).temperature);
  b.medical.index = load_index(dir / bf::kMedicalIndex);
  b.social.index = load_index(dir / bf::kSocialIndex);
  b.lm = load_ngram(dir / bf::kLanguageModel);
  b.lexicon = load_lexicon(dir / bf::kLexicon);
  b.replies = load_reply_pool(dir / bf::kReplies);
  b.config.smoothing_k = b.lm.smoothing_k;
  if (std::filesystem::exists(dir / bf::kConfig)) b.config = load_engine_config(dir / bf::kConfig, b.config);
  const auto& labels = b.mode_classifier.model.labels;
  if (labels != std::vector<std::string>{std::string(kMedicalLabel), std::string(kSocialLabel)}) {
    throw Error(errc::kSchemaMismatch, "mode classifier labels must be {medical, social}");
  }
  return b;
}

}  // namespace groundchat
