// Copyright 2026 The ProtestLens Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#include "protestlens/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "protestlens/corpus.hpp"
#include "protestlens/embeddings.hpp"
#include "protestlens/error.hpp"
#include "protestlens/eval.hpp"
#include "protestlens/features.hpp"
#include "protestlens/models.hpp"
#include "protestlens/parallel.hpp"
#include "protestlens/preprocess.hpp"
#include "protestlens/remote_embedder.hpp"
#include "protestlens/resample.hpp"

namespace protestlens::cli {

using nlohmann::json;

namespace {

struct Options {
  // Shared
  std::string task = "task1";
  std::size_t workers = 1;
  std::string input;
  std::string output;
  std::string id_field = "id";
  std::string text_field = "text";
  std::string label_field = "label";
  std::string label_map;

  // stats
  std::optional<std::size_t> short_threshold;
  bool table = false;
  std::string name;

  // clean
  std::string profile = "notclean";
  std::string stopwords;
  std::string lemmas;
  bool strip_related = false;

  // embed
  std::string provider = "static";
  std::string endpoint;
  std::string vectors;
  std::size_t dim = 0;
  std::optional<std::size_t> max_tokens;
  std::optional<std::size_t> out_positions;

  // resample
  std::size_t smote_k = 5;
  std::uint64_t seed = 42;

  // train
  std::string preset = "model1_task1";
  std::string input2;
  std::string dev;
  std::string dev2;
  std::string log;
  std::size_t epochs = 10;
  std::size_t batch = 32;
  std::optional<double> threshold;
  std::optional<double> learning_rate;
  std::string optimizer;

  // predict / evaluate / analyze
  std::string model;
  std::string predictions;
  std::string truth;
  std::string keywords;
};

std::ofstream open_output(const std::string& path) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error("cannot write " + path);
  return f;
}

// Writes text to opt.output, or to out when no path was given.
void emit(const Options& opt, std::ostream& out, const std::string& text) {
  if (opt.output.empty()) {
    out << text;
  } else {
    auto f = open_output(opt.output);
    f << text;
    if (!f) throw Error("failed writing " + opt.output);
  }
}

void require(const std::string& value, const char* flag) {
  if (value.empty()) throw ConfigError(std::string("missing required option ") + flag);
}

DatasetSchema schema_of(const Options& opt) {
  DatasetSchema s;
  s.id_field = opt.id_field;
  s.text_field = opt.text_field;
  s.label_field = opt.label_field;
  if (!opt.label_map.empty()) s.label_map = DatasetSchema::parse_label_map(opt.label_map);
  return s;
}

std::vector<std::string> split_list(const std::string& csv) {
  std::vector<std::string> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

// Optional pre-tokenised fields ("tokens", "pos") of a JSON-lines file, one
// entry per non-blank line, matching the order of load_dataset().
std::vector<std::optional<TokenSequence>> load_token_fields(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingInputError("cannot open dataset " + path);
  std::vector<std::optional<TokenSequence>> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object())
      throw ParseError(path + ": line " + std::to_string(line_no) + ": malformed JSON");
    if (!j.contains("tokens")) {
      out.emplace_back();
      continue;
    }
    try {
      TokenSequence seq;
      seq.tokens = j.at("tokens").get<std::vector<std::string>>();
      if (j.contains("pos"))
        for (const auto& p : j.at("pos")) seq.pos.push_back(parse_pos(p.get<std::string>()));
      if (seq.has_pos() && seq.pos.size() != seq.tokens.size())
        throw ParseError("tokens and pos differ in length");
      out.push_back(std::move(seq));
    } catch (const std::exception& e) {
      throw ParseError(path + ": line " + std::to_string(line_no) + ": bad tokens field: " + e.what());
    }
  }
  return out;
}

json labels_json(const std::optional<int>& label) { return label ? json(*label) : json(nullptr); }

Task task_of(const Options& opt) { return parse_task(opt.task); }

Head head_of(const Options& opt) { return task_of(opt) == Task::Task1 ? Head::Task1 : Head::Task2; }

// ---------------------------------------------------------------------------

int cmd_stats(const Options& opt, std::ostream& out) {
  require(opt.input, "--input");
  const Dataset data = load_dataset(opt.input, schema_of(opt));
  const std::size_t threshold =
      opt.short_threshold.value_or(task_of(opt) == Task::Task1 ? 100 : 10);
  const CorpusStats stats = corpus_stats(data, threshold, StopwordList::english(), opt.workers);
  if (opt.table) {
    const std::string name = opt.name.empty() ? std::filesystem::path(opt.input).stem().string() : opt.name;
    emit(opt, out, format_stats_table({{name, stats}}));
  } else {
    json j = to_json(stats);
    j["short_threshold"] = threshold;
    emit(opt, out, j.dump(2) + "\n");
  }
  return kOk;
}

int cmd_clean(const Options& opt, std::ostream& out) {
  require(opt.input, "--input");
  const Dataset data = load_dataset(opt.input, schema_of(opt));
  const CleanProfile profile = CleanProfile::from_name(parse_profile(opt.profile));
  const StopwordList stopwords =
      opt.stopwords.empty() ? StopwordList::english() : StopwordList::load(opt.stopwords);
  const Lemmatizer lemmatizer =
      opt.lemmas.empty() ? Lemmatizer::english() : Lemmatizer::load(opt.lemmas);
  const RelatedTitleStripper stripper(default_related_markers());

  std::vector<TokenSequence> cleaned(data.size());
  parallel_for(data.size(), opt.workers, [&](std::size_t i) {
    const std::string text = opt.strip_related ? stripper.strip(data[i].text) : data[i].text;
    cleaned[i] = apply_profile(tokenize(text), profile, stopwords, lemmatizer);
  });

  std::string body;
  for (std::size_t i = 0; i < data.size(); ++i) {
    std::vector<std::string> pos;
    for (Pos p : cleaned[i].pos) pos.emplace_back(pos_name(p));
    std::string text;
    for (const auto& t : cleaned[i].tokens) text += (text.empty() ? "" : " ") + t;
    json j = {{"id", data[i].id},
              {"text", text},
              {"label", labels_json(data[i].label)},
              {"tokens", cleaned[i].tokens},
              {"pos", pos}};
    body += j.dump() + "\n";
  }
  emit(opt, out, body);
  return kOk;
}

int cmd_embed(const Options& opt, std::ostream& /*out*/) {
  require(opt.input, "--input");
  require(opt.output, "--output");
  const Dataset data = load_dataset(opt.input, schema_of(opt));
  const auto token_fields = load_token_fields(opt.input);
  const Provider provider = parse_provider(opt.provider);

  std::vector<TokenSequence> seqs(data.size());
  for (std::size_t i = 0; i < data.size(); ++i)
    seqs[i] = token_fields[i] ? *token_fields[i] : tokenize(data[i].text);

  FeatureMatrix features;
  std::vector<EmbeddedSequence> embedded(data.size());
  EmbedConfig cfg;
  if (provider == Provider::Static) {
    require(opt.vectors, "--vectors");
    const VectorTable table = VectorTable::load(opt.vectors);
    if (opt.dim != 0 && opt.dim != table.dim())
      throw ConfigError("--dim " + std::to_string(opt.dim) + " does not match vector table dim " +
                        std::to_string(table.dim()));
    cfg = EmbedConfig::for_task(task_of(opt), table.dim(), provider);
    if (opt.max_tokens) cfg.max_tokens = *opt.max_tokens;
    if (opt.out_positions) cfg.out_positions = *opt.out_positions;
    cfg.validate();
    parallel_for(data.size(), opt.workers, [&](std::size_t i) {
      embedded[i] = embed_static(pad_or_truncate(seqs[i], cfg.max_tokens), table, cfg);
    });
  } else {
    const char* env = std::getenv("PROTESTLENS_ENDPOINT");
    const std::string endpoint = !opt.endpoint.empty() ? opt.endpoint : (env ? env : "");
    if (endpoint.empty())
      throw ConfigError("remote provider needs --endpoint or PROTESTLENS_ENDPOINT");
    if (opt.dim == 0) throw ConfigError("remote provider needs --dim");
    cfg = EmbedConfig::for_task(task_of(opt), opt.dim, provider);
    if (opt.max_tokens) cfg.max_tokens = *opt.max_tokens;
    if (opt.out_positions) cfg.out_positions = *opt.out_positions;
    cfg.validate();
    RemoteEmbedder::Options ro;
    ro.max_concurrency = std::max<std::size_t>(1, opt.workers);
    if (!data.empty()) embedded = RemoteEmbedder(endpoint, ro).embed(seqs, cfg);
  }

  features.positions = cfg.out_positions;
  features.dim = cfg.dim;
  features.rows.resize(0, static_cast<Eigen::Index>(features.width()));
  for (std::size_t i = 0; i < data.size(); ++i)
    features.append(data[i].id, data[i].label.value_or(kUnlabeled), embedded[i]);
  write_features(opt.output, features);
  return kOk;
}

int cmd_resample(const Options& opt, std::ostream& /*out*/) {
  require(opt.input, "--input");
  require(opt.output, "--output");
  const FeatureMatrix data = read_features(opt.input);
  if (opt.smote_k == 0) throw ConfigError("--smote-k must be positive");
  write_features(opt.output, smote(data, opt.smote_k, opt.seed));
  return kOk;
}

int cmd_train(const Options& opt, std::ostream& out) {
  require(opt.input, "--input");
  require(opt.output, "--output");
  const Preset preset = parse_preset(opt.preset);
  const FeatureMatrix train1 = read_features(opt.input);
  std::optional<FeatureMatrix> train2, dev1, dev2;
  if (!opt.dev.empty()) dev1 = read_features(opt.dev);

  ModelSpec spec = ModelSpec::for_preset(preset, train1.dim);
  if (!opt.optimizer.empty()) {
    const auto kind = nn::parse_optimizer(opt.optimizer);
    spec.optimizer = kind == nn::OptimizerKind::Adam ? nn::OptimizerConfig::adam()
                                                     : nn::OptimizerConfig::rmsprop();
  }
  if (opt.learning_rate) spec.optimizer.learning_rate = *opt.learning_rate;
  spec.epochs = opt.epochs;
  spec.batch = opt.batch;
  spec.seed = opt.seed;
  spec.workers = opt.workers;
  if (opt.threshold) spec.threshold = *opt.threshold;

  if (preset == Preset::Model2Multitask) {
    require(opt.input2, "--input2");
    train2 = read_features(opt.input2);
    if (!opt.dev2.empty()) dev2 = read_features(opt.dev2);
    if (train2->dim != train1.dim)
      throw ConfigError("task 1 and task 2 features differ in embedding dimension");
    spec.positions_task1 = train1.positions;
    spec.positions_task2 = train2->positions;
  } else if (preset == Preset::Model1Task1) {
    spec.positions_task1 = train1.positions;
  } else {
    spec.positions_task2 = train1.positions;
  }

  Model model(spec);
  std::string log;
  const EpochCallback on_epoch = [&](const EpochRecord& r, const Model&) {
    json line = {{"epoch", r.epoch}, {"loss", r.loss}};
    line["dev_macro_f1"] = r.dev_macro_f1 ? json(*r.dev_macro_f1) : json(nullptr);
    log += line.dump() + "\n";
    return true;
  };
  try {
    if (preset == Preset::Model2Multitask)
      train_multitask(model, train1, *train2, dev1 ? &*dev1 : nullptr, dev2 ? &*dev2 : nullptr, on_epoch);
    else
      train(model, train1, dev1 ? &*dev1 : nullptr, on_epoch);
  } catch (...) {
    if (!opt.log.empty()) open_output(opt.log) << log;
    throw;
  }
  save_checkpoint(opt.output, model);
  if (!opt.log.empty()) {
    auto f = open_output(opt.log);
    f << log;
  } else {
    out << log;
  }
  return kOk;
}

int cmd_predict(const Options& opt, std::ostream& out) {
  require(opt.model, "--model");
  require(opt.input, "--input");
  const Model model = load_checkpoint(opt.model);
  const FeatureMatrix data = read_features(opt.input);
  const double threshold = opt.threshold.value_or(model.spec().threshold);
  if (!(threshold > 0.0 && threshold < 1.0))
    throw ConfigError("--threshold must lie strictly between 0 and 1");
  const std::optional<Head> head =
      model.spec().multitask() ? std::optional<Head>(head_of(opt)) : std::nullopt;
  const auto probs = model.predict_proba(data, head, opt.workers);
  std::string body;
  for (std::size_t i = 0; i < data.size(); ++i) {
    json j = {{"id", data.ids[i]}, {"probability", probs[i]}, {"label", classify(probs[i], threshold)}};
    body += j.dump() + "\n";
  }
  emit(opt, out, body);
  return kOk;
}

// Predicted labels keyed by id; every truth id must be present.
std::vector<int> aligned_predictions(const std::string& path, const Dataset& truth) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingInputError("cannot open predictions " + path);
  std::map<std::string, int, std::less<>> by_id;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("id") || !j.contains("label"))
      throw ParseError(path + ": line " + std::to_string(line_no) +
                       ": expected an object with id and label");
    const std::string id = j["id"].is_string() ? j["id"].get<std::string>() : j["id"].dump();
    if (!j["label"].is_number_integer())
      throw ParseError(path + ": line " + std::to_string(line_no) + ": label must be 0 or 1");
    if (!by_id.emplace(id, j["label"].get<int>()).second)
      throw ParseError(path + ": line " + std::to_string(line_no) + ": duplicate id '" + id + "'");
  }
  std::vector<int> preds;
  for (const auto& ex : truth) {
    auto it = by_id.find(ex.id);
    if (it == by_id.end()) throw DomainError("no prediction for id '" + ex.id + "'");
    preds.push_back(it->second);
  }
  return preds;
}

std::vector<int> truth_labels(const Dataset& truth) {
  std::vector<int> labels;
  for (const auto& ex : truth) {
    if (!ex.label) throw DomainError("truth example '" + ex.id + "' has no label");
    labels.push_back(*ex.label);
  }
  return labels;
}

int cmd_evaluate(const Options& opt, std::ostream& out) {
  require(opt.truth, "--truth");
  require(opt.predictions, "--predictions");
  const Dataset truth = load_dataset(opt.truth, schema_of(opt));
  const auto preds = aligned_predictions(opt.predictions, truth);
  const MetricsReport report = metrics_report(confusion_matrix(truth_labels(truth), preds));
  if (opt.table) {
    const std::string name = opt.name.empty() ? std::filesystem::path(opt.truth).stem().string() : opt.name;
    emit(opt, out, format_metrics_table({{name, report}}) + "\n" + render_confusion(report));
  } else {
    emit(opt, out, to_json(report).dump(2) + "\n");
  }
  return kOk;
}

int cmd_analyze(const Options& opt, std::ostream& out) {
  require(opt.truth, "--truth");
  require(opt.predictions, "--predictions");
  const Dataset truth = load_dataset(opt.truth, schema_of(opt));
  const auto preds = aligned_predictions(opt.predictions, truth);
  const auto keywords = opt.keywords.empty() ? default_error_keywords() : split_list(opt.keywords);
  emit(opt, out, to_json(error_analysis(truth, preds, keywords)).dump(2) + "\n");
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options opt;
  CLI::App app{"ProtestLens: protest news classification pipeline", "protestlens"};
  app.require_subcommand(1);
  app.set_config("--config", "", "TOML/INI file with option defaults; flags override it");

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--task", opt.task, "task1 (documents) or task2 (sentences)")
        ->check(CLI::IsMember({"task1", "task2"}));
    sub->add_option("--workers", opt.workers, "worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--output,-o", opt.output, "output file (stdout when omitted)");
  };
  auto add_schema = [&](CLI::App* sub) {
    sub->add_option("--id-field", opt.id_field, "JSON field holding the example id");
    sub->add_option("--text-field", opt.text_field, "JSON field holding the text");
    sub->add_option("--label-field", opt.label_field, "JSON field holding the label");
    sub->add_option("--label-map", opt.label_map, "extra label strings, e.g. yes=1,no=0");
  };

  auto* stats = app.add_subcommand("stats", "corpus statistics as JSON or a text table");
  add_common(stats);
  add_schema(stats);
  stats->add_option("--input,-i", opt.input, "dataset (JSON lines)");
  stats->add_option("--short-threshold", opt.short_threshold,
                    "token count below which a text is short (100 for task1, 10 for task2)");
  stats->add_flag("--table", opt.table, "print a text table instead of JSON");
  stats->add_option("--name", opt.name, "row label for --table");

  auto* clean = app.add_subcommand("clean", "tokenise and clean a dataset");
  add_common(clean);
  add_schema(clean);
  clean->add_option("--input,-i", opt.input, "dataset (JSON lines)");
  clean->add_option("--profile", opt.profile, "cleaning profile")
      ->check(CLI::IsMember({"notclean", "lightclean", "clean"}));
  clean->add_option("--stopwords", opt.stopwords, "stopword list (one per line)");
  clean->add_option("--lemmas", opt.lemmas, "lemma exception table (TSV)");
  clean->add_flag("--strip-related", opt.strip_related, "cut appended related-article titles");

  auto* embed = app.add_subcommand("embed", "embed a dataset into a feature matrix");
  add_common(embed);
  add_schema(embed);
  embed->add_option("--input,-i", opt.input, "dataset or cleaned dataset (JSON lines)");
  embed->add_option("--provider", opt.provider, "embedding provider")
      ->check(CLI::IsMember({"static", "remote"}));
  embed->add_option("--vectors", opt.vectors, "static vector table");
  embed->add_option("--endpoint", opt.endpoint, "embedding service URL (default PROTESTLENS_ENDPOINT)");
  embed->add_option("--dim", opt.dim, "embedding dimension");
  embed->add_option("--max-tokens", opt.max_tokens, "override the input length");
  embed->add_option("--out-positions", opt.out_positions, "override the pooled length");

  auto* resample = app.add_subcommand("resample", "balance a feature matrix with SMOTE");
  add_common(resample);
  resample->add_option("--input,-i", opt.input, "feature file");
  resample->add_option("--smote-k", opt.smote_k, "nearest neighbours per seed row");
  resample->add_option("--seed", opt.seed, "random seed");

  auto* trainc = app.add_subcommand("train", "train a model preset");
  add_common(trainc);
  trainc->add_option("--input,-i", opt.input, "training features (task 1 for model2_multitask)");
  trainc->add_option("--input2", opt.input2, "task 2 training features (model2_multitask)");
  trainc->add_option("--dev", opt.dev, "dev features (task 1 for model2_multitask)");
  trainc->add_option("--dev2", opt.dev2, "task 2 dev features (model2_multitask)");
  trainc->add_option("--preset", opt.preset, "model preset")
      ->check(CLI::IsMember({"model1_task1", "model1_task2", "model2_multitask"}));
  trainc->add_option("--epochs", opt.epochs, "training epochs");
  trainc->add_option("--batch", opt.batch, "mini-batch size")->check(CLI::PositiveNumber);
  trainc->add_option("--seed", opt.seed, "random seed");
  trainc->add_option("--threshold", opt.threshold, "decision threshold");
  trainc->add_option("--lr", opt.learning_rate, "learning rate");
  trainc->add_option("--optimizer", opt.optimizer, "adam or rmsprop (preset default otherwise)")
      ->check(CLI::IsMember({"adam", "rmsprop"}));
  trainc->add_option("--log", opt.log, "training log (JSON lines; stdout when omitted)");

  auto* predict = app.add_subcommand("predict", "per-example probabilities and labels");
  add_common(predict);
  predict->add_option("--model,-m", opt.model, "checkpoint");
  predict->add_option("--input,-i", opt.input, "feature file");
  predict->add_option("--threshold", opt.threshold, "decision threshold (checkpoint value by default)");

  auto* evaluate = app.add_subcommand("evaluate", "metrics against labelled truth");
  add_common(evaluate);
  add_schema(evaluate);
  evaluate->add_option("--truth", opt.truth, "labelled dataset (JSON lines)");
  evaluate->add_option("--predictions,-p", opt.predictions, "predictions (JSON lines with id, label)");
  evaluate->add_flag("--table", opt.table, "print a text table and confusion grid");
  evaluate->add_option("--name", opt.name, "row label for --table");

  auto* analyze = app.add_subcommand("analyze", "misclassification report");
  add_common(analyze);
  add_schema(analyze);
  analyze->add_option("--truth", opt.truth, "labelled dataset (JSON lines)");
  analyze->add_option("--predictions,-p", opt.predictions, "predictions (JSON lines with id, label)");
  analyze->add_option("--keywords", opt.keywords, "comma-separated keywords");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "protestlens: error: " << e.what() << "\n";
    return kFailure;
  }

  try {
    if (stats->parsed()) return cmd_stats(opt, out);
    if (clean->parsed()) return cmd_clean(opt, out);
    if (embed->parsed()) return cmd_embed(opt, out);
    if (resample->parsed()) return cmd_resample(opt, out);
    if (trainc->parsed()) return cmd_train(opt, out);
    if (predict->parsed()) return cmd_predict(opt, out);
    if (evaluate->parsed()) return cmd_evaluate(opt, out);
    if (analyze->parsed()) return cmd_analyze(opt, out);
  } catch (const MissingInputError& e) {
    err << "protestlens: error: " << e.what() << "\n";
    return kMissingInput;
  } catch (const DivergenceError& e) {
    err << "protestlens: error: training diverged: " << e.what() << "\n";
    return kDiverged;
  } catch (const std::exception& e) {
    err << "protestlens: error: " << e.what() << "\n";
    return kFailure;
  }
  return kFailure;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, out, err);
}

int run(const std::vector<std::string>& args) { return run(args, std::cout, std::cerr); }

}  // namespace protestlens::cli
