#include "biaslens/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <tuple>
#include <unordered_set>

#include "biaslens/corpus.hpp"
#include "biaslens/error.hpp"
#include "biaslens/io.hpp"
#include "biaslens/metrics.hpp"
#include "biaslens/splitter.hpp"
#include "biaslens/text.hpp"

namespace biaslens::cli {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

// Operational failure with a message for the error stream.
class CommandError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

ordered_json PipelineConfig::to_json() const {
  ordered_json j;
  j["paths"] = {{"articles", paths.articles.string()}, {"labeled", paths.labeled.string()},
                {"cache", paths.cache.string()},       {"folds", paths.folds.string()},
                {"model", paths.model.string()},       {"reports", paths.reports.string()}};
  j["llm"] = {{"endpoint_url", llm.endpoint_url},
              {"model_id", llm.model_id},
              {"temperature", llm.temperature},
              {"timeout_seconds", llm.timeout_seconds},
              {"max_retries", llm.max_retries},
              {"max_reprompts", llm.max_reprompts},
              {"concurrency_limit", llm.concurrency_limit},
              {"backoff_base_seconds", llm.backoff_base_seconds}};
  j["train"] = train.to_json();
  j["k"] = k;
  j["seed"] = seed;
  j["test_fold"] = test_fold;
  j["val_fold"] = val_fold;
  j["allow_other_domain"] = allow_other_domain;
  j["top_k"] = top_k;
  return j;
}

void PipelineConfig::merge_json(const json& j) {
  if (!j.is_object()) throw ValidationError("config must be a JSON object");
  if (auto p = j.find("paths"); p != j.end()) {
    auto path = [&](const char* key, fs::path& target) {
      if (p->contains(key)) target = (*p)[key].get<std::string>();
    };
    path("articles", paths.articles);
    path("labeled", paths.labeled);
    path("cache", paths.cache);
    path("folds", paths.folds);
    path("model", paths.model);
    path("reports", paths.reports);
  }
  if (auto l = j.find("llm"); l != j.end()) {
    llm.endpoint_url = l->value("endpoint_url", llm.endpoint_url);
    llm.model_id = l->value("model_id", llm.model_id);
    llm.temperature = l->value("temperature", llm.temperature);
    llm.timeout_seconds = l->value("timeout_seconds", llm.timeout_seconds);
    llm.max_retries = l->value("max_retries", llm.max_retries);
    llm.max_reprompts = l->value("max_reprompts", llm.max_reprompts);
    llm.concurrency_limit = l->value("concurrency_limit", llm.concurrency_limit);
    llm.backoff_base_seconds = l->value("backoff_base_seconds", llm.backoff_base_seconds);
  }
  if (auto t = j.find("train"); t != j.end()) train.merge_json(*t);
  k = j.value("k", k);
  seed = j.value("seed", seed);
  if (!j.contains("train") || !j["train"].contains("seed")) train.seed = seed;
  test_fold = j.value("test_fold", test_fold);
  val_fold = j.value("val_fold", val_fold);
  allow_other_domain = j.value("allow_other_domain", allow_other_domain);
  top_k = j.value("top_k", top_k);
}

namespace {

struct Flags {
  std::optional<std::string> config, articles, labeled, out, folds, model, cache, format, stopwords,
      name, endpoint, model_id, schema, prompt_template;
  std::vector<std::string> evals;
  std::optional<int> k, test_fold, val_fold, concurrency, epochs, batch_size, max_retries,
      max_reprompts;
  std::optional<std::uint64_t> seed;
  std::optional<double> threshold, temperature, timeout, lr, weight_decay, w_max;
  std::optional<std::size_t> feature_dim, top_k;
  bool allow_other_domain = false;
};

struct Context {
  PipelineConfig config;
  const Flags& flags;
  std::ostream& out;
  std::ostream& err;
};

PipelineConfig effective_config(const Flags& f) {
  PipelineConfig c;
  if (f.config) {
    const json j = json::parse(io::read_file(*f.config), nullptr, false);
    if (j.is_discarded()) throw CommandError("config " + *f.config + " is not valid JSON");
    c.merge_json(j);
  }
  if (f.articles) c.paths.articles = *f.articles;
  if (f.labeled) c.paths.labeled = *f.labeled;
  if (f.folds) c.paths.folds = *f.folds;
  if (f.model) c.paths.model = *f.model;
  if (f.cache) c.paths.cache = *f.cache;
  if (f.k) c.k = *f.k;
  if (f.seed) {
    c.seed = *f.seed;
    c.train.seed = *f.seed;
  }
  if (f.test_fold) c.test_fold = *f.test_fold;
  if (f.val_fold) c.val_fold = *f.val_fold;
  if (f.endpoint) c.llm.endpoint_url = *f.endpoint;
  if (f.model_id) c.llm.model_id = *f.model_id;
  if (f.concurrency) c.llm.concurrency_limit = *f.concurrency;
  if (f.temperature) c.llm.temperature = *f.temperature;
  if (f.timeout) c.llm.timeout_seconds = *f.timeout;
  if (f.max_retries) c.llm.max_retries = *f.max_retries;
  if (f.max_reprompts) c.llm.max_reprompts = *f.max_reprompts;
  if (f.threshold) c.train.threshold = *f.threshold;
  if (f.lr) c.train.lr0 = *f.lr;
  if (f.epochs) c.train.epochs = *f.epochs;
  if (f.batch_size) c.train.batch_size = *f.batch_size;
  if (f.feature_dim) c.train.feature_dim = *f.feature_dim;
  if (f.weight_decay) c.train.weight_decay = *f.weight_decay;
  if (f.w_max) c.train.w_max = *f.w_max;
  if (f.top_k) c.top_k = *f.top_k;
  if (f.allow_other_domain) c.allow_other_domain = true;
  c.llm.cache_path = c.paths.cache;
  return c;
}

fs::path output_path(const Context& ctx, const fs::path& fallback) {
  return ctx.flags.out ? fs::path(*ctx.flags.out) : fallback;
}

std::string seed_header(std::string_view command, std::uint64_t seed) {
  return "# biaslens " + std::string(command) + " seed=" + std::to_string(seed) + "\n";
}

void write_manifest(const Context& ctx, std::string_view command, const fs::path& output,
                    const ordered_json& inputs, const ordered_json& summary) {
  ordered_json m;
  m["command"] = command;
  m["seed"] = ctx.config.seed;
  m["inputs"] = inputs;
  m["output"] = output.string();
  m["summary"] = summary;
  m["effective_config"] = ctx.config.to_json();
  fs::path path = output;
  path += ".manifest.json";
  io::write_file_atomic(path, m.dump(2) + "\n");
}

corpus::LoadOptions load_options(const Context& ctx) {
  return {ctx.config.allow_other_domain};
}

std::vector<trainer::Example> featurize_all(const std::vector<corpus::LabeledArticle>& data,
                                            std::size_t dim, std::size_t max_body_chars) {
  std::vector<trainer::Example> out;
  out.reserve(data.size());
  for (const auto& la : data) {
    out.push_back({trainer::featurize_article(la.article.title, la.article.body, dim, max_body_chars),
                   la.labels});
  }
  return out;
}

splitter::FoldAssignment load_folds(const Context& ctx, std::size_t expected) {
  auto folds = splitter::parse_folds_csv(io::read_file(ctx.config.paths.folds));
  if (folds.fold_of.size() != expected) {
    throw CommandError("fold file has " + std::to_string(folds.fold_of.size()) +
                       " rows but the labeled file has " + std::to_string(expected));
  }
  return folds;
}

int cmd_ingest(Context& ctx) {
  const auto format = corpus::parse_format(ctx.flags.format.value_or("jsonl"));
  if (!format) throw CommandError("--format must be jsonl or csv for ingest");
  const auto articles =
      corpus::load_articles(ctx.config.paths.articles, *format, load_options(ctx));
  const fs::path out = output_path(ctx, "out/articles.jsonl");
  io::write_file_atomic(out, corpus::serialize_articles_jsonl(articles));
  write_manifest(ctx, "ingest", out, {{"articles", ctx.config.paths.articles.string()}},
                 {{"articles", articles.size()}});
  ctx.out << "ingest: " << articles.size() << " articles -> " << out.string() << "\n";
  return kExitOk;
}

int cmd_annotate(Context& ctx) {
  const char* key = std::getenv(kApiKeyEnv);
  if (key == nullptr || std::string_view(key).empty()) {
    throw CommandError(std::string(kApiKeyEnv) + " is not set; export it before running annotate");
  }
  const auto articles = corpus::load_articles(ctx.config.paths.articles, corpus::Format::kJsonl,
                                              load_options(ctx));
  const annotator::AnnotationSchema schema =
      ctx.flags.schema
          ? annotator::AnnotationSchema::from_json(json::parse(io::read_file(*ctx.flags.schema)))
          : annotator::AnnotationSchema::default_schema();
  std::optional<annotator::PromptTemplate> tmpl;
  if (ctx.flags.prompt_template) {
    tmpl = annotator::PromptTemplate::parse(io::read_file(*ctx.flags.prompt_template));
  }
  annotator::AnnotateHooks hooks;
  if (tmpl) hooks.prompt = &*tmpl;

  HttpChatClient client(ctx.config.llm.endpoint_url, key, ctx.config.llm.timeout_seconds);
  const auto batch = annotator::annotate_batch(articles, schema, ctx.config.llm, client, hooks);
  const auto labeled = annotator::to_labeled(articles, batch.results, ctx.config.llm.model_id);

  for (const auto& r : batch.results) {
    if (r.status != annotator::AnnotationStatus::kOk) {
      ctx.err << "annotate: " << r.article_id << " " << annotator::status_name(r.status) << " after "
              << r.attempts << " attempts: " << r.error << "\n";
    }
  }
  const fs::path out = output_path(ctx, ctx.config.paths.labeled);
  io::write_file_atomic(out, corpus::serialize_labeled_jsonl(labeled));
  const auto& s = batch.summary;
  write_manifest(ctx, "annotate", out,
                 {{"articles", ctx.config.paths.articles.string()},
                  {"cache", ctx.config.paths.cache.string()}},
                 {{"ok", s.ok}, {"parse_failed", s.parse_failed},
                  {"transport_failed", s.transport_failed}});
  ctx.out << "annotate: " << articles.size() << " articles, ok=" << s.ok
          << " parse_failed=" << s.parse_failed << " transport_failed=" << s.transport_failed
          << " cache_hits=" << s.cache_hits << " -> " << out.string() << "\n";
  return kExitOk;
}

int cmd_filter(Context& ctx) {
  const auto data = corpus::load_labeled(ctx.config.paths.labeled, load_options(ctx));
  const auto kept = corpus::filter_labeled(data);
  const fs::path out = output_path(ctx, "out/filtered.jsonl");
  io::write_file_atomic(out, corpus::serialize_labeled_jsonl(kept));
  write_manifest(ctx, "filter", out, {{"labeled", ctx.config.paths.labeled.string()}},
                 {{"input", data.size()}, {"kept", kept.size()}});
  ctx.out << "filter: kept " << kept.size() << " of " << data.size() << " -> " << out.string()
          << "\n";
  return kExitOk;
}

int cmd_stats(Context& ctx) {
  const auto data = corpus::load_labeled(ctx.config.paths.labeled, load_options(ctx));
  const auto report = corpus::dataset_stats(data);
  const fs::path out = output_path(ctx, ctx.config.paths.reports / "stats.csv");
  io::write_file_atomic(out, seed_header("stats", ctx.config.seed) + corpus::render_stats_csv(report));
  write_manifest(ctx, "stats", out, {{"labeled", ctx.config.paths.labeled.string()}},
                 {{"total", report.total}});
  ctx.out << "stats: " << report.total << " examples -> " << out.string() << "\n";
  return kExitOk;
}

int cmd_tokens(Context& ctx) {
  std::vector<corpus::Article> articles;
  std::string input;
  if (ctx.flags.labeled) {
    input = ctx.config.paths.labeled.string();
    for (auto& la : corpus::load_labeled(ctx.config.paths.labeled, load_options(ctx))) {
      articles.push_back(std::move(la.article));
    }
  } else {
    input = ctx.config.paths.articles.string();
    articles = corpus::load_articles(ctx.config.paths.articles, corpus::Format::kJsonl,
                                     load_options(ctx));
  }
  std::unordered_set<std::string> stopwords;
  if (ctx.flags.stopwords) {
    for (auto line : io::split_lines(io::read_file(*ctx.flags.stopwords))) {
      for (auto& tok : text::tokenize(line)) stopwords.insert(std::move(tok));
    }
  }
  if (ctx.config.top_k < 1) throw CommandError("--top-k must be >= 1");
  const auto freqs = corpus::token_frequencies(articles, ctx.config.top_k, stopwords);
  const fs::path out = output_path(ctx, ctx.config.paths.reports / "tokens.csv");
  io::write_file_atomic(out, seed_header("tokens", ctx.config.seed) + corpus::render_token_csv(freqs));
  write_manifest(ctx, "tokens", out, {{"articles", input}},
                 {{"domains", freqs.size()}, {"stopwords", stopwords.size()}});
  ctx.out << "tokens: " << articles.size() << " articles, " << freqs.size() << " domains -> "
          << out.string() << "\n";
  return kExitOk;
}

int cmd_split(Context& ctx) {
  const auto data = corpus::load_labeled(ctx.config.paths.labeled, load_options(ctx));
  splitter::LabelMatrix labels;
  for (const auto& la : data) labels.push_back(la.labels);
  if (labels.empty()) throw CommandError("labeled file is empty");
  splitter::FoldAssignment folds;
  try {
    folds = splitter::iterative_stratified_kfold(labels, ctx.config.k, ctx.config.seed);
  } catch (const std::invalid_argument& e) {
    throw CommandError(e.what());
  }
  const fs::path out = output_path(ctx, ctx.config.paths.folds);
  io::write_file_atomic(out, splitter::render_folds_csv(folds));
  const double ld = splitter::label_divergence(labels, folds);
  write_manifest(ctx, "split", out, {{"labeled", ctx.config.paths.labeled.string()}},
                 {{"examples", labels.size()}, {"k", folds.k}, {"label_divergence", ld}});
  ctx.out << "split: " << labels.size() << " examples into " << folds.k
          << " folds, label divergence " << ld << " -> " << out.string() << "\n";
  return kExitOk;
}

int cmd_train(Context& ctx) {
  const auto data = corpus::load_labeled(ctx.config.paths.labeled, load_options(ctx));
  const auto folds = load_folds(ctx, data.size());
  splitter::Splits splits;
  try {
    splits = splitter::make_splits(folds, ctx.config.test_fold, ctx.config.val_fold);
  } catch (const std::invalid_argument& e) {
    throw CommandError(e.what());
  }
  if (splits.train.empty()) throw CommandError("training split is empty");

  splitter::LabelMatrix train_labels;
  for (std::size_t i : splits.train) train_labels.push_back(data[i].labels);
  trainer::ClassWeights weights;
  try {
    weights = trainer::compute_class_weights(train_labels, ctx.config.train.w_max);
  } catch (const std::invalid_argument& e) {
    throw CommandError(std::string("training split: ") + e.what());
  }

  const auto& tc = ctx.config.train;
  tc.validate();
  const auto examples = featurize_all(data, tc.feature_dim, tc.max_body_chars);
  const auto result = trainer::train(examples, splits, weights, tc);

  const fs::path out = output_path(ctx, ctx.config.paths.model);
  trainer::save_model(out, result.model, tc);

  std::string history = seed_header("train", tc.seed) + io::csv_row({"epoch", "train_loss", "val_loss"});
  ordered_json hist_json = ordered_json::array();
  for (const auto& h : result.history) {
    char train_buf[32];
    std::snprintf(train_buf, sizeof train_buf, "%.17g", h.train_loss);
    std::string val;
    if (h.val_loss) {
      char val_buf[32];
      std::snprintf(val_buf, sizeof val_buf, "%.17g", *h.val_loss);
      val = val_buf;
    }
    history += io::csv_row({std::to_string(h.epoch), train_buf, val});
    hist_json.push_back({{"epoch", h.epoch}, {"train_loss", h.train_loss},
                         {"val_loss", h.val_loss ? json(*h.val_loss) : json(nullptr)}});
  }
  fs::path history_path = out;
  history_path += ".history.csv";
  io::write_file_atomic(history_path, history);

  ordered_json w = ordered_json::object();
  for (std::size_t l = 0; l < kNumLabels; ++l) w[std::string(kLabelKeys[l])] = weights.w[l];
  write_manifest(ctx, "train", out,
                 {{"labeled", ctx.config.paths.labeled.string()},
                  {"folds", ctx.config.paths.folds.string()}},
                 {{"train", splits.train.size()}, {"val", splits.val.size()},
                  {"test", splits.test.size()}, {"class_weights", w}, {"history", hist_json}});
  ctx.out << "train: " << splits.train.size() << " examples, " << tc.epochs
          << " epochs, final train loss " << result.history.back().train_loss << " -> "
          << out.string() << "\n";
  return kExitOk;
}

int cmd_evaluate(Context& ctx) {
  const auto data = corpus::load_labeled(ctx.config.paths.labeled, load_options(ctx));
  const auto folds = load_folds(ctx, data.size());
  const auto loaded = trainer::load_model(ctx.config.paths.model);
  std::size_t max_chars = ctx.config.train.max_body_chars;
  if (loaded.header.contains("config")) {
    max_chars = loaded.header["config"].value("max_body_chars", max_chars);
  }
  if (ctx.config.test_fold < 0 || ctx.config.test_fold >= folds.k) {
    throw CommandError("test fold out of range");
  }
  const double threshold = ctx.config.train.threshold;
  if (!(threshold > 0.0 && threshold < 1.0)) throw CommandError("threshold must be in (0,1)");

  std::vector<BiasVector> preds;
  std::vector<BiasVector> targets;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (folds.fold_of[i] != ctx.config.test_fold) continue;
    const auto x = trainer::featurize_article(data[i].article.title, data[i].article.body,
                                              loaded.model.dim, max_chars);
    preds.push_back(trainer::predict(loaded.model, x, threshold));
    targets.push_back(data[i].labels);
  }
  if (preds.empty()) throw CommandError("test fold is empty");
  const auto counts = metrics::confusion(preds, targets);
  const auto report = metrics::prf1(counts);

  const std::string name = ctx.flags.name.value_or("linear");
  ordered_json j;
  j["model"] = name;
  j["seed"] = ctx.config.seed;
  j["threshold"] = threshold;
  j["test_fold"] = ctx.config.test_fold;
  j["confusion"] = metrics::to_json(counts);
  j["report"] = metrics::to_json(report);
  const fs::path out = output_path(ctx, ctx.config.paths.reports / "eval.json");
  io::write_file_atomic(out, j.dump(2) + "\n");
  write_manifest(ctx, "evaluate", out,
                 {{"labeled", ctx.config.paths.labeled.string()},
                  {"folds", ctx.config.paths.folds.string()},
                  {"model", ctx.config.paths.model.string()}},
                 {{"examples", preds.size()}, {"macro_f1_extension", report.macro.f1}});
  ctx.out << "evaluate: " << preds.size() << " test examples, macro F1 " << report.macro.f1
          << " -> " << out.string() << "\n";
  return kExitOk;
}

int cmd_report(Context& ctx) {
  if (ctx.flags.evals.empty()) throw CommandError("report needs at least one --eval file");
  const std::string fmt = ctx.flags.format.value_or("text");
  if (fmt != "text" && fmt != "csv") throw CommandError("--format must be text or csv for report");

  std::map<std::string, metrics::EvalReport> reports;
  std::string seeds;
  for (const auto& path : ctx.flags.evals) {
    const json j = json::parse(io::read_file(path), nullptr, false);
    if (j.is_discarded() || !j.contains("confusion")) {
      throw CommandError(path + " is not an evaluation file");
    }
    std::string name = j.value("model", fs::path(path).stem().string());
    for (int n = 2; reports.contains(name); ++n) name = j.value("model", "model") + "#" + std::to_string(n);
    reports.emplace(name, metrics::prf1(metrics::confusion_from_json(j["confusion"])));
    if (!seeds.empty()) seeds += ",";
    seeds += std::to_string(j.value("seed", std::uint64_t{0}));
  }
  const auto format = fmt == "csv" ? metrics::ReportFormat::kCsv : metrics::ReportFormat::kText;
  const std::string body = "# biaslens report seed=" + seeds + "\n" + metrics::render_report(reports, format);
  if (ctx.flags.out) {
    const fs::path out = *ctx.flags.out;
    io::write_file_atomic(out, body);
    write_manifest(ctx, "report", out, {{"eval", ctx.flags.evals}}, {{"models", reports.size()}});
    ctx.out << "report: " << reports.size() << " models -> " << out.string() << "\n";
  } else {
    ctx.out << body;
  }
  return kExitOk;
}

}  // namespace

int run_cli(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"biaslens: media-bias annotation, dataset and classifier pipeline", "biaslens"};
  app.require_subcommand(1);
  app.fallthrough();

  Flags f;
  app.add_option("--config", f.config, "JSON config file; flags override its values");
  app.add_option("--articles", f.articles, "articles file (JSONL, or CSV for ingest)");
  app.add_option("--labeled", f.labeled, "labeled JSONL file");
  app.add_option("--out", f.out, "output path");
  app.add_option("--folds", f.folds, "fold CSV file");
  app.add_option("--model", f.model, "model file");
  app.add_option("--cache", f.cache, "annotation cache JSONL");
  app.add_option("--eval", f.evals, "evaluation JSON files (report)");
  app.add_option("--format", f.format, "jsonl|csv for ingest, text|csv for report")
      ->check(CLI::IsMember({"jsonl", "csv", "text"}));
  app.add_option("--k", f.k, "number of folds")->check(CLI::PositiveNumber);
  app.add_option("--seed", f.seed, "seed for splitting and training");
  app.add_option("--test-fold", f.test_fold, "fold held out for testing");
  app.add_option("--val-fold", f.val_fold, "fold used for validation");
  app.add_option("--endpoint", f.endpoint, "chat-completion endpoint URL");
  app.add_option("--model-id", f.model_id, "LLM model id");
  app.add_option("--concurrency", f.concurrency, "max in-flight LLM requests")->check(CLI::PositiveNumber);
  app.add_option("--threshold", f.threshold, "decision threshold")->check(CLI::Range(0.0, 1.0));
  app.add_option("--temperature", f.temperature, "LLM temperature")->check(CLI::Range(0.0, 1.0));
  app.add_option("--timeout", f.timeout, "LLM request timeout in seconds");
  app.add_option("--max-retries", f.max_retries, "transport retries per request");
  app.add_option("--max-reprompts", f.max_reprompts, "format reminders per article");
  app.add_option("--lr", f.lr, "initial learning rate");
  app.add_option("--epochs", f.epochs, "training epochs");
  app.add_option("--batch-size", f.batch_size, "mini-batch size");
  app.add_option("--feature-dim", f.feature_dim, "hashed feature dimension");
  app.add_option("--weight-decay", f.weight_decay, "decoupled weight decay");
  app.add_option("--w-max", f.w_max, "class weight ceiling");
  app.add_option("--top-k", f.top_k, "tokens kept per domain");
  app.add_option("--stopwords", f.stopwords, "stopword file, one or more words per line");
  app.add_option("--name", f.name, "model name recorded by evaluate");
  app.add_option("--schema", f.schema, "annotation schema JSON");
  app.add_option("--prompt-template", f.prompt_template, "prompt template file");
  app.add_flag("--allow-other-domain", f.allow_other_domain, "accept domain \"other\"");

  using Handler = int (*)(Context&);
  const std::vector<std::tuple<const char*, const char*, Handler>> commands = {
      {"ingest", "validate and normalize an articles file", cmd_ingest},
      {"annotate", "label articles through the LLM endpoint", cmd_annotate},
      {"filter", "keep examples with at least one bias", cmd_filter},
      {"stats", "per-domain and per-label counts", cmd_stats},
      {"tokens", "per-domain token frequency tables", cmd_tokens},
      {"split", "multilabel stratified k-fold assignment", cmd_split},
      {"train", "fit the weighted multilabel linear classifier", cmd_train},
      {"evaluate", "score the model on the test fold", cmd_evaluate},
      {"report", "render per-bias precision/recall/F1 tables", cmd_report},
  };
  for (const auto& [name, help, handler] : commands) app.add_subcommand(name, help);

  std::vector<std::string> rest(args.begin() + (args.empty() ? 0 : 1), args.end());
  std::reverse(rest.begin(), rest.end());
  try {
    app.parse(rest);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    const std::string chosen = app.get_subcommands().front()->get_name();
    Context ctx{effective_config(f), f, out, err};
    for (const auto& [name, help, handler] : commands) {
      if (chosen == name) return handler(ctx);
    }
    err << "error: unknown subcommand " << chosen << "\n\n" << app.help();
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

}  // namespace biaslens::cli
