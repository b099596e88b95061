#include "biaslens/annotator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <random>
#include <thread>
#include <unordered_set>

#include "biaslens/digest.hpp"
#include "biaslens/error.hpp"
#include "biaslens/io.hpp"
#include "biaslens/text.hpp"

namespace biaslens::annotator {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr std::string_view kDefaultTemplate = R"([system]
You are a careful media analyst. Evaluate the news article supplied by the user for each of the bias categories defined below.

Bias categories:
{{DEFINITIONS}}

For every category, output 1 if the article exhibits that bias and 0 if it does not. Reply with exactly one line per category, in the order listed, written as the category name, a colon, and the value. Do not add explanations or any other text. Adhere strictly to this output format:
{{OUTPUT_FORMAT}}
[user]
Evaluate the following news article.

Article headline:
{{TITLE}}

Article text:
{{BODY}}
)";

std::vector<Category> default_categories() {
  return {
      {"political", "Political Bias",
       "This refers to articles that unreasonably favor or criticize a political party, "
       "ideology, or government policy."},
      {"gender", "Gender Bias",
       "This bias occurs when individuals or groups are evaluated or treated based on their "
       "gender, particularly with a focus on appearances or stereotypical roles."},
      {"entity", "Entity Bias",
       "Entity bias manifests when reporting disproportionately criticizes or praises specific "
       "individuals, corporations, or other entities, regardless of objective facts."},
      {"racial", "Racial Bias",
       "This is evident when articles favor or disfavor individuals or groups based on race, "
       "nationality, ethnicity, or culture."},
      {"religious", "Religious Bias",
       "The unfair favoring or critique of a particular religion or its followers. News articles "
       "may show religious bias by unfairly portraying certain faiths as superior or inferior, or "
       "by emphasizing the actions of specific religious groups in a misleading way."},
      {"regional", "Regional Bias",
       "This bias occurs when individuals or events are depicted unfairly based on their "
       "geographic location, often leading to unequal or skewed coverage."},
      {"sensational", "Sensational Bias",
       "The use of exaggerated or shocking headlines and content to attract attention, often at "
       "the expense of factual accuracy. This bias prioritizes emotional appeal and drama over "
       "balanced, objective reporting, potentially distorting the reader's perception of the "
       "event."},
  };
}

std::size_t count_occurrences(std::string_view hay, std::string_view needle) {
  std::size_t n = 0;
  for (auto pos = hay.find(needle); pos != std::string_view::npos;
       pos = hay.find(needle, pos + needle.size())) {
    ++n;
  }
  return n;
}

// Single pass, so placeholder-like text inside substituted values is kept
// verbatim.
std::string substitute(std::string_view tmpl,
                       const std::vector<std::pair<std::string_view, std::string_view>>& values) {
  std::string out;
  std::size_t pos = 0;
  while (pos < tmpl.size()) {
    const auto open = tmpl.find("{{", pos);
    if (open == std::string_view::npos) {
      out.append(tmpl.substr(pos));
      break;
    }
    out.append(tmpl.substr(pos, open - pos));
    const auto close = tmpl.find("}}", open + 2);
    if (close == std::string_view::npos) {
      out.append(tmpl.substr(open));
      break;
    }
    const auto name = tmpl.substr(open + 2, close - open - 2);
    auto it = std::find_if(values.begin(), values.end(),
                           [&](const auto& kv) { return kv.first == name; });
    if (it == values.end()) {
      out.append(tmpl.substr(open, close + 2 - open));
    } else {
      out.append(it->second);
    }
    pos = close + 2;
  }
  return out;
}

// Lowercased, surrounding markup stripped, inner whitespace runs collapsed.
std::string normalize_name(std::string_view s) {
  constexpr std::string_view kStrip = " \t\r\n\f\v*_`#->";
  const auto first = s.find_first_not_of(kStrip);
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(kStrip);
  s = s.substr(first, last - first + 1);
  std::string out;
  bool in_space = false;
  for (char c : s) {
    if (c == ' ' || c == '\t') {
      in_space = true;
      continue;
    }
    if (in_space && !out.empty()) out += ' ';
    in_space = false;
    out += (c >= 'A' && c <= 'Z') ? static_cast<char>(c + 32) : c;
  }
  return out;
}

std::string_view strip_value(std::string_view s) {
  constexpr std::string_view kStrip = " \t\r\n\f\v*_`";
  const auto first = s.find_first_not_of(kStrip);
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(kStrip);
  return s.substr(first, last - first + 1);
}

[[noreturn]] void parse_fail(const std::string& why, std::string_view raw) {
  throw LabelParseError(why, std::string(raw));
}

BiasVector canonical_vector(const AnnotationSchema& schema, const std::vector<int>& values) {
  BiasVector v;
  const auto& cats = schema.categories();
  for (std::size_t i = 0; i < cats.size(); ++i) {
    if (auto idx = label_index(cats[i].key)) v.set(*idx, values[i] == 1);
  }
  return v;
}

// Returns nullopt when the text holds no JSON object mentioning any category.
std::optional<BiasVector> parse_json_labels(std::string_view raw, const AnnotationSchema& schema) {
  const auto open = raw.find('{');
  const auto close = raw.rfind('}');
  if (open == std::string_view::npos || close == std::string_view::npos || close < open) {
    return std::nullopt;
  }
  const json j = json::parse(raw.substr(open, close - open + 1), nullptr, false);
  if (j.is_discarded() || !j.is_object()) return std::nullopt;
  const auto& cats = schema.categories();
  const bool mentions_any = std::any_of(cats.begin(), cats.end(),
                                        [&](const Category& c) { return j.contains(c.key); });
  if (!mentions_any) return std::nullopt;
  std::vector<int> values(cats.size(), -1);
  for (std::size_t i = 0; i < cats.size(); ++i) {
    auto it = j.find(cats[i].key);
    if (it == j.end()) parse_fail("missing category '" + cats[i].key + "'", raw);
    if (!it->is_number_integer()) {
      parse_fail("category '" + cats[i].key + "' must be integer 0 or 1", raw);
    }
    const auto value = it->get<long long>();
    if (value != 0 && value != 1) {
      parse_fail("category '" + cats[i].key + "' has value " + std::to_string(value) +
                     " outside {0,1}",
                 raw);
    }
    values[i] = static_cast<int>(value);
  }
  return canonical_vector(schema, values);
}

BiasVector parse_line_labels(std::string_view raw, const AnnotationSchema& schema) {
  const auto& cats = schema.categories();
  std::unordered_map<std::string, std::size_t> by_name;
  for (std::size_t i = 0; i < cats.size(); ++i) {
    by_name.emplace(normalize_name(cats[i].display_name), i);
  }
  std::vector<int> values(cats.size(), -1);
  std::size_t matched = 0;
  for (auto line : io::split_lines(raw)) {
    const auto colon = line.find(':');
    if (colon == std::string_view::npos) continue;
    auto it = by_name.find(normalize_name(line.substr(0, colon)));
    if (it == by_name.end()) continue;
    const std::size_t i = it->second;
    if (values[i] != -1) parse_fail("duplicate category '" + cats[i].display_name + "'", raw);
    const auto value = strip_value(line.substr(colon + 1));
    if (value != "0" && value != "1") {
      parse_fail("category '" + cats[i].display_name + "' has value '" + std::string(value) +
                     "' outside {0,1}",
                 raw);
    }
    values[i] = value == "1" ? 1 : 0;
    ++matched;
  }
  if (matched == 0) parse_fail("no label lines or JSON object found", raw);
  for (std::size_t i = 0; i < cats.size(); ++i) {
    if (values[i] == -1) parse_fail("missing category '" + cats[i].display_name + "'", raw);
  }
  return canonical_vector(schema, values);
}

std::string format_reminder(const AnnotationSchema& schema) {
  std::string s =
      "Your previous reply did not follow the required output format. Reply again with exactly "
      "one line per category, each written as \"<category>: <0 or 1>\", for these categories:\n";
  for (const auto& c : schema.categories()) s += c.display_name + "\n";
  return s;
}

bool retryable(const ChatResponse& r) { return r.status == 0 || r.status == 429 || r.status >= 500; }

}  // namespace

AnnotationSchema::AnnotationSchema(std::vector<Category> categories)
    : categories_(std::move(categories)) {
  std::unordered_set<std::string> keys;
  std::unordered_set<std::string> names;
  for (const auto& c : categories_) {
    if (c.key.empty() || c.display_name.empty() || c.definition.empty()) {
      throw ValidationError("schema category has an empty field");
    }
    if (!keys.insert(c.key).second) throw ValidationError("duplicate schema key '" + c.key + "'");
    if (!names.insert(normalize_name(c.display_name)).second) {
      throw ValidationError("duplicate schema display name '" + c.display_name + "'");
    }
  }
  for (auto key : kLabelKeys) {
    if (!keys.contains(std::string(key))) {
      throw ValidationError("schema lacks canonical category '" + std::string(key) + "'");
    }
  }
}

const AnnotationSchema& AnnotationSchema::default_schema() {
  static const AnnotationSchema schema(default_categories());
  return schema;
}

AnnotationSchema AnnotationSchema::from_json(const json& j) {
  if (!j.is_array()) throw ValidationError("schema must be a JSON array");
  std::vector<Category> cats;
  for (const auto& c : j) {
    if (!c.is_object()) throw ValidationError("schema entries must be objects");
    cats.push_back({c.value("key", ""), c.value("display_name", ""), c.value("definition", "")});
  }
  return AnnotationSchema(std::move(cats));
}

std::string_view default_template_text() { return kDefaultTemplate; }

PromptTemplate PromptTemplate::parse(std::string_view text) {
  std::string system;
  std::string user;
  std::string* section = nullptr;
  for (auto line : io::split_lines(text)) {
    if (line == "[system]") {
      section = &system;
    } else if (line == "[user]") {
      section = &user;
    } else if (section) {
      section->append(line);
      section->push_back('\n');
    } else if (!text::trim(line).empty()) {
      throw ValidationError("prompt template text before the first section header");
    }
  }
  auto expect_once = [](const std::string& s, std::string_view name, std::string_view where) {
    if (count_occurrences(s, name) != 1) {
      throw ValidationError("prompt template " + std::string(where) + " section must contain " +
                            std::string(name) + " exactly once");
    }
  };
  expect_once(system, "{{DEFINITIONS}}", "system");
  expect_once(system, "{{OUTPUT_FORMAT}}", "system");
  expect_once(user, "{{TITLE}}", "user");
  expect_once(user, "{{BODY}}", "user");
  // Drop the newline that precedes the next section header or end of file.
  for (auto* s : {&system, &user}) {
    while (!s->empty() && s->back() == '\n') s->pop_back();
  }
  return PromptTemplate(std::move(system), std::move(user));
}

const PromptTemplate& PromptTemplate::default_template() {
  static const PromptTemplate tmpl = parse(kDefaultTemplate);
  return tmpl;
}

std::string render_labels(BiasVector v, const AnnotationSchema& schema) {
  std::string out;
  for (const auto& c : schema.categories()) {
    const auto idx = label_index(c.key);
    out += c.display_name + ": " + ((idx && v[*idx]) ? "1" : "0") + "\n";
  }
  return out;
}

PromptPair build_prompt(const corpus::Article& article, const AnnotationSchema& schema,
                        const PromptTemplate& tmpl) {
  const auto title = text::trim(article.title);
  const auto body = text::trim(article.body);
  if (title.empty()) throw ValidationError("article " + article.id + ": empty title");
  if (body.empty()) throw ValidationError("article " + article.id + ": empty body");

  std::string definitions;
  std::string format;
  for (const auto& c : schema.categories()) {
    definitions += "- " + c.display_name + ": " + c.definition + "\n";
    format += c.display_name + ": <0 or 1>\n";
  }
  definitions.pop_back();
  format.pop_back();

  PromptPair p;
  p.system_text = substitute(tmpl.system_section(),
                             {{"DEFINITIONS", definitions}, {"OUTPUT_FORMAT", format}});
  p.user_text = substitute(tmpl.user_section(), {{"TITLE", title}, {"BODY", body}});
  return p;
}

BiasVector parse_labels(std::string_view raw_text, const AnnotationSchema& schema) {
  if (auto v = parse_json_labels(raw_text, schema)) return *v;
  return parse_line_labels(raw_text, schema);
}

void LlmConfig::validate() const {
  if (endpoint_url.empty()) throw ValidationError("endpoint_url is empty");
  if (model_id.empty()) throw ValidationError("model_id is empty");
  if (!(temperature >= 0.0 && temperature <= 1.0)) {
    throw ValidationError("temperature must be in [0,1]");
  }
  if (!(timeout_seconds > 0.0)) throw ValidationError("timeout must be positive");
  if (max_retries < 0) throw ValidationError("max_retries must be >= 0");
  if (max_reprompts < 0) throw ValidationError("max_reprompts must be >= 0");
  if (concurrency_limit < 1) throw ValidationError("concurrency_limit must be >= 1");
  if (!(backoff_base_seconds >= 0.0)) throw ValidationError("backoff base must be >= 0");
}

std::string_view status_name(AnnotationStatus s) {
  switch (s) {
    case AnnotationStatus::kOk:
      return "ok";
    case AnnotationStatus::kParseFailed:
      return "parse_failed";
    case AnnotationStatus::kTransportFailed:
      return "transport_failed";
  }
  return "unknown";
}

double backoff_upper_bound(double base_seconds, int retry) {
  return base_seconds * std::ldexp(1.0, retry);
}

AnnotationResult annotate_one(const corpus::Article& article, const AnnotationSchema& schema,
                              const LlmConfig& config, ChatClient& client,
                              const AnnotateHooks& hooks) {
  AnnotationResult result;
  result.article_id = article.id;

  PromptPair prompt;
  try {
    prompt = build_prompt(article, schema,
                          hooks.prompt ? *hooks.prompt : PromptTemplate::default_template());
  } catch (const std::exception& e) {
    result.status = AnnotationStatus::kParseFailed;
    result.error = e.what();
    return result;
  }

  ChatRequest request;
  request.model = config.model_id;
  request.temperature = config.temperature;
  request.messages = {{"system", prompt.system_text}, {"user", prompt.user_text}};

  // Jitter is seeded from the article id so reruns wait the same amounts.
  std::mt19937_64 rng(murmur3_32(article.id, 0x6a09e667U));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto sleep = [&](double seconds) {
    if (seconds <= 0.0) return;
    const std::chrono::duration<double> d(seconds);
    if (hooks.sleep) {
      hooks.sleep(d);
    } else {
      std::this_thread::sleep_for(d);
    }
  };

  for (int prompt_round = 0; prompt_round <= config.max_reprompts; ++prompt_round) {
    ChatResponse response;
    for (int retry = 0;; ++retry) {
      response = client.complete(request);
      ++result.attempts;
      if (response.status >= 200 && response.status < 300) break;
      if (!retryable(response) || retry >= config.max_retries) {
        result.status = AnnotationStatus::kTransportFailed;
        result.error = response.error.empty() ? "http " + std::to_string(response.status)
                                              : response.error;
        return result;
      }
      sleep(unit(rng) * backoff_upper_bound(config.backoff_base_seconds, retry));
    }

    result.raw_text = response.text;
    try {
      result.labels = parse_labels(response.text, schema);
      result.status = AnnotationStatus::kOk;
      result.error.clear();
      result.timestamp = io::utc_timestamp_now();
      return result;
    } catch (const LabelParseError& e) {
      result.error = e.what();
    }
    request.messages.push_back({"assistant", response.text});
    request.messages.push_back({"user", format_reminder(schema)});
  }
  result.status = AnnotationStatus::kParseFailed;
  return result;
}

AnnotationCache::AnnotationCache(std::filesystem::path path) : path_(std::move(path)) {
  if (!std::filesystem::exists(path_)) return;
  const std::string contents = io::read_file(path_);
  for (auto line : io::split_lines(contents)) {
    if (text::trim(line).empty()) continue;
    const json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) continue;  // torn write
    try {
      CacheRecord r;
      r.key_digest = j.at("key_digest").get<std::string>();
      r.article_id = j.at("article_id").get<std::string>();
      r.model_id = j.at("model_id").get<std::string>();
      r.raw_text = j.at("raw_text").get<std::string>();
      r.labels = corpus::labels_from_json(j.at("labels"));
      r.timestamp = j.value("timestamp", "");
      r.attempts = j.value("attempts", 1);
      records_.insert_or_assign(r.key_digest, std::move(r));
    } catch (const std::exception&) {
      continue;
    }
  }
}

std::optional<CacheRecord> AnnotationCache::find(const std::string& key_digest) const {
  std::lock_guard lock(mu_);
  auto it = records_.find(key_digest);
  if (it == records_.end()) return std::nullopt;
  return it->second;
}

void AnnotationCache::append(const CacheRecord& record) {
  ordered_json j;
  j["key_digest"] = record.key_digest;
  j["article_id"] = record.article_id;
  j["model_id"] = record.model_id;
  j["raw_text"] = record.raw_text;
  j["labels"] = corpus::to_json(record.labels);
  j["timestamp"] = record.timestamp;
  j["attempts"] = record.attempts;
  const std::string line = j.dump() + "\n";

  std::lock_guard lock(mu_);
  if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
  {
    std::ofstream out(path_, std::ios::binary | std::ios::app);
    if (!out) throw IoError("cannot open cache " + path_.string());
    out.write(line.data(), static_cast<std::streamsize>(line.size()));
    out.flush();
    if (!out) throw IoError("cache write failed: " + path_.string());
  }
  records_.insert_or_assign(record.key_digest, record);
}

std::size_t AnnotationCache::size() const {
  std::lock_guard lock(mu_);
  return records_.size();
}

std::string AnnotationCache::key_for(std::string_view article_id, const PromptPair& prompt,
                                     std::string_view model_id) {
  std::string material;
  for (std::string_view part : {article_id, std::string_view(prompt.system_text),
                                std::string_view(prompt.user_text), model_id}) {
    material += std::to_string(part.size());
    material += ':';
    material += part;
  }
  return sha256_hex(material);
}

BatchResult annotate_batch(const std::vector<corpus::Article>& articles,
                           const AnnotationSchema& schema, const LlmConfig& config,
                           ChatClient& client, const AnnotateHooks& hooks) {
  config.validate();
  std::optional<AnnotationCache> cache;
  if (!config.cache_path.empty()) cache.emplace(config.cache_path);
  const PromptTemplate& tmpl = hooks.prompt ? *hooks.prompt : PromptTemplate::default_template();

  BatchResult batch;
  batch.results.resize(articles.size());
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> cache_hits{0};

  auto work = [&] {
    for (std::size_t i = next.fetch_add(1); i < articles.size(); i = next.fetch_add(1)) {
      const auto& article = articles[i];
      std::string key;
      if (cache) {
        try {
          key = AnnotationCache::key_for(article.id, build_prompt(article, schema, tmpl),
                                         config.model_id);
        } catch (const std::exception&) {
          key.clear();
        }
        if (!key.empty()) {
          if (auto hit = cache->find(key)) {
            AnnotationResult r;
            r.article_id = article.id;
            r.status = AnnotationStatus::kOk;
            r.labels = hit->labels;
            r.raw_text = hit->raw_text;
            r.attempts = hit->attempts;
            r.timestamp = hit->timestamp;
            r.from_cache = true;
            batch.results[i] = std::move(r);
            ++cache_hits;
            continue;
          }
        }
      }
      AnnotationResult r = annotate_one(article, schema, config, client, hooks);
      if (cache && !key.empty() && r.status == AnnotationStatus::kOk) {
        try {
          cache->append({key, r.article_id, config.model_id, r.raw_text, *r.labels, r.timestamp,
                         r.attempts});
        } catch (const std::exception& e) {
          r.error = std::string("cache append failed: ") + e.what();
        }
      }
      batch.results[i] = std::move(r);
    }
  };

  const std::size_t workers =
      std::min<std::size_t>(static_cast<std::size_t>(config.concurrency_limit), articles.size());
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(work);
    if (workers > 0) work();
  }

  for (const auto& r : batch.results) {
    switch (r.status) {
      case AnnotationStatus::kOk:
        ++batch.summary.ok;
        break;
      case AnnotationStatus::kParseFailed:
        ++batch.summary.parse_failed;
        break;
      case AnnotationStatus::kTransportFailed:
        ++batch.summary.transport_failed;
        break;
    }
  }
  batch.summary.cache_hits = cache_hits.load();
  return batch;
}

std::vector<corpus::LabeledArticle> to_labeled(const std::vector<corpus::Article>& articles,
                                               const std::vector<AnnotationResult>& results,
                                               std::string_view model_id) {
  std::vector<corpus::LabeledArticle> out;
  for (std::size_t i = 0; i < articles.size() && i < results.size(); ++i) {
    const auto& r = results[i];
    if (r.status != AnnotationStatus::kOk) continue;
    corpus::LabeledArticle la;
    la.article = articles[i];
    la.labels = *r.labels;
    la.provenance.annotator_model_id = std::string(model_id);
    la.provenance.timestamp = r.timestamp;
    la.provenance.raw_response_digest = sha256_hex(r.raw_text);
    la.provenance.attempts = std::max(r.attempts, 1);
    out.push_back(std::move(la));
  }
  return out;
}

}  // namespace biaslens::annotator
