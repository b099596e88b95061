#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "biaslens/chat_client.hpp"
#include "biaslens/corpus.hpp"
#include "biaslens/labels.hpp"

namespace biaslens::annotator {

struct Category {
  std::string key;           // canonical label name, e.g. "political"
  std::string display_name;  // e.g. "Political Bias"
  std::string definition;
};

/// Ordered list of categories the LLM is asked about. Must contain the seven
/// canonical keys; further categories may be added and are requested from the
/// model but do not enter the BiasVector.
class AnnotationSchema {
 public:
  /// Throws ValidationError on duplicate keys or display names, empty fields,
  /// or a missing canonical key.
  explicit AnnotationSchema(std::vector<Category> categories);

  /// The seven canonical categories with their reference definitions.
  static const AnnotationSchema& default_schema();
  /// JSON array of {key, display_name, definition}.
  static AnnotationSchema from_json(const nlohmann::json& j);

  const std::vector<Category>& categories() const { return categories_; }

 private:
  std::vector<Category> categories_;
};

struct PromptPair {
  std::string system_text;
  std::string user_text;

  friend bool operator==(const PromptPair&, const PromptPair&) = default;
};

/// A "[system]" section and a "[user]" section. The system section holds
/// {{DEFINITIONS}} and {{OUTPUT_FORMAT}} exactly once each, the user section
/// {{TITLE}} and {{BODY}} exactly once each.
class PromptTemplate {
 public:
  static PromptTemplate parse(std::string_view text);
  static const PromptTemplate& default_template();

  const std::string& system_section() const { return system_; }
  const std::string& user_section() const { return user_; }

 private:
  PromptTemplate(std::string system, std::string user)
      : system_(std::move(system)), user_(std::move(user)) {}
  std::string system_;
  std::string user_;
};

/// Text of the shipped template (templates/bias_prompt_v1.txt).
std::string_view default_template_text();

/// Throws ValidationError when the title or body is empty after trimming.
PromptPair build_prompt(const corpus::Article& article, const AnnotationSchema& schema,
                        const PromptTemplate& tmpl = PromptTemplate::default_template());

/// One "<Display Name>: <value>" line per category, newline-terminated.
std::string render_labels(BiasVector v, const AnnotationSchema& schema);

/// Accepts either a JSON object keyed by canonical keys with integer 0/1
/// values, or one "<Display Name>: <0|1>" line per category (names
/// case-insensitive, whitespace tolerant, unrelated lines ignored). Throws
/// LabelParseError carrying raw_text on a missing or duplicate category, a
/// value outside {0,1}, or when neither format is present.
BiasVector parse_labels(std::string_view raw_text, const AnnotationSchema& schema);

struct LlmConfig {
  std::string endpoint_url = "https://api.openai.com/v1/chat/completions";
  std::string model_id = "gpt-4o-mini";
  double temperature = 0.0;
  double timeout_seconds = 60.0;
  int max_retries = 5;
  int max_reprompts = 2;
  int concurrency_limit = 4;
  std::filesystem::path cache_path;  // empty disables caching
  double backoff_base_seconds = 1.0;

  /// Throws ValidationError when a field is out of range.
  void validate() const;
};

enum class AnnotationStatus { kOk, kParseFailed, kTransportFailed };
std::string_view status_name(AnnotationStatus s);

struct AnnotationResult {
  std::string article_id;
  AnnotationStatus status = AnnotationStatus::kTransportFailed;
  std::optional<BiasVector> labels;  // present iff status == kOk
  std::string raw_text;
  int attempts = 0;
  std::string timestamp;
  bool from_cache = false;
  std::string error;
};

using Sleeper = std::function<void(std::chrono::duration<double>)>;

struct AnnotateHooks {
  const PromptTemplate* prompt = nullptr;  // default template when null
  Sleeper sleep;                           // std::this_thread::sleep_for when empty
};

/// Backoff before retry number `retry` (0-based): uniform in
/// [0, base * 2^retry] ("full jitter").
double backoff_upper_bound(double base_seconds, int retry);

/// Requests labels for one article. Transport failures (no response, 429,
/// 5xx) are retried up to max_retries times with backoff; unparseable
/// replies trigger up to max_reprompts follow-up requests carrying a format
/// reminder. Never throws for endpoint or parse failures.
AnnotationResult annotate_one(const corpus::Article& article, const AnnotationSchema& schema,
                              const LlmConfig& config, ChatClient& client,
                              const AnnotateHooks& hooks = {});

struct CacheRecord {
  std::string key_digest;
  std::string article_id;
  std::string model_id;
  std::string raw_text;
  BiasVector labels;
  std::string timestamp;
  int attempts = 1;
};

/// Append-only JSONL store of successful annotations. A torn trailing line
/// (interrupted write) is ignored on load. Thread-safe.
class AnnotationCache {
 public:
  explicit AnnotationCache(std::filesystem::path path);

  std::optional<CacheRecord> find(const std::string& key_digest) const;
  void append(const CacheRecord& record);
  std::size_t size() const;

  static std::string key_for(std::string_view article_id, const PromptPair& prompt,
                             std::string_view model_id);

 private:
  std::filesystem::path path_;
  mutable std::mutex mu_;
  std::unordered_map<std::string, CacheRecord> records_;
};

struct BatchSummary {
  std::size_t ok = 0;
  std::size_t parse_failed = 0;
  std::size_t transport_failed = 0;
  std::size_t cache_hits = 0;
};

struct BatchResult {
  std::vector<AnnotationResult> results;  // same order as the input
  BatchSummary summary;
};

/// Annotates every article with at most config.concurrency_limit requests in
/// flight. The cache at config.cache_path (if set) is consulted before each
/// request and receives every successful result.
BatchResult annotate_batch(const std::vector<corpus::Article>& articles,
                           const AnnotationSchema& schema, const LlmConfig& config,
                           ChatClient& client, const AnnotateHooks& hooks = {});

/// Joins successful results with their articles. Failed articles are skipped.
std::vector<corpus::LabeledArticle> to_labeled(const std::vector<corpus::Article>& articles,
                                               const std::vector<AnnotationResult>& results,
                                               std::string_view model_id);

}  // namespace biaslens::annotator
