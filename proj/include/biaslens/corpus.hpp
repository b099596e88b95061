#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "biaslens/labels.hpp"

namespace biaslens::corpus {

/// News domains. kOther is accepted only when LoadOptions::allow_other_domain
/// is set.
enum class Domain { kHollywood, kFashion, kFinance, kReligion, kPolitics, kSports, kOther };

inline constexpr std::array<Domain, 7> kAllDomains = {
    Domain::kHollywood, Domain::kFashion, Domain::kFinance, Domain::kReligion,
    Domain::kPolitics,  Domain::kSports,  Domain::kOther};

std::string_view domain_name(Domain d);
std::optional<Domain> parse_domain(std::string_view name);

struct Article {
  std::string id;
  Domain domain = Domain::kPolitics;
  std::string title;
  std::string body;
  std::optional<std::string> source;

  friend bool operator==(const Article&, const Article&) = default;
};

struct Provenance {
  std::string annotator_model_id;
  std::string timestamp;  // ISO-8601 UTC
  std::string raw_response_digest;
  int attempts = 1;

  friend bool operator==(const Provenance&, const Provenance&) = default;
};

struct LabeledArticle {
  Article article;
  BiasVector labels;
  Provenance provenance;

  friend bool operator==(const LabeledArticle&, const LabeledArticle&) = default;
};

struct LabelCount {
  std::size_t positive = 0;
  std::size_t negative = 0;
};

struct StatsReport {
  std::map<Domain, std::size_t> per_domain_counts;
  std::array<LabelCount, kNumLabels> per_label_counts{};
  std::size_t total = 0;
};

enum class Format { kJsonl, kCsv };
std::optional<Format> parse_format(std::string_view name);

struct LoadOptions {
  bool allow_other_domain = false;
};

/// Trims id, title and body and validates every Article invariant. Throws
/// ValidationError naming the record and field.
std::vector<Article> load_articles(const std::filesystem::path& path, Format format,
                                   const LoadOptions& options = {});
std::vector<Article> parse_articles_jsonl(std::string_view contents,
                                          const LoadOptions& options = {});
/// Requires the header id,domain,title,body with an optional trailing source.
std::vector<Article> parse_articles_csv(std::string_view contents,
                                        const LoadOptions& options = {});

std::vector<LabeledArticle> load_labeled(const std::filesystem::path& path,
                                         const LoadOptions& options = {});
std::vector<LabeledArticle> parse_labeled_jsonl(std::string_view contents,
                                                const LoadOptions& options = {});

nlohmann::ordered_json to_json(const Article& a);
nlohmann::ordered_json to_json(BiasVector v);
nlohmann::ordered_json to_json(const Provenance& p);
nlohmann::ordered_json to_json(const LabeledArticle& a);

std::string serialize_articles_jsonl(const std::vector<Article>& articles);
std::string serialize_labeled_jsonl(const std::vector<LabeledArticle>& data);

/// Parses {"political":0|1, ...} with exactly the seven canonical keys.
BiasVector labels_from_json(const nlohmann::json& j);

/// Keeps the examples with at least one positive flag, in input order.
std::vector<LabeledArticle> filter_labeled(const std::vector<LabeledArticle>& data);

StatsReport dataset_stats(const std::vector<LabeledArticle>& data);

/// CSV with columns kind,name,positive,negative,count. One "total" row, one
/// row per domain (the six fixed domains always, "other" when present) and
/// one row per label.
std::string render_stats_csv(const StatsReport& report);

using TokenCounts = std::vector<std::pair<std::string, std::size_t>>;

/// Per-domain token counts over article bodies, sorted by descending count
/// then token; at most top_k entries per domain. Stopwords are matched
/// against lowercased tokens.
std::map<Domain, TokenCounts> token_frequencies(const std::vector<Article>& articles,
                                                std::size_t top_k,
                                                const std::unordered_set<std::string>& stopwords);

/// CSV with columns domain,rank,token,count.
std::string render_token_csv(const std::map<Domain, TokenCounts>& freqs);

}  // namespace biaslens::corpus
