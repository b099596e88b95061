#include "biaslens/corpus.hpp"

#include <algorithm>
#include <unordered_map>

#include "biaslens/error.hpp"
#include "biaslens/io.hpp"
#include "biaslens/text.hpp"

namespace biaslens::corpus {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr std::array<std::string_view, 7> kDomainNames = {
    "hollywood", "fashion", "finance", "religion", "politics", "sports", "other"};

[[noreturn]] void fail(std::size_t record, std::string_view field, std::string_view why) {
  throw ValidationError("record " + std::to_string(record) + ": field '" + std::string(field) +
                        "' " + std::string(why));
}

std::string required_text(std::size_t record, std::string_view field, std::string_view raw) {
  auto trimmed = text::trim(raw);
  if (trimmed.empty()) fail(record, field, "is empty");
  return std::string(trimmed);
}

Article make_article(std::size_t record, std::string_view id, std::string_view domain,
                     std::string_view title, std::string_view body,
                     std::optional<std::string_view> source, const LoadOptions& options) {
  Article a;
  a.id = required_text(record, "id", id);
  auto d = parse_domain(text::to_lower_ascii(text::trim(domain)));
  if (!d || (*d == Domain::kOther && !options.allow_other_domain)) {
    fail(record, "domain", "has unknown value '" + std::string(domain) + "'");
  }
  a.domain = *d;
  a.title = required_text(record, "title", title);
  a.body = required_text(record, "body", body);
  if (source && !text::trim(*source).empty()) a.source = std::string(text::trim(*source));
  return a;
}

std::string json_string_field(std::size_t record, const json& obj, const char* key,
                              bool required) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) {
    if (required) fail(record, key, "is missing");
    return {};
  }
  if (!it->is_string()) fail(record, key, "is not a string");
  return it->get<std::string>();
}

Article article_from_json(std::size_t record, const json& obj, const LoadOptions& options) {
  if (!obj.is_object()) throw ValidationError("record " + std::to_string(record) + ": not a JSON object");
  std::optional<std::string> source;
  if (obj.contains("source") && !obj["source"].is_null()) {
    source = json_string_field(record, obj, "source", false);
  }
  return make_article(record, json_string_field(record, obj, "id", true),
                      json_string_field(record, obj, "domain", true),
                      json_string_field(record, obj, "title", true),
                      json_string_field(record, obj, "body", true), source, options);
}

void check_unique(std::unordered_set<std::string>& seen, const std::string& id) {
  if (!seen.insert(id).second) throw ValidationError("duplicate article id '" + id + "'");
}

json parse_line(std::size_t record, std::string_view line) {
  json j = json::parse(line, nullptr, false);
  if (j.is_discarded()) throw ValidationError("record " + std::to_string(record) + ": malformed JSON");
  return j;
}

}  // namespace

std::string_view domain_name(Domain d) { return kDomainNames[static_cast<std::size_t>(d)]; }

std::optional<Domain> parse_domain(std::string_view name) {
  for (std::size_t i = 0; i < kDomainNames.size(); ++i) {
    if (kDomainNames[i] == name) return static_cast<Domain>(i);
  }
  return std::nullopt;
}

std::optional<Format> parse_format(std::string_view name) {
  if (name == "jsonl") return Format::kJsonl;
  if (name == "csv") return Format::kCsv;
  return std::nullopt;
}

std::vector<Article> load_articles(const std::filesystem::path& path, Format format,
                                   const LoadOptions& options) {
  const std::string contents = io::read_file(path);
  return format == Format::kJsonl ? parse_articles_jsonl(contents, options)
                                  : parse_articles_csv(contents, options);
}

std::vector<Article> parse_articles_jsonl(std::string_view contents, const LoadOptions& options) {
  std::vector<Article> out;
  std::unordered_set<std::string> seen;
  const auto lines = io::split_lines(contents);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (text::trim(lines[i]).empty()) continue;
    const std::size_t record = i + 1;
    out.push_back(article_from_json(record, parse_line(record, lines[i]), options));
    check_unique(seen, out.back().id);
  }
  return out;
}

std::vector<Article> parse_articles_csv(std::string_view contents, const LoadOptions& options) {
  const auto records = io::parse_csv(contents);
  if (records.empty()) return {};
  const auto& header = records.front().fields;
  const std::vector<std::string> base = {"id", "domain", "title", "body"};
  bool has_source = false;
  if (header == base) {
    has_source = false;
  } else if (header.size() == 5 && std::equal(base.begin(), base.end(), header.begin()) &&
             header[4] == "source") {
    has_source = true;
  } else {
    throw ValidationError("csv header must be id,domain,title,body[,source]");
  }
  std::vector<Article> out;
  std::unordered_set<std::string> seen;
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& f = records[r].fields;
    if (f.size() != header.size()) {
      throw ValidationError("record " + std::to_string(r) + " (line " +
                            std::to_string(records[r].line) + "): expected " +
                            std::to_string(header.size()) + " fields, got " +
                            std::to_string(f.size()));
    }
    std::optional<std::string_view> source;
    if (has_source) source = f[4];
    out.push_back(make_article(r, f[0], f[1], f[2], f[3], source, options));
    check_unique(seen, out.back().id);
  }
  return out;
}

BiasVector labels_from_json(const json& j) {
  if (!j.is_object()) throw ValidationError("labels must be an object");
  std::array<int, kNumLabels> flags{};
  for (std::size_t i = 0; i < kNumLabels; ++i) {
    auto it = j.find(std::string(kLabelKeys[i]));
    if (it == j.end()) throw ValidationError("labels missing '" + std::string(kLabelKeys[i]) + "'");
    if (!it->is_number_integer() || (it->get<long long>() != 0 && it->get<long long>() != 1)) {
      throw ValidationError("label '" + std::string(kLabelKeys[i]) + "' must be integer 0 or 1");
    }
    flags[i] = it->get<int>();
  }
  if (j.size() != kNumLabels) throw ValidationError("labels carry unknown keys");
  return BiasVector(flags);
}

std::vector<LabeledArticle> load_labeled(const std::filesystem::path& path,
                                         const LoadOptions& options) {
  return parse_labeled_jsonl(io::read_file(path), options);
}

std::vector<LabeledArticle> parse_labeled_jsonl(std::string_view contents,
                                                const LoadOptions& options) {
  std::vector<LabeledArticle> out;
  std::unordered_set<std::string> seen;
  const auto lines = io::split_lines(contents);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (text::trim(lines[i]).empty()) continue;
    const std::size_t record = i + 1;
    const json j = parse_line(record, lines[i]);
    if (!j.is_object() || !j.contains("article") || !j.contains("labels")) {
      fail(record, "article", "or 'labels' is missing");
    }
    LabeledArticle la;
    la.article = article_from_json(record, j["article"], options);
    try {
      la.labels = labels_from_json(j["labels"]);
    } catch (const ValidationError& e) {
      fail(record, "labels", e.what());
    }
    if (auto it = j.find("provenance"); it != j.end()) {
      const json& p = *it;
      if (!p.is_object()) fail(record, "provenance", "is not an object");
      la.provenance.annotator_model_id = p.value("annotator_model_id", "");
      la.provenance.timestamp = p.value("timestamp", "");
      la.provenance.raw_response_digest = p.value("raw_response_digest", "");
      la.provenance.attempts = p.value("attempts", 1);
      if (la.provenance.attempts < 1) fail(record, "provenance.attempts", "must be >= 1");
    }
    check_unique(seen, la.article.id);
    out.push_back(std::move(la));
  }
  return out;
}

ordered_json to_json(const Article& a) {
  ordered_json j;
  j["id"] = a.id;
  j["domain"] = domain_name(a.domain);
  j["title"] = a.title;
  j["body"] = a.body;
  if (a.source) j["source"] = *a.source;
  return j;
}

ordered_json to_json(BiasVector v) {
  ordered_json j = ordered_json::object();
  for (std::size_t i = 0; i < kNumLabels; ++i) j[std::string(kLabelKeys[i])] = v[i] ? 1 : 0;
  return j;
}

ordered_json to_json(const Provenance& p) {
  ordered_json j;
  j["annotator_model_id"] = p.annotator_model_id;
  j["timestamp"] = p.timestamp;
  j["raw_response_digest"] = p.raw_response_digest;
  j["attempts"] = p.attempts;
  return j;
}

ordered_json to_json(const LabeledArticle& a) {
  ordered_json j;
  j["article"] = to_json(a.article);
  j["labels"] = to_json(a.labels);
  j["provenance"] = to_json(a.provenance);
  return j;
}

std::string serialize_articles_jsonl(const std::vector<Article>& articles) {
  std::string out;
  for (const auto& a : articles) out += to_json(a).dump() + '\n';
  return out;
}

std::string serialize_labeled_jsonl(const std::vector<LabeledArticle>& data) {
  std::string out;
  for (const auto& a : data) out += to_json(a).dump() + '\n';
  return out;
}

std::vector<LabeledArticle> filter_labeled(const std::vector<LabeledArticle>& data) {
  std::vector<LabeledArticle> out;
  std::copy_if(data.begin(), data.end(), std::back_inserter(out),
               [](const LabeledArticle& a) { return a.labels.any(); });
  return out;
}

StatsReport dataset_stats(const std::vector<LabeledArticle>& data) {
  StatsReport r;
  for (Domain d : kAllDomains) {
    if (d != Domain::kOther) r.per_domain_counts[d] = 0;
  }
  for (const auto& a : data) {
    ++r.per_domain_counts[a.article.domain];
    for (std::size_t l = 0; l < kNumLabels; ++l) {
      if (a.labels[l]) {
        ++r.per_label_counts[l].positive;
      } else {
        ++r.per_label_counts[l].negative;
      }
    }
  }
  r.total = data.size();
  return r;
}

std::string render_stats_csv(const StatsReport& report) {
  std::string out = io::csv_row({"kind", "name", "positive", "negative", "count"});
  out += io::csv_row({"total", "all", "", "", std::to_string(report.total)});
  for (const auto& [domain, count] : report.per_domain_counts) {
    out += io::csv_row({"domain", std::string(domain_name(domain)), "", "", std::to_string(count)});
  }
  for (std::size_t l = 0; l < kNumLabels; ++l) {
    const auto& c = report.per_label_counts[l];
    out += io::csv_row({"label", std::string(kLabelKeys[l]), std::to_string(c.positive),
                        std::to_string(c.negative), std::to_string(c.positive + c.negative)});
  }
  return out;
}

std::map<Domain, TokenCounts> token_frequencies(const std::vector<Article>& articles,
                                                std::size_t top_k,
                                                const std::unordered_set<std::string>& stopwords) {
  if (top_k < 1) throw std::invalid_argument("top_k must be >= 1");
  std::map<Domain, std::unordered_map<std::string, std::size_t>> counts;
  for (const auto& a : articles) {
    auto& domain_counts = counts[a.domain];
    for (auto& tok : text::tokenize(a.body)) {
      if (stopwords.contains(tok)) continue;
      ++domain_counts[std::move(tok)];
    }
  }
  std::map<Domain, TokenCounts> out;
  for (auto& [domain, table] : counts) {
    TokenCounts ranked(table.begin(), table.end());
    std::sort(ranked.begin(), ranked.end(), [](const auto& x, const auto& y) {
      if (x.second != y.second) return x.second > y.second;
      return x.first < y.first;
    });
    if (ranked.size() > top_k) ranked.resize(top_k);
    out.emplace(domain, std::move(ranked));
  }
  return out;
}

std::string render_token_csv(const std::map<Domain, TokenCounts>& freqs) {
  std::string out = io::csv_row({"domain", "rank", "token", "count"});
  for (const auto& [domain, ranked] : freqs) {
    for (std::size_t i = 0; i < ranked.size(); ++i) {
      out += io::csv_row({std::string(domain_name(domain)), std::to_string(i + 1), ranked[i].first,
                          std::to_string(ranked[i].second)});
    }
  }
  return out;
}

}  // namespace biaslens::corpus
