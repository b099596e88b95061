#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <map>
#include <random>
#include <sstream>

#include "biaslens/corpus.hpp"
#include "biaslens/error.hpp"
#include "biaslens/io.hpp"

namespace biaslens::corpus {
namespace {

Article make(std::string id, Domain d = Domain::kPolitics, std::string body = "some body text") {
  return {std::move(id), d, "A title", std::move(body), std::nullopt};
}

LabeledArticle labeled(std::string id, std::array<int, kNumLabels> flags,
                       Domain d = Domain::kPolitics) {
  return {make(std::move(id), d), BiasVector(flags), {"test-model", "2024-10-03T00:00:00Z", "d", 1}};
}

std::string error_of(auto&& fn) {
  try {
    fn();
  } catch (const ValidationError& e) {
    return e.what();
  }
  return "";
}

TEST(LoadArticles, JsonlPreservesOrder) {
  const auto articles = parse_articles_jsonl(
      R"({"id":"b","domain":"finance","title":"T1","body":"B1"})"
      "\n"
      R"({"id":"a","domain":"Sports","title":" T2 ","body":"B2","source":"wire"})"
      "\n");
  ASSERT_EQ(articles.size(), 2u);
  EXPECT_EQ(articles[0].id, "b");
  EXPECT_EQ(articles[0].domain, Domain::kFinance);
  EXPECT_EQ(articles[1].id, "a");
  EXPECT_EQ(articles[1].domain, Domain::kSports);
  EXPECT_EQ(articles[1].title, "T2");
  EXPECT_EQ(articles[1].source, "wire");
}

TEST(LoadArticles, EmptyInputGivesEmptyList) {
  EXPECT_TRUE(parse_articles_jsonl("").empty());
  EXPECT_TRUE(parse_articles_jsonl("\n\n").empty());
  EXPECT_TRUE(parse_articles_csv("").empty());
}

TEST(LoadArticles, EmptyTitleNamesRecordAndField) {
  const auto msg = error_of([] {
    parse_articles_jsonl(R"({"id":"a","domain":"finance","title":"T","body":"B"})"
                         "\n"
                         R"({"id":"b","domain":"finance","title":"   ","body":"B"})");
  });
  EXPECT_NE(msg.find("record 2"), std::string::npos) << msg;
  EXPECT_NE(msg.find("title"), std::string::npos) << msg;
}

TEST(LoadArticles, RejectsMalformedRecords) {
  EXPECT_NE(error_of([] { parse_articles_jsonl("{not json"); }).find("record 1"), std::string::npos);
  EXPECT_NE(error_of([] {
              parse_articles_jsonl(R"({"id":"a","domain":"weather","title":"T","body":"B"})");
            }).find("domain"),
            std::string::npos);
  EXPECT_NE(error_of([] { parse_articles_jsonl(R"({"id":"a","domain":"finance","title":"T"})"); })
                .find("body"),
            std::string::npos);
  EXPECT_NE(error_of([] {
              parse_articles_jsonl(R"({"id":7,"domain":"finance","title":"T","body":"B"})");
            }).find("id"),
            std::string::npos);
}

TEST(LoadArticles, DuplicateIdIsAnErrorNamingTheId) {
  const auto msg = error_of([] {
    parse_articles_jsonl(R"({"id":"dup-1","domain":"finance","title":"T","body":"B"})"
                         "\n"
                         R"({"id":"dup-1","domain":"sports","title":"T","body":"B"})");
  });
  EXPECT_NE(msg.find("dup-1"), std::string::npos) << msg;
}

TEST(LoadArticles, OtherDomainNeedsOptIn) {
  const std::string line = R"({"id":"a","domain":"other","title":"T","body":"B"})";
  EXPECT_THROW(parse_articles_jsonl(line), ValidationError);
  const auto articles = parse_articles_jsonl(line, {.allow_other_domain = true});
  EXPECT_EQ(articles.at(0).domain, Domain::kOther);
}

TEST(LoadArticles, CsvRequiresExactHeader) {
  const auto articles = parse_articles_csv(
      "id,domain,title,body,source\n"
      "x1,politics,\"Vote, again\",\"Line one\nline two\",agency\n"
      "x2,religion,Temple,Festival report,\n");
  ASSERT_EQ(articles.size(), 2u);
  EXPECT_EQ(articles[0].title, "Vote, again");
  EXPECT_EQ(articles[0].body, "Line one\nline two");
  EXPECT_EQ(articles[0].source, "agency");
  EXPECT_FALSE(articles[1].source.has_value());

  EXPECT_THROW(parse_articles_csv("id,title,domain,body\nx,T,politics,B\n"), ValidationError);
  EXPECT_THROW(parse_articles_csv("ID,domain,title,body\nx,politics,T,B\n"), ValidationError);
  const auto msg = error_of([] { parse_articles_csv("id,domain,title,body\nx,politics,T\n"); });
  EXPECT_NE(msg.find("record 1"), std::string::npos) << msg;
}

TEST(LoadArticles, FileRoundTripIsFieldForField) {
  std::vector<Article> original = {
      {"r1", Domain::kHollywood, "Premiere \"night\"", "Body with\nnewline and ünïcode", "wire"},
      {"r2", Domain::kReligion, "Festival", "Pilgrims gathered.", std::nullopt},
  };
  const auto dir = std::filesystem::temp_directory_path() / "biaslens_corpus_rt";
  io::write_file_atomic(dir / "a.jsonl", serialize_articles_jsonl(original));
  EXPECT_EQ(load_articles(dir / "a.jsonl", Format::kJsonl), original);
  std::filesystem::remove_all(dir);
}

TEST(LabeledJsonl, RoundTripsAndValidatesLabels) {
  std::vector<LabeledArticle> data = {labeled("a", {1, 0, 0, 0, 0, 0, 1}),
                                      labeled("b", {0, 0, 0, 0, 0, 0, 0}, Domain::kFashion)};
  EXPECT_EQ(parse_labeled_jsonl(serialize_labeled_jsonl(data)), data);

  const std::string bad =
      R"({"article":{"id":"a","domain":"finance","title":"T","body":"B"},)"
      R"("labels":{"political":2,"gender":0,"entity":0,"racial":0,"religious":0,"regional":0,"sensational":0}})";
  EXPECT_THROW(parse_labeled_jsonl(bad), ValidationError);
  const std::string missing =
      R"({"article":{"id":"a","domain":"finance","title":"T","body":"B"},"labels":{"political":1}})";
  EXPECT_THROW(parse_labeled_jsonl(missing), ValidationError);
}

TEST(FilterLabeled, DropsAllZeroVectors) {
  EXPECT_TRUE(filter_labeled({labeled("z", {0, 0, 0, 0, 0, 0, 0})}).empty());
  EXPECT_EQ(filter_labeled({labeled("o", {0, 0, 0, 0, 1, 0, 0})}).size(), 1u);
}

TEST(FilterLabeled, FiveInputsTwoZero) {
  const std::vector<LabeledArticle> data = {
      labeled("1", {1, 0, 0, 0, 0, 0, 0}), labeled("2", {0, 0, 0, 0, 0, 0, 0}),
      labeled("3", {0, 1, 1, 0, 0, 0, 0}), labeled("4", {0, 0, 0, 0, 0, 0, 0}),
      labeled("5", {0, 0, 0, 0, 0, 0, 1})};
  // Oracle: enumerate flags directly.
  std::vector<std::string> expected;
  for (const auto& d : data) {
    const auto flags = d.labels.to_array();
    int positives = 0;
    for (int f : flags) positives += f;
    if (positives >= 1) expected.push_back(d.article.id);
  }
  ASSERT_EQ(expected.size(), 3u);
  const auto kept = filter_labeled(data);
  std::vector<std::string> got;
  for (const auto& k : kept) got.push_back(k.article.id);
  EXPECT_EQ(got, expected);
}

std::vector<LabeledArticle> random_dataset(std::mt19937_64& rng, std::size_t n) {
  std::vector<LabeledArticle> out;
  for (std::size_t i = 0; i < n; ++i) {
    std::array<int, kNumLabels> flags{};
    for (auto& f : flags) f = (rng() % 4 == 0) ? 1 : 0;
    out.push_back(labeled("id" + std::to_string(i), flags, kAllDomains[rng() % 6]));
  }
  return out;
}

TEST(FilterLabeled, IsIdempotent) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const auto data = random_dataset(rng, rng() % 40);
    const auto once = filter_labeled(data);
    EXPECT_EQ(filter_labeled(once), once);
    for (const auto& d : once) EXPECT_TRUE(d.labels.any());
  }
}

TEST(DatasetStats, EmptyInputIsAllZero) {
  const auto r = dataset_stats({});
  EXPECT_EQ(r.total, 0u);
  for (const auto& [d, c] : r.per_domain_counts) EXPECT_EQ(c, 0u);
  for (const auto& c : r.per_label_counts) {
    EXPECT_EQ(c.positive, 0u);
    EXPECT_EQ(c.negative, 0u);
  }
}

TEST(DatasetStats, FourExamplesMatchHandCount) {
  const std::vector<LabeledArticle> data = {
      labeled("1", {1, 0, 0, 0, 0, 0, 1}, Domain::kPolitics),
      labeled("2", {1, 1, 0, 0, 0, 0, 0}, Domain::kPolitics),
      labeled("3", {0, 0, 0, 0, 1, 0, 0}, Domain::kReligion),
      labeled("4", {0, 0, 0, 0, 0, 0, 1}, Domain::kSports)};
  const auto r = dataset_stats(data);
  EXPECT_EQ(r.total, 4u);
  EXPECT_EQ(r.per_domain_counts.at(Domain::kPolitics), 2u);
  EXPECT_EQ(r.per_domain_counts.at(Domain::kReligion), 1u);
  EXPECT_EQ(r.per_domain_counts.at(Domain::kSports), 1u);
  EXPECT_EQ(r.per_domain_counts.at(Domain::kFinance), 0u);
  const std::array<std::size_t, kNumLabels> positives = {2, 1, 0, 0, 1, 0, 2};
  for (std::size_t l = 0; l < kNumLabels; ++l) {
    EXPECT_EQ(r.per_label_counts[l].positive, positives[l]) << kLabelKeys[l];
    EXPECT_EQ(r.per_label_counts[l].negative, 4 - positives[l]) << kLabelKeys[l];
  }
}

TEST(DatasetStats, TotalsReconcileOnRandomData) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 30; ++trial) {
    const auto data = random_dataset(rng, rng() % 60);
    const auto r = dataset_stats(data);
    EXPECT_EQ(r.total, data.size());
    std::size_t domain_sum = 0;
    for (const auto& [d, c] : r.per_domain_counts) domain_sum += c;
    EXPECT_EQ(domain_sum, r.total);
    for (const auto& c : r.per_label_counts) EXPECT_EQ(c.positive + c.negative, r.total);
  }
}

TEST(DatasetStats, CsvLayout) {
  const auto csv = render_stats_csv(dataset_stats({labeled("1", {1, 0, 0, 0, 0, 0, 0})}));
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "kind,name,positive,negative,count");
  std::getline(in, line);
  EXPECT_EQ(line, "total,all,,,1");
  EXPECT_NE(csv.find("domain,politics,,,1\n"), std::string::npos);
  EXPECT_NE(csv.find("label,political,1,0,1\n"), std::string::npos);
  EXPECT_NE(csv.find("label,sensational,0,1,1\n"), std::string::npos);
  EXPECT_EQ(csv.find("other"), std::string::npos);
}

TEST(TokenFrequencies, CountsAndStopwords) {
  const std::vector<Article> one = {make("a", Domain::kFinance, "tax tax cut")};
  const auto f = token_frequencies(one, 10, {});
  EXPECT_EQ(f.at(Domain::kFinance), (TokenCounts{{"tax", 2}, {"cut", 1}}));
  const auto g = token_frequencies(one, 10, {"tax"});
  EXPECT_EQ(g.at(Domain::kFinance), (TokenCounts{{"cut", 1}}));
  EXPECT_THROW(token_frequencies(one, 0, {}), std::invalid_argument);
}

TEST(TokenFrequencies, TiesBreakLexicographicallyAndTopKTruncates) {
  const std::vector<Article> a = {make("a", Domain::kSports, "zeta alpha mid mid")};
  EXPECT_EQ(token_frequencies(a, 2, {}).at(Domain::kSports),
            (TokenCounts{{"mid", 2}, {"alpha", 1}}));
}

TEST(TokenFrequencies, MatchesIndependentCount) {
  const std::vector<std::string> vocab = {"budget", "vote", "match", "goal", "rally",
                                          "film",   "star", "market", "fund", "temple"};
  std::mt19937_64 rng(5);
  std::vector<Article> articles;
  std::map<Domain, std::map<std::string, std::size_t>> oracle;
  const std::unordered_set<std::string> stop = {"vote", "goal"};
  for (int i = 0; i < 10; ++i) {
    const Domain d = kAllDomains[i % 3];
    std::string body;
    for (int w = 0; w < 25; ++w) {
      const auto& word = vocab[rng() % vocab.size()];
      body += word + " ";
      if (!stop.contains(word)) ++oracle[d][word];
    }
    articles.push_back(make("t" + std::to_string(i), d, body));
  }
  const auto got = token_frequencies(articles, 1000, stop);
  ASSERT_EQ(got.size(), oracle.size());
  for (const auto& [domain, counts] : oracle) {
    const auto& ranked = got.at(domain);
    std::size_t total = 0;
    std::size_t expected_total = 0;
    for (const auto& [tok, c] : ranked) {
      EXPECT_EQ(counts.at(tok), c) << tok;
      total += c;
    }
    for (const auto& [tok, c] : counts) expected_total += c;
    EXPECT_EQ(ranked.size(), counts.size());
    EXPECT_EQ(total, expected_total);
    EXPECT_TRUE(std::is_sorted(ranked.begin(), ranked.end(), [](const auto& x, const auto& y) {
      return x.second != y.second ? x.second > y.second : x.first < y.first;
    }));
  }
}

}  // namespace
}  // namespace biaslens::corpus
