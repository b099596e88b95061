#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "biaslens/io.hpp"
#include "biaslens/metrics.hpp"
#include "biaslens/random.hpp"

namespace biaslens::metrics {
namespace {

std::vector<BiasVector> random_vectors(std::size_t n, std::mt19937_64& rng) {
  std::vector<BiasVector> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(BiasVector::from_mask(uniform_index(rng, 128)));
  return out;
}

TEST(Confusion, IdentityHasNoErrors) {
  std::mt19937_64 rng(1);
  const auto v = random_vectors(30, rng);
  const auto c = confusion(v, v);
  EXPECT_EQ(c.examples, 30u);
  for (const auto& k : c.per_label) {
    EXPECT_EQ(k.fp, 0u);
    EXPECT_EQ(k.fn, 0u);
    EXPECT_EQ(k.total(), 30u);
  }
}

TEST(Confusion, SingleFalsePositive) {
  const auto c = confusion({BiasVector({0, 0, 1, 0, 0, 0, 0})}, {BiasVector{}});
  EXPECT_EQ(c.per_label[2], (Counts{0, 1, 0, 0}));
  EXPECT_EQ(c.per_label[0], (Counts{0, 0, 0, 1}));
}

TEST(Confusion, MatchesElementwiseCount) {
  std::mt19937_64 rng(2);
  const auto preds = random_vectors(50, rng);
  const auto gold = random_vectors(50, rng);
  const auto c = confusion(preds, gold);
  for (std::size_t l = 0; l < kNumLabels; ++l) {
    Counts expect;
    for (std::size_t i = 0; i < 50; ++i) {
      const int p = preds[i].to_array()[l];
      const int g = gold[i].to_array()[l];
      if (p && g) ++expect.tp;
      if (p && !g) ++expect.fp;
      if (!p && g) ++expect.fn;
      if (!p && !g) ++expect.tn;
    }
    EXPECT_EQ(c.per_label[l], expect) << l;
  }
}

TEST(Confusion, RejectsMismatchAndEmpty) {
  EXPECT_THROW(confusion({BiasVector{}}, {}), std::invalid_argument);
  EXPECT_THROW(confusion({}, {}), std::invalid_argument);
}

TEST(Confusion, InvariantUnderJointPermutation) {
  std::mt19937_64 rng(3);
  auto preds = random_vectors(40, rng);
  auto gold = random_vectors(40, rng);
  const auto before = confusion(preds, gold);
  std::vector<std::size_t> perm(40);
  for (std::size_t i = 0; i < 40; ++i) perm[i] = i;
  fisher_yates(perm, rng);
  std::vector<BiasVector> p2, g2;
  for (auto i : perm) {
    p2.push_back(preds[i]);
    g2.push_back(gold[i]);
  }
  EXPECT_EQ(confusion(p2, g2), before);
}

TEST(Scores, HarmonicMeanOfKnownPair) {
  const Counts c{86, 14, 6, 0};
  const auto s = scores(c);
  EXPECT_DOUBLE_EQ(s.precision, 0.86);
  EXPECT_NEAR(s.recall, 86.0 / 92.0, 1e-15);
  EXPECT_NEAR(s.f1, 2 * 0.86 * (86.0 / 92.0) / (0.86 + 86.0 / 92.0), 1e-15);
  EXPECT_EQ(s.support, 92u);
  // P = 0.86, R = 0.93 rounds to F1 = 0.89.
  const double f = 2 * 0.86 * 0.93 / (0.86 + 0.93);
  EXPECT_NEAR(f, 0.8936, 1e-4);
}

TEST(Scores, ZeroConventions) {
  const auto none = scores(Counts{0, 0, 0, 10});
  EXPECT_EQ(none.precision, 0.0);
  EXPECT_EQ(none.recall, 0.0);
  EXPECT_EQ(none.f1, 0.0);
  const auto all_wrong = scores(Counts{0, 3, 2, 5});
  EXPECT_EQ(all_wrong.f1, 0.0);
  const auto perfect = scores(Counts{4, 0, 0, 1});
  EXPECT_EQ(perfect.precision, 1.0);
  EXPECT_EQ(perfect.recall, 1.0);
  EXPECT_EQ(perfect.f1, 1.0);
}

TEST(Scores, F1BetweenMinAndMax) {
  std::mt19937_64 rng(4);
  for (int i = 0; i < 500; ++i) {
    const Counts c{uniform_index(rng, 50) + 1, uniform_index(rng, 50), uniform_index(rng, 50), 0};
    const auto s = scores(c);
    EXPECT_LE(std::min(s.precision, s.recall), s.f1 + 1e-15);
    EXPECT_GE(std::max(s.precision, s.recall), s.f1 - 1e-15);
  }
}

TEST(Prf1, MacroIsUnweightedMean) {
  std::mt19937_64 rng(5);
  const auto r = prf1(confusion(random_vectors(60, rng), random_vectors(60, rng)));
  double p = 0, rc = 0, f = 0;
  for (const auto& s : r.per_label) {
    p += s.precision;
    rc += s.recall;
    f += s.f1;
  }
  EXPECT_NEAR(r.macro.precision, p / 7, 1e-15);
  EXPECT_NEAR(r.macro.recall, rc / 7, 1e-15);
  EXPECT_NEAR(r.macro.f1, f / 7, 1e-15);
}

std::vector<std::string> lines_of(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

std::size_t numeric_cells(const std::string& line) {
  std::istringstream in(line);
  std::size_t n = 0;
  for (std::string tok; in >> tok;) {
    if (tok.size() == 4 && tok[1] == '.') ++n;
  }
  return n;
}

TEST(Report, PerfectModelShowsOnes) {
  std::vector<BiasVector> gold;
  for (unsigned m = 1; m < 128; ++m) gold.push_back(BiasVector::from_mask(m));
  const auto text = render_report({{"linear", prf1(confusion(gold, gold))}}, ReportFormat::kText);
  const auto lines = lines_of(text);
  for (std::size_t l = 0; l < kNumLabels; ++l) {
    const auto& row = lines.at(2 + l);
    EXPECT_EQ(row.rfind(std::string(kLabelDisplayNames[l]), 0), 0u) << row;
    EXPECT_NE(row.find("1.00  1.00  1.00"), std::string::npos) << row;
  }
  EXPECT_NE(lines.at(9).find("Macro average"), std::string::npos);
  EXPECT_NE(text.find("extension"), std::string::npos);
}

TEST(Report, TwoModelsGiveSixColumnsAndCsvAgrees) {
  std::mt19937_64 rng(7);
  const auto gold = random_vectors(80, rng);
  const std::map<std::string, EvalReport> reports = {
      {"a_model", prf1(confusion(random_vectors(80, rng), gold))},
      {"b_model", prf1(confusion(random_vectors(80, rng), gold))}};
  const auto lines = lines_of(render_report(reports, ReportFormat::kText));
  EXPECT_NE(lines[0].find("a_model"), std::string::npos);
  EXPECT_NE(lines[0].find("b_model"), std::string::npos);
  for (std::size_t l = 0; l < kNumLabels; ++l) EXPECT_EQ(numeric_cells(lines[2 + l]), 6u);

  const auto rows = io::parse_csv(render_report(reports, ReportFormat::kCsv));
  ASSERT_EQ(rows.size(), 1u + 2 * 8);
  EXPECT_EQ(rows[0].fields,
            (std::vector<std::string>{"model", "bias", "precision", "recall", "f1", "support"}));
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& f = rows[r].fields;
    const auto& rep = reports.at(f[0]);
    const LabelScores* s = &rep.macro;
    if (f[1] != "macro_avg") s = &rep.per_label[*label_index(f[1])];
    EXPECT_EQ(std::stod(f[2]), s->precision);
    EXPECT_EQ(std::stod(f[3]), s->recall);
    EXPECT_EQ(std::stod(f[4]), s->f1);
    // Two-decimal text cells are the rounded CSV values.
    char buf[16];
    std::snprintf(buf, sizeof buf, "%.2f", s->f1);
    if (f[1] != "macro_avg") {
      const auto l = *label_index(f[1]);
      EXPECT_NE(lines[2 + l].find(buf), std::string::npos);
    }
  }
}

TEST(ConfusionJson, RoundTrips) {
  std::mt19937_64 rng(8);
  const auto c = confusion(random_vectors(25, rng), random_vectors(25, rng));
  EXPECT_EQ(confusion_from_json(nlohmann::json::parse(to_json(c).dump())), c);
  auto bad = nlohmann::json::parse(to_json(c).dump());
  bad["labels"]["political"]["tp"] = 999;
  EXPECT_ANY_THROW(confusion_from_json(bad));
}

}  // namespace
}  // namespace biaslens::metrics
