#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "biaslens/labels.hpp"

namespace biaslens::metrics {

struct Counts {
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;

  std::size_t total() const { return tp + fp + fn + tn; }
  friend bool operator==(const Counts&, const Counts&) = default;
};

struct ConfusionCounts {
  std::array<Counts, kNumLabels> per_label{};
  std::size_t examples = 0;

  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

/// Throws std::invalid_argument on length mismatch or empty input.
ConfusionCounts confusion(const std::vector<BiasVector>& preds,
                          const std::vector<BiasVector>& targets);

struct LabelScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;  // positive targets
};

struct EvalReport {
  std::array<LabelScores, kNumLabels> per_label{};
  /// Unweighted mean over labels; not part of the per-bias table.
  LabelScores macro;
};

/// P = tp/(tp+fp), R = tp/(tp+fn), F1 = 2PR/(P+R); every 0/0 is 0.
LabelScores scores(const Counts& c);
EvalReport prf1(const ConfusionCounts& counts);

enum class ReportFormat { kText, kCsv };

/// Text: one row per bias, a (P, R, F1) column triple per model, values
/// rounded to two decimals, followed by a macro-average row marked as an
/// extension. CSV: model,bias,precision,recall,f1,support at full precision,
/// including a "macro_avg" row per model.
std::string render_report(const std::map<std::string, EvalReport>& reports, ReportFormat format);

nlohmann::ordered_json to_json(const ConfusionCounts& c);
nlohmann::ordered_json to_json(const EvalReport& r);
ConfusionCounts confusion_from_json(const nlohmann::json& j);

}  // namespace biaslens::metrics
