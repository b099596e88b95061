#include "biaslens/metrics.hpp"

#include <cstdio>
#include <stdexcept>

#include "biaslens/io.hpp"

namespace biaslens::metrics {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

std::string fixed2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string full(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string pad(std::string s, std::size_t width) {
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}

std::string pad_left(std::string s, std::size_t width) {
  if (s.size() < width) s.insert(0, width - s.size(), ' ');
  return s;
}

}  // namespace

ConfusionCounts confusion(const std::vector<BiasVector>& preds,
                          const std::vector<BiasVector>& targets) {
  if (preds.size() != targets.size()) {
    throw std::invalid_argument("prediction count " + std::to_string(preds.size()) +
                                " != target count " + std::to_string(targets.size()));
  }
  if (preds.empty()) throw std::invalid_argument("no examples to evaluate");
  ConfusionCounts c;
  c.examples = preds.size();
  for (std::size_t i = 0; i < preds.size(); ++i) {
    for (std::size_t l = 0; l < kNumLabels; ++l) {
      auto& k = c.per_label[l];
      const bool p = preds[i][l];
      const bool t = targets[i][l];
      if (p && t) {
        ++k.tp;
      } else if (p) {
        ++k.fp;
      } else if (t) {
        ++k.fn;
      } else {
        ++k.tn;
      }
    }
  }
  return c;
}

LabelScores scores(const Counts& c) {
  LabelScores s;
  s.precision = ratio(c.tp, c.tp + c.fp);
  s.recall = ratio(c.tp, c.tp + c.fn);
  const double denom = s.precision + s.recall;
  s.f1 = denom == 0.0 ? 0.0 : 2.0 * s.precision * s.recall / denom;
  s.support = c.tp + c.fn;
  return s;
}

EvalReport prf1(const ConfusionCounts& counts) {
  EvalReport r;
  for (std::size_t l = 0; l < kNumLabels; ++l) {
    r.per_label[l] = scores(counts.per_label[l]);
    r.macro.precision += r.per_label[l].precision / kNumLabels;
    r.macro.recall += r.per_label[l].recall / kNumLabels;
    r.macro.f1 += r.per_label[l].f1 / kNumLabels;
    r.macro.support += r.per_label[l].support;
  }
  return r;
}

std::string render_report(const std::map<std::string, EvalReport>& reports, ReportFormat format) {
  if (format == ReportFormat::kCsv) {
    std::string out = io::csv_row({"model", "bias", "precision", "recall", "f1", "support"});
    for (const auto& [model, r] : reports) {
      for (std::size_t l = 0; l < kNumLabels; ++l) {
        const auto& s = r.per_label[l];
        out += io::csv_row({model, std::string(kLabelKeys[l]), full(s.precision), full(s.recall),
                            full(s.f1), std::to_string(s.support)});
      }
      out += io::csv_row({model, "macro_avg", full(r.macro.precision), full(r.macro.recall),
                          full(r.macro.f1), std::to_string(r.macro.support)});
    }
    return out;
  }

  constexpr std::size_t kFirst = 18;
  constexpr std::size_t kCell = 6;
  constexpr std::size_t kBlock = 3 * kCell;
  std::string out = pad("Bias", kFirst);
  for (const auto& [model, r] : reports) {
    out += "| " + pad(model.size() > kBlock - 1 ? model.substr(0, kBlock - 1) : model, kBlock);
  }
  out += "\n" + pad("", kFirst);
  for (std::size_t m = 0; m < reports.size(); ++m) {
    out += "| " + pad_left("P", kCell - 1) + " " + pad_left("R", kCell - 1) + " " +
           pad_left("F1", kCell - 1) + " ";
  }
  out += "\n";
  auto row = [&](const std::string& name, auto get) {
    std::string line = pad(name, kFirst);
    for (const auto& [model, r] : reports) {
      const LabelScores& s = get(r);
      line += "| " + pad_left(fixed2(s.precision), kCell - 1) + " " +
              pad_left(fixed2(s.recall), kCell - 1) + " " + pad_left(fixed2(s.f1), kCell - 1) + " ";
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out += line + "\n";
  };
  for (std::size_t l = 0; l < kNumLabels; ++l) {
    row(std::string(kLabelDisplayNames[l]), [l](const EvalReport& r) -> const LabelScores& {
      return r.per_label[l];
    });
  }
  row("Macro average*", [](const EvalReport& r) -> const LabelScores& { return r.macro; });
  out += "* extension: unweighted mean over the seven biases\n";
  return out;
}

ordered_json to_json(const ConfusionCounts& c) {
  ordered_json j;
  j["examples"] = c.examples;
  j["labels"] = ordered_json::object();
  for (std::size_t l = 0; l < kNumLabels; ++l) {
    const auto& k = c.per_label[l];
    j["labels"][std::string(kLabelKeys[l])] = {{"tp", k.tp}, {"fp", k.fp}, {"fn", k.fn}, {"tn", k.tn}};
  }
  return j;
}

ordered_json to_json(const EvalReport& r) {
  auto scores_json = [](const LabelScores& s) {
    return ordered_json{{"precision", s.precision},
                        {"recall", s.recall},
                        {"f1", s.f1},
                        {"support", s.support}};
  };
  ordered_json j;
  j["labels"] = ordered_json::object();
  for (std::size_t l = 0; l < kNumLabels; ++l) {
    j["labels"][std::string(kLabelKeys[l])] = scores_json(r.per_label[l]);
  }
  j["macro_avg_extension"] = scores_json(r.macro);
  return j;
}

ConfusionCounts confusion_from_json(const json& j) {
  ConfusionCounts c;
  c.examples = j.at("examples").get<std::size_t>();
  for (std::size_t l = 0; l < kNumLabels; ++l) {
    const json& k = j.at("labels").at(std::string(kLabelKeys[l]));
    c.per_label[l] = {k.at("tp").get<std::size_t>(), k.at("fp").get<std::size_t>(),
                      k.at("fn").get<std::size_t>(), k.at("tn").get<std::size_t>()};
    if (c.per_label[l].total() != c.examples) {
      throw std::invalid_argument("confusion counts for '" + std::string(kLabelKeys[l]) +
                                  "' do not sum to the example count");
    }
  }
  return c;
}

}  // namespace biaslens::metrics
