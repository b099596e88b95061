#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>

#include <nlohmann/json.hpp>

#include "biaslens/annotator.hpp"
#include "biaslens/trainer.hpp"

namespace biaslens::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

inline constexpr const char* kApiKeyEnv = "BIASLENS_API_KEY";

struct Paths {
  std::filesystem::path articles = "data/articles.jsonl";
  std::filesystem::path labeled = "out/labeled.jsonl";
  std::filesystem::path cache = "out/annotation_cache.jsonl";
  std::filesystem::path folds = "out/folds.csv";
  std::filesystem::path model = "out/model.bin";
  std::filesystem::path reports = "out/reports";
};

/// Everything a pipeline run needs. Loaded from a JSON file, then
/// overridden by flags.
struct PipelineConfig {
  Paths paths;
  annotator::LlmConfig llm;
  trainer::TrainConfig train;
  int k = 5;
  std::uint64_t seed = 42;
  int test_fold = 0;
  int val_fold = 1;
  bool allow_other_domain = false;
  std::size_t top_k = 50;

  nlohmann::ordered_json to_json() const;
  /// Fields absent from j keep their current values.
  void merge_json(const nlohmann::json& j);
};

/// Entry point shared by the biaslens executable and the tests. args[0] is
/// the program name. Returns 0 on success, 1 on operational failure and 2
/// on a usage error.
int run_cli(std::span<const std::string> args, std::ostream& out, std::ostream& err);

}  // namespace biaslens::cli
