#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "biaslens/labels.hpp"
#include "biaslens/splitter.hpp"

namespace biaslens::trainer {

using Probabilities = std::array<double, kNumLabels>;

/// Positive-class loss multipliers, one per label.
struct ClassWeights {
  std::array<double, kNumLabels> w{1, 1, 1, 1, 1, 1, 1};

  static ClassWeights uniform() { return {}; }
};

struct TrainConfig {
  double lr0 = 0.1;
  int epochs = 6;
  int batch_size = 8;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.01;
  std::uint64_t seed = 42;
  double threshold = 0.5;
  std::size_t feature_dim = std::size_t{1} << 18;
  double w_max = 100.0;
  std::size_t max_body_chars = 50000;

  /// Learning rate used for transformer fine-tuning in the reference
  /// experiments; far too small for the linear model.
  static constexpr double kTransformerLr = 2e-5;
  static TrainConfig transformer_preset();

  /// Throws std::invalid_argument when a field is out of range.
  void validate() const;
  nlohmann::ordered_json to_json() const;
  /// Fields absent from j keep their current values.
  void merge_json(const nlohmann::json& j);
  /// sha256 of to_json().dump()
  std::string digest() const;
};

/// w_l = clip(negatives_l / positives_l, 1, w_max). Throws
/// std::invalid_argument naming the label when it has no positives.
ClassWeights compute_class_weights(const splitter::LabelMatrix& labels, double w_max = 100.0);

struct FeatureEntry {
  std::uint32_t index;
  double value;

  friend bool operator==(const FeatureEntry&, const FeatureEntry&) = default;
};

/// Sparse vector with strictly increasing indices.
struct FeatureVector {
  std::vector<FeatureEntry> entries;

  double norm() const;
  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

inline constexpr std::uint32_t kIndexHashSeed = 0x5eed0001U;
inline constexpr std::uint32_t kSignHashSeed = 0x5eed0002U;

/// Same rules as text::tokenize.
std::vector<std::string> tokenize(std::string_view text);

/// Signed feature hashing of term counts followed by L2 normalization.
/// Bucket = murmur3_32(token, kIndexHashSeed) mod dim; sign is + when bit 0
/// of murmur3_32(token, kSignHashSeed) is set. dim must be >= 2.
FeatureVector featurize(std::span<const std::string> tokens, std::size_t dim);

/// Tokens of the title followed by the first max_body_chars code points of
/// the body.
FeatureVector featurize_article(std::string_view title, std::string_view body,
                                std::size_t dim, std::size_t max_body_chars);

struct ModelState {
  explicit ModelState(std::size_t dim = 2);

  std::size_t dim;
  std::vector<double> W;  // kNumLabels x dim, row-major
  std::array<double, kNumLabels> b{};
  std::uint64_t step_count = 0;
  std::vector<double> m_W, v_W;
  std::array<double, kNumLabels> m_b{}, v_b{};

  double& weight(std::size_t label, std::size_t feature) { return W[label * dim + feature]; }
  double weight(std::size_t label, std::size_t feature) const { return W[label * dim + feature]; }
};

struct Example {
  FeatureVector x;
  BiasVector y;
};

Probabilities logits(const ModelState& model, const FeatureVector& x);
Probabilities forward(const ModelState& model, const FeatureVector& x);

inline constexpr double kProbClamp = 1e-7;

/// -(w*y*ln p + (1-y)*ln(1-p)) with p clamped to [1e-7, 1-1e-7].
double weighted_bce_term(double p, bool y, double w);
/// Mean of weighted_bce_term over the labels.
double weighted_bce(const Probabilities& p, BiasVector y, const ClassWeights& w);
/// Mean of weighted_bce over the examples.
double batch_loss(const ModelState& model, std::span<const Example> batch, const ClassWeights& w);

struct Gradients {
  std::vector<double> W;  // same layout as ModelState::W
  std::array<double, kNumLabels> b{};
};

/// Gradient of batch_loss. The logit gradient for label l of one example is
/// (w_l*y_l*(p_l-1) + (1-y_l)*p_l) / (kNumLabels * batch size), with p
/// unclamped.
Gradients gradient(const ModelState& model, std::span<const Example> batch, const ClassWeights& w);
Gradients gradient(const ModelState& model, std::span<const Example* const> batch,
                   const ClassWeights& w);

/// Decoupled weight decay Adam update of every parameter:
/// theta -= lr * (m_hat / (sqrt(v_hat) + eps) + weight_decay * theta).
/// Throws std::invalid_argument on a non-finite gradient, leaving the model
/// untouched.
void adamw_step(ModelState& model, const Gradients& grads, double lr, const TrainConfig& config);

/// lr0 * (1 - t/T), clamped at 0 once t >= T.
double linear_lr(std::uint64_t t, std::uint64_t total_steps, double lr0);

struct EpochLoss {
  int epoch = 0;
  double train_loss = 0.0;  // mean pre-update batch loss, weighted by batch size
  std::optional<double> val_loss;
};

struct TrainResult {
  ModelState model;
  std::vector<EpochLoss> history;
};

/// Mini-batch training on examples[splits.train], reshuffled every epoch with
/// a generator seeded from config.seed. Validation loss is recorded after each
/// epoch when splits.val is non-empty. Throws std::invalid_argument when the
/// training set is empty.
TrainResult train(const std::vector<Example>& examples, const splitter::Splits& splits,
                  const ClassWeights& weights, const TrainConfig& config);

BiasVector predict(const ModelState& model, const FeatureVector& x, double threshold);

/// Binary container: the line "BIASLENS-MODEL", one JSON header line
/// (feature_dim, labels, config_digest, seed, step_count), then W and b as
/// little-endian IEEE-754 doubles.
void save_model(const std::filesystem::path& path, const ModelState& model,
                const TrainConfig& config);
struct LoadedModel {
  ModelState model;
  nlohmann::json header;
};
/// Throws IoError on a bad container, wrong label order, or size mismatch.
LoadedModel load_model(const std::filesystem::path& path);

}  // namespace biaslens::trainer
