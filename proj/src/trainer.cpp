#include "biaslens/trainer.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <random>
#include <stdexcept>

#include "biaslens/digest.hpp"
#include "biaslens/error.hpp"
#include "biaslens/io.hpp"
#include "biaslens/random.hpp"
#include "biaslens/text.hpp"

namespace biaslens::trainer {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

template <typename Get>
Gradients gradient_impl(const ModelState& model, std::size_t count, Get get, const ClassWeights& w) {
  Gradients g;
  g.W.assign(model.W.size(), 0.0);
  if (count == 0) return g;
  const double scale = 1.0 / (static_cast<double>(kNumLabels) * static_cast<double>(count));
  for (std::size_t i = 0; i < count; ++i) {
    const Example& ex = get(i);
    const Probabilities p = forward(model, ex.x);
    for (std::size_t l = 0; l < kNumLabels; ++l) {
      const double y = ex.y[l] ? 1.0 : 0.0;
      const double dz = (w.w[l] * y * (p[l] - 1.0) + (1.0 - y) * p[l]) * scale;
      g.b[l] += dz;
      double* row = g.W.data() + l * model.dim;
      for (const auto& e : ex.x.entries) row[e.index] += dz * e.value;
    }
  }
  return g;
}

void adam_update(double& theta, double& m, double& v, double g, double lr, double bc1, double bc2,
                 const TrainConfig& c) {
  m = c.beta1 * m + (1.0 - c.beta1) * g;
  v = c.beta2 * v + (1.0 - c.beta2) * g * g;
  const double m_hat = m / bc1;
  const double v_hat = v / bc2;
  theta -= lr * (m_hat / (std::sqrt(v_hat) + c.eps) + c.weight_decay * theta);
}

void put_u64_le(std::string& out, std::uint64_t x) {
  for (int i = 0; i < 8; ++i) out += static_cast<char>((x >> (8 * i)) & 0xFF);
}

std::uint64_t get_u64_le(std::string_view in, std::size_t pos) {
  std::uint64_t x = 0;
  for (int i = 0; i < 8; ++i) {
    x |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[pos + i])) << (8 * i);
  }
  return x;
}

constexpr std::string_view kModelMagic = "BIASLENS-MODEL\n";

}  // namespace

TrainConfig TrainConfig::transformer_preset() {
  TrainConfig c;
  c.lr0 = kTransformerLr;
  return c;
}

void TrainConfig::validate() const {
  if (!(lr0 > 0.0) || !std::isfinite(lr0)) throw std::invalid_argument("lr0 must be > 0");
  if (epochs < 1) throw std::invalid_argument("epochs must be >= 1");
  if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw std::invalid_argument("betas must be in [0,1)");
  }
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be > 0");
  if (!(weight_decay >= 0.0)) throw std::invalid_argument("weight_decay must be >= 0");
  if (!(threshold > 0.0 && threshold < 1.0)) throw std::invalid_argument("threshold must be in (0,1)");
  if (feature_dim < 2 || feature_dim > (std::size_t{1} << 32)) {
    throw std::invalid_argument("feature_dim must be in [2, 2^32]");
  }
  if (!(w_max >= 1.0)) throw std::invalid_argument("w_max must be >= 1");
}

ordered_json TrainConfig::to_json() const {
  ordered_json j;
  j["lr0"] = lr0;
  j["epochs"] = epochs;
  j["batch_size"] = batch_size;
  j["beta1"] = beta1;
  j["beta2"] = beta2;
  j["eps"] = eps;
  j["weight_decay"] = weight_decay;
  j["seed"] = seed;
  j["threshold"] = threshold;
  j["feature_dim"] = feature_dim;
  j["w_max"] = w_max;
  j["max_body_chars"] = max_body_chars;
  return j;
}

void TrainConfig::merge_json(const json& j) {
  if (!j.is_object()) throw std::invalid_argument("train config must be an object");
  lr0 = j.value("lr0", lr0);
  epochs = j.value("epochs", epochs);
  batch_size = j.value("batch_size", batch_size);
  beta1 = j.value("beta1", beta1);
  beta2 = j.value("beta2", beta2);
  eps = j.value("eps", eps);
  weight_decay = j.value("weight_decay", weight_decay);
  seed = j.value("seed", seed);
  threshold = j.value("threshold", threshold);
  feature_dim = j.value("feature_dim", feature_dim);
  w_max = j.value("w_max", w_max);
  max_body_chars = j.value("max_body_chars", max_body_chars);
}

std::string TrainConfig::digest() const { return sha256_hex(to_json().dump()); }

ClassWeights compute_class_weights(const splitter::LabelMatrix& labels, double w_max) {
  ClassWeights cw;
  for (std::size_t l = 0; l < kNumLabels; ++l) {
    std::size_t pos = 0;
    for (const auto& row : labels) pos += row[l] ? 1 : 0;
    if (pos == 0) {
      throw std::invalid_argument("label '" + std::string(kLabelKeys[l]) +
                                  "' has no positive examples");
    }
    const double ratio = static_cast<double>(labels.size() - pos) / static_cast<double>(pos);
    cw.w[l] = std::clamp(ratio, 1.0, w_max);
  }
  return cw;
}

double FeatureVector::norm() const {
  double s = 0.0;
  for (const auto& e : entries) s += e.value * e.value;
  return std::sqrt(s);
}

std::vector<std::string> tokenize(std::string_view text) { return text::tokenize(text); }

FeatureVector featurize(std::span<const std::string> tokens, std::size_t dim) {
  if (dim < 2) throw std::invalid_argument("feature dimension must be >= 2");
  std::map<std::uint32_t, double> buckets;
  for (const auto& tok : tokens) {
    const auto index = static_cast<std::uint32_t>(murmur3_32(tok, kIndexHashSeed) % dim);
    const double sign = (murmur3_32(tok, kSignHashSeed) & 1U) ? 1.0 : -1.0;
    buckets[index] += sign;
  }
  FeatureVector fv;
  double sq = 0.0;
  for (const auto& [index, value] : buckets) {
    if (value == 0.0) continue;
    fv.entries.push_back({index, value});
    sq += value * value;
  }
  if (sq > 0.0) {
    const double inv = 1.0 / std::sqrt(sq);
    for (auto& e : fv.entries) e.value *= inv;
  }
  return fv;
}

FeatureVector featurize_article(std::string_view title, std::string_view body, std::size_t dim,
                                std::size_t max_body_chars) {
  auto tokens = text::tokenize(title);
  auto body_tokens = text::tokenize(text::utf8_prefix(body, max_body_chars));
  tokens.insert(tokens.end(), std::make_move_iterator(body_tokens.begin()),
                std::make_move_iterator(body_tokens.end()));
  return featurize(tokens, dim);
}

ModelState::ModelState(std::size_t dim)
    : dim(dim), W(kNumLabels * dim, 0.0), m_W(kNumLabels * dim, 0.0), v_W(kNumLabels * dim, 0.0) {}

Probabilities logits(const ModelState& model, const FeatureVector& x) {
  Probabilities z = model.b;
  for (std::size_t l = 0; l < kNumLabels; ++l) {
    const double* row = model.W.data() + l * model.dim;
    for (const auto& e : x.entries) z[l] += row[e.index] * e.value;
  }
  return z;
}

Probabilities forward(const ModelState& model, const FeatureVector& x) {
  Probabilities p = logits(model, x);
  for (double& v : p) v = sigmoid(v);
  return p;
}

double weighted_bce_term(double p, bool y, double w) {
  const double q = std::clamp(p, kProbClamp, 1.0 - kProbClamp);
  return y ? -w * std::log(q) : -std::log(1.0 - q);
}

double weighted_bce(const Probabilities& p, BiasVector y, const ClassWeights& w) {
  double s = 0.0;
  for (std::size_t l = 0; l < kNumLabels; ++l) s += weighted_bce_term(p[l], y[l], w.w[l]);
  return s / static_cast<double>(kNumLabels);
}

double batch_loss(const ModelState& model, std::span<const Example> batch, const ClassWeights& w) {
  if (batch.empty()) return 0.0;
  double s = 0.0;
  for (const auto& ex : batch) s += weighted_bce(forward(model, ex.x), ex.y, w);
  return s / static_cast<double>(batch.size());
}

Gradients gradient(const ModelState& model, std::span<const Example> batch, const ClassWeights& w) {
  return gradient_impl(model, batch.size(), [&](std::size_t i) -> const Example& { return batch[i]; }, w);
}

Gradients gradient(const ModelState& model, std::span<const Example* const> batch,
                   const ClassWeights& w) {
  return gradient_impl(model, batch.size(), [&](std::size_t i) -> const Example& { return *batch[i]; }, w);
}

void adamw_step(ModelState& model, const Gradients& grads, double lr, const TrainConfig& config) {
  if (grads.W.size() != model.W.size()) throw std::invalid_argument("gradient shape mismatch");
  for (double g : grads.W) {
    if (!std::isfinite(g)) throw std::invalid_argument("non-finite gradient");
  }
  for (double g : grads.b) {
    if (!std::isfinite(g)) throw std::invalid_argument("non-finite gradient");
  }
  const double t = static_cast<double>(model.step_count + 1);
  const double bc1 = 1.0 - std::pow(config.beta1, t);
  const double bc2 = 1.0 - std::pow(config.beta2, t);
  for (std::size_t i = 0; i < model.W.size(); ++i) {
    adam_update(model.W[i], model.m_W[i], model.v_W[i], grads.W[i], lr, bc1, bc2, config);
  }
  for (std::size_t l = 0; l < kNumLabels; ++l) {
    adam_update(model.b[l], model.m_b[l], model.v_b[l], grads.b[l], lr, bc1, bc2, config);
  }
  ++model.step_count;
}

double linear_lr(std::uint64_t t, std::uint64_t total_steps, double lr0) {
  if (total_steps == 0 || t >= total_steps) return 0.0;
  return lr0 * (1.0 - static_cast<double>(t) / static_cast<double>(total_steps));
}

TrainResult train(const std::vector<Example>& examples, const splitter::Splits& splits,
                  const ClassWeights& weights, const TrainConfig& config) {
  config.validate();
  if (splits.train.empty()) throw std::invalid_argument("training set is empty");
  for (const auto& ex : examples) {
    if (!ex.x.entries.empty() && ex.x.entries.back().index >= config.feature_dim) {
      throw std::invalid_argument("feature index exceeds feature_dim");
    }
  }
  TrainResult result{ModelState(config.feature_dim), {}};
  ModelState& model = result.model;

  std::vector<std::size_t> order = splits.train;
  const std::size_t bs = static_cast<std::size_t>(config.batch_size);
  const std::uint64_t batches_per_epoch = (order.size() + bs - 1) / bs;
  const std::uint64_t total_steps = batches_per_epoch * static_cast<std::uint64_t>(config.epochs);

  std::vector<Example> val;
  for (std::size_t i : splits.val) val.push_back(examples.at(i));

  std::mt19937_64 rng(config.seed);
  std::vector<const Example*> batch;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    fisher_yates(order, rng);
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += bs) {
      batch.clear();
      for (std::size_t i = start; i < std::min(order.size(), start + bs); ++i) {
        batch.push_back(&examples.at(order[i]));
      }
      for (const Example* ex : batch) loss_sum += weighted_bce(forward(model, ex->x), ex->y, weights);
      const Gradients g = gradient(model, std::span<const Example* const>(batch), weights);
      adamw_step(model, g, linear_lr(model.step_count, total_steps, config.lr0), config);
    }
    EpochLoss h;
    h.epoch = epoch;
    h.train_loss = loss_sum / static_cast<double>(order.size());
    if (!val.empty()) h.val_loss = batch_loss(model, val, weights);
    result.history.push_back(h);
  }
  return result;
}

BiasVector predict(const ModelState& model, const FeatureVector& x, double threshold) {
  const Probabilities p = forward(model, x);
  BiasVector v;
  for (std::size_t l = 0; l < kNumLabels; ++l) v.set(l, p[l] >= threshold);
  return v;
}

void save_model(const std::filesystem::path& path, const ModelState& model,
                const TrainConfig& config) {
  ordered_json header;
  header["format_version"] = 1;
  header["feature_dim"] = model.dim;
  header["labels"] = ordered_json::array();
  for (auto key : kLabelKeys) header["labels"].push_back(key);
  header["config_digest"] = config.digest();
  header["seed"] = config.seed;
  header["step_count"] = model.step_count;
  header["feature_hash"] = "murmur3_32";
  header["index_seed"] = kIndexHashSeed;
  header["sign_seed"] = kSignHashSeed;
  header["config"] = config.to_json();

  std::string out(kModelMagic);
  out += header.dump();
  out += '\n';
  out.reserve(out.size() + 8 * (model.W.size() + kNumLabels));
  for (double v : model.W) put_u64_le(out, std::bit_cast<std::uint64_t>(v));
  for (double v : model.b) put_u64_le(out, std::bit_cast<std::uint64_t>(v));
  io::write_file_atomic(path, out);
}

LoadedModel load_model(const std::filesystem::path& path) {
  const std::string data = io::read_file(path);
  if (data.rfind(kModelMagic, 0) != 0) throw IoError(path.string() + ": not a model file");
  const auto header_end = data.find('\n', kModelMagic.size());
  if (header_end == std::string::npos) throw IoError(path.string() + ": truncated header");
  const json header =
      json::parse(std::string_view(data).substr(kModelMagic.size(), header_end - kModelMagic.size()),
                  nullptr, false);
  if (header.is_discarded() || !header.is_object()) throw IoError(path.string() + ": bad header");

  const auto labels = header.value("labels", json::array());
  if (!labels.is_array() || labels.size() != kNumLabels) {
    throw IoError(path.string() + ": label order mismatch");
  }
  for (std::size_t l = 0; l < kNumLabels; ++l) {
    if (!labels[l].is_string() || labels[l].get<std::string>() != kLabelKeys[l]) {
      throw IoError(path.string() + ": label order mismatch");
    }
  }
  const std::size_t dim = header.value("feature_dim", std::size_t{0});
  if (dim < 2) throw IoError(path.string() + ": bad feature_dim");
  const std::size_t expected = 8 * (kNumLabels * dim + kNumLabels);
  if (data.size() - header_end - 1 != expected) {
    throw IoError(path.string() + ": payload size does not match feature_dim");
  }

  LoadedModel lm{ModelState(dim), header};
  std::size_t pos = header_end + 1;
  for (double& v : lm.model.W) {
    v = std::bit_cast<double>(get_u64_le(data, pos));
    pos += 8;
  }
  for (double& v : lm.model.b) {
    v = std::bit_cast<double>(get_u64_le(data, pos));
    pos += 8;
  }
  lm.model.step_count = header.value("step_count", std::uint64_t{0});
  return lm;
}

}  // namespace biaslens::trainer
