#include "biaslens/splitter.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include "biaslens/error.hpp"
#include "biaslens/io.hpp"
#include "biaslens/random.hpp"

namespace biaslens::splitter {
namespace {

// Picks the fold maximizing (primary, size); remaining ties resolved by rng.
int choose_fold(const std::vector<double>* primary, const std::vector<double>& size,
                std::mt19937_64& rng) {
  const int k = static_cast<int>(size.size());
  std::vector<int> best;
  for (int j = 0; j < k; ++j) {
    if (best.empty()) {
      best.push_back(j);
      continue;
    }
    const int b = best.front();
    const double pj = primary ? (*primary)[j] : 0.0;
    const double pb = primary ? (*primary)[b] : 0.0;
    if (pj > pb || (pj == pb && size[j] > size[b])) {
      best.assign(1, j);
    } else if (pj == pb && size[j] == size[b]) {
      best.push_back(j);
    }
  }
  if (best.size() == 1) return best.front();
  return best[uniform_index(rng, best.size())];
}

}  // namespace

FoldAssignment iterative_stratified_kfold(const LabelMatrix& labels, int k, std::uint64_t seed) {
  const std::size_t n = labels.size();
  if (k < 1) throw std::invalid_argument("k must be >= 1");
  if (static_cast<std::size_t>(k) > n) {
    throw std::invalid_argument("k = " + std::to_string(k) + " exceeds the " + std::to_string(n) +
                                " examples");
  }

  FoldAssignment out;
  out.k = k;
  out.seed = seed;
  out.fold_of.assign(n, -1);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return labels[a].mask() < labels[b].mask();
  });

  std::vector<double> desired_size(k, static_cast<double>(n) / k);
  // desired_label[l][j]
  std::vector<std::vector<double>> desired_label(kNumLabels, std::vector<double>(k, 0.0));
  for (std::size_t l = 0; l < kNumLabels; ++l) {
    std::size_t positives = 0;
    for (const auto& row : labels) positives += row[l] ? 1 : 0;
    std::fill(desired_label[l].begin(), desired_label[l].end(),
              static_cast<double>(positives) / k);
  }

  std::mt19937_64 rng(seed);
  auto place = [&](std::size_t example, int fold) {
    out.fold_of[example] = fold;
    desired_size[fold] -= 1.0;
    for (std::size_t l = 0; l < kNumLabels; ++l) {
      if (labels[example][l]) desired_label[l][fold] -= 1.0;
    }
  };

  while (true) {
    std::size_t best_label = kNumLabels;
    std::size_t best_remaining = 0;
    for (std::size_t l = 0; l < kNumLabels; ++l) {
      std::size_t remaining = 0;
      for (std::size_t e = 0; e < n; ++e) {
        if (out.fold_of[e] < 0 && labels[e][l]) ++remaining;
      }
      if (remaining > 0 && (best_label == kNumLabels || remaining < best_remaining)) {
        best_label = l;
        best_remaining = remaining;
      }
    }
    if (best_label == kNumLabels) break;
    for (std::size_t e : order) {
      if (out.fold_of[e] >= 0 || !labels[e][best_label]) continue;
      place(e, choose_fold(&desired_label[best_label], desired_size, rng));
    }
  }

  for (std::size_t e : order) {
    if (out.fold_of[e] < 0) place(e, choose_fold(nullptr, desired_size, rng));
  }
  return out;
}

FoldAssignment random_kfold(std::size_t n, int k, std::uint64_t seed) {
  if (k < 1 || static_cast<std::size_t>(k) > n) throw std::invalid_argument("invalid k");
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937_64 rng(seed);
  fisher_yates(perm, rng);
  FoldAssignment out{k, std::vector<int>(n), seed};
  for (std::size_t i = 0; i < n; ++i) out.fold_of[perm[i]] = static_cast<int>(i % k);
  return out;
}

Splits make_splits(const FoldAssignment& folds, int test_fold, int val_fold) {
  if (test_fold < 0 || test_fold >= folds.k) throw std::invalid_argument("test fold out of range");
  if (val_fold < 0 || val_fold >= folds.k) throw std::invalid_argument("validation fold out of range");
  if (test_fold == val_fold) throw std::invalid_argument("test and validation folds must differ");
  Splits s;
  for (std::size_t i = 0; i < folds.fold_of.size(); ++i) {
    const int f = folds.fold_of[i];
    if (f == test_fold) {
      s.test.push_back(i);
    } else if (f == val_fold) {
      s.val.push_back(i);
    } else {
      s.train.push_back(i);
    }
  }
  return s;
}

double label_divergence(const LabelMatrix& labels, const FoldAssignment& folds) {
  const std::size_t n = labels.size();
  if (n == 0) return 0.0;
  std::vector<std::size_t> fold_size(folds.k, 0);
  std::vector<std::vector<std::size_t>> fold_pos(folds.k, std::vector<std::size_t>(kNumLabels, 0));
  std::vector<std::size_t> global_pos(kNumLabels, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const int f = folds.fold_of.at(i);
    ++fold_size[f];
    for (std::size_t l = 0; l < kNumLabels; ++l) {
      if (labels[i][l]) {
        ++fold_pos[f][l];
        ++global_pos[l];
      }
    }
  }
  double worst = 0.0;
  for (int f = 0; f < folds.k; ++f) {
    if (fold_size[f] == 0) continue;
    for (std::size_t l = 0; l < kNumLabels; ++l) {
      const double fold_rate = static_cast<double>(fold_pos[f][l]) / fold_size[f];
      const double global_rate = static_cast<double>(global_pos[l]) / n;
      worst = std::max(worst, std::abs(fold_rate - global_rate));
    }
  }
  return worst;
}

std::string render_folds_csv(const FoldAssignment& folds) {
  std::string out = "# k=" + std::to_string(folds.k) + " seed=" + std::to_string(folds.seed) + "\n";
  out += "example_index,fold\n";
  for (std::size_t i = 0; i < folds.fold_of.size(); ++i) {
    out += std::to_string(i) + "," + std::to_string(folds.fold_of[i]) + "\n";
  }
  return out;
}

FoldAssignment parse_folds_csv(std::string_view contents, int k) {
  FoldAssignment out;
  int header_k = 0;
  const auto lines = io::split_lines(contents);
  if (!lines.empty() && !lines.front().empty() && lines.front().front() == '#') {
    std::istringstream ss{std::string(lines.front().substr(1))};
    std::string item;
    while (ss >> item) {
      if (item.rfind("k=", 0) == 0) header_k = std::stoi(item.substr(2));
      if (item.rfind("seed=", 0) == 0) out.seed = std::stoull(item.substr(5));
    }
  }
  const auto records = io::parse_csv(contents);
  if (records.empty() || records.front().fields != std::vector<std::string>{"example_index", "fold"}) {
    throw ValidationError("fold file header must be example_index,fold");
  }
  std::vector<std::pair<std::size_t, int>> rows;
  int max_fold = -1;
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& f = records[r].fields;
    if (f.size() != 2) throw ValidationError("fold file line " + std::to_string(records[r].line) + ": expected 2 fields");
    try {
      const std::size_t index = std::stoull(f[0]);
      const int fold = std::stoi(f[1]);
      if (fold < 0) throw std::out_of_range("negative fold");
      rows.emplace_back(index, fold);
      max_fold = std::max(max_fold, fold);
    } catch (const std::logic_error&) {
      throw ValidationError("fold file line " + std::to_string(records[r].line) + ": bad number");
    }
  }
  out.k = k > 0 ? k : (header_k > 0 ? header_k : max_fold + 1);
  out.fold_of.assign(rows.size(), -1);
  for (const auto& [index, fold] : rows) {
    if (index >= rows.size() || out.fold_of[index] != -1) {
      throw ValidationError("fold file indices must be a permutation of 0..N-1");
    }
    if (fold >= out.k) throw ValidationError("fold id " + std::to_string(fold) + " >= k");
    out.fold_of[index] = fold;
  }
  return out;
}

}  // namespace biaslens::splitter
