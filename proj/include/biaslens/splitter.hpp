#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "biaslens/labels.hpp"

namespace biaslens::splitter {

/// One BiasVector per example, row-aligned with a dataset.
using LabelMatrix = std::vector<BiasVector>;

struct FoldAssignment {
  int k = 1;
  std::vector<int> fold_of;  // fold id in [0, k) per example
  std::uint64_t seed = 0;
};

/// Multilabel iterative stratification.
///
/// Each fold starts with a desired size N/k and, per label, a desired
/// positive count P_l/k. Until every example carrying a positive label is
/// placed: take the label with the fewest unplaced positives (lowest index on
/// ties) and place each of its unplaced examples in the fold with the largest
/// remaining desire for that label; ties go to the fold with the largest
/// remaining size, then to a seeded uniform choice. Examples without positive
/// labels are then placed by remaining size with the same seeded tie-break.
///
/// Within a label, examples are visited grouped by label pattern, so
/// reordering the input leaves the per-fold per-label counts unchanged.
///
/// Throws std::invalid_argument when k < 1 or k > N.
FoldAssignment iterative_stratified_kfold(const LabelMatrix& labels, int k, std::uint64_t seed);

/// Shuffle-and-deal baseline: a seeded random permutation assigned
/// round-robin to folds.
FoldAssignment random_kfold(std::size_t n, int k, std::uint64_t seed);

struct Splits {
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
  std::vector<std::size_t> test;
};

/// test = examples of test_fold, val = examples of val_fold, train = the
/// rest; each list ascending. Throws std::invalid_argument for equal or
/// out-of-range folds.
Splits make_splits(const FoldAssignment& folds, int test_fold, int val_fold);

/// Max over labels and folds of |fold positive rate - global positive rate|.
/// Empty folds are skipped.
double label_divergence(const LabelMatrix& labels, const FoldAssignment& folds);

/// CSV with columns example_index,fold.
std::string render_folds_csv(const FoldAssignment& folds);
/// Reads render_folds_csv output; k is inferred as max fold + 1 unless given.
FoldAssignment parse_folds_csv(std::string_view contents, int k = 0);

}  // namespace biaslens::splitter
