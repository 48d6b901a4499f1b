#pragma once

#include "dicnet/data/dataset.hpp"
#include "dicnet/diffcore/tensor.hpp"

#include <cstdint>
#include <vector>

namespace dicnet {

/// Corruption protocol parameters. Rates are fractions, not percentages.
struct MaskSpec {
  double view_missing_rate = 0.0;   // p in [0, 1)
  double label_missing_rate = 0.0;  // q in [0, 1)
  double train_fraction = 1.0;      // m in (0, 1]
  std::uint64_t seed = 0;

  void validate() const;
};

/// n x l availability mask with exactly round(p * n * l) zeros and at least
/// one available view per row. Cells are visited in a seeded random order
/// and disabled while their row still has two or more available views.
Matrix generate_view_mask(std::size_t n, std::size_t l, double p, std::uint64_t seed);

/// Removes round(q * #positives) positive cells and round(q * #negatives)
/// negative cells of `labels`, chosen uniformly within each class.
Matrix generate_label_mask(const Matrix& labels, double q, std::uint64_t seed);

struct Split {
  std::vector<std::size_t> train;  // ascending
  std::vector<std::size_t> test;   // ascending
};

/// Seeded permutation; the first round(m * n) samples form the training set.
Split split_train_test(std::size_t n, double m, std::uint64_t seed);

/// A corrupted dataset: full rows with view and label masks applied, plus the
/// split. Label corruption touches training rows only; test rows keep
/// label_mask = 1 so evaluation sees full ground truth.
struct CorruptedDataset {
  MultiViewDataset data;
  Split split;
  MaskSpec spec;
};

/// View mask over all samples, then the split, then label removal over the
/// training rows, then zero fill.
CorruptedDataset corrupt(const MultiViewDataset& clean, const MaskSpec& spec);

}  // namespace dicnet
