#include "dicnet/data/masks.hpp"

#include "dicnet/core/error.hpp"
#include "dicnet/core/rng.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace dicnet {

namespace {

constexpr std::string_view kModule = "data";

// Independent sub-streams of a corruption seed.
constexpr std::uint64_t kViewStream = 1;
constexpr std::uint64_t kSplitStream = 2;
constexpr std::uint64_t kLabelStream = 3;

void check_rate(double rate, std::string_view what) {
  if (!(rate >= 0.0 && rate < 1.0)) {
    std::ostringstream msg;
    msg << what << " must lie in [0, 1), got " << rate;
    throw ValidationError(kModule, msg.str());
  }
}

}  // namespace

void MaskSpec::validate() const {
  check_rate(view_missing_rate, "view missing rate p");
  check_rate(label_missing_rate, "label missing rate q");
  if (!(train_fraction > 0.0 && train_fraction <= 1.0)) {
    std::ostringstream msg;
    msg << "train fraction m must lie in (0, 1], got " << train_fraction;
    throw ValidationError(kModule, msg.str());
  }
}

Matrix generate_view_mask(std::size_t n, std::size_t l, double p, std::uint64_t seed) {
  check_rate(p, "view missing rate p");
  if (l == 0) throw ValidationError(kModule, "view count must be >= 1");
  const std::size_t quota = round_half_up(p * static_cast<double>(n * l));

  Matrix mask = Matrix::Ones(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(l));
  std::vector<std::size_t> available(n, l);
  Rng rng(seed);
  std::size_t disabled = 0;
  if (quota > 0) {
    for (std::size_t cell : rng.permutation(n * l)) {
      if (disabled == quota) break;
      const std::size_t i = cell / l;
      const std::size_t v = cell % l;
      if (available[i] < 2) continue;
      mask(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(v)) = 0.0;
      --available[i];
      ++disabled;
    }
  }
  if (disabled < quota) {
    std::ostringstream msg;
    msg << "cannot disable " << quota << " of " << n * l
        << " instances while keeping one view per sample; the highest reachable"
        << " missing rate with " << l << " views is (l-1)/l = "
        << static_cast<double>(l - 1) / static_cast<double>(l);
    throw ValidationError(kModule, msg.str());
  }
  return mask;
}

Matrix generate_label_mask(const Matrix& labels, double q, std::uint64_t seed) {
  check_rate(q, "label missing rate q");
  if (!is_binary(labels)) throw ValidationError(kModule, "labels must be 0/1");

  std::vector<Eigen::Index> positives;
  std::vector<Eigen::Index> negatives;
  for (Eigen::Index k = 0; k < labels.size(); ++k) {
    (labels.data()[k] == 1.0 ? positives : negatives).push_back(k);
  }
  Matrix mask = Matrix::Ones(labels.rows(), labels.cols());
  Rng rng(seed);
  for (auto* cells : {&positives, &negatives}) {
    rng.shuffle(std::span<Eigen::Index>(*cells));
    const std::size_t remove = round_half_up(q * static_cast<double>(cells->size()));
    for (std::size_t k = 0; k < remove; ++k) mask.data()[(*cells)[k]] = 0.0;
  }
  return mask;
}

Split split_train_test(std::size_t n, double m, std::uint64_t seed) {
  if (n == 0) throw ValidationError(kModule, "cannot split an empty dataset");
  if (!(m > 0.0 && m <= 1.0)) {
    throw ValidationError(kModule, "train fraction m must lie in (0, 1]");
  }
  Rng rng(seed);
  std::vector<std::size_t> order = rng.permutation(n);
  const std::size_t n_train = std::min(n, round_half_up(m * static_cast<double>(n)));
  Split split;
  split.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  split.test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

CorruptedDataset corrupt(const MultiViewDataset& clean, const MaskSpec& spec) {
  spec.validate();
  const std::size_t n = clean.num_samples();
  Matrix view_mask = generate_view_mask(n, clean.num_views(), spec.view_missing_rate,
                                        derive_seed(spec.seed, kViewStream));
  // Existing missingness in the input is preserved.
  view_mask = view_mask.cwiseProduct(clean.view_mask());
  for (Eigen::Index i = 0; i < view_mask.rows(); ++i) {
    if (view_mask.row(i).sum() < 1.0) {
      throw ValidationError(kModule, "sample " + std::to_string(i) +
                                         " lost every view; input already has missing views");
    }
  }
  Split split = split_train_test(n, spec.train_fraction, derive_seed(spec.seed, kSplitStream));

  Matrix train_labels(static_cast<Eigen::Index>(split.train.size()), clean.labels().cols());
  for (std::size_t r = 0; r < split.train.size(); ++r) {
    train_labels.row(static_cast<Eigen::Index>(r)) =
        clean.labels().row(static_cast<Eigen::Index>(split.train[r]));
  }
  const Matrix train_mask = generate_label_mask(train_labels, spec.label_missing_rate,
                                                derive_seed(spec.seed, kLabelStream));
  Matrix label_mask = clean.label_mask();
  for (std::size_t r = 0; r < split.train.size(); ++r) {
    const auto i = static_cast<Eigen::Index>(split.train[r]);
    label_mask.row(i) = label_mask.row(i).cwiseProduct(train_mask.row(static_cast<Eigen::Index>(r)));
  }

  MultiViewDataset data = clean.with_view_mask(std::move(view_mask));
  data = data.with_label_mask(std::move(label_mask));
  return {zero_fill(data), std::move(split), spec};
}

}  // namespace dicnet
