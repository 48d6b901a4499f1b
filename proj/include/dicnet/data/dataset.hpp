#pragma once

#include "dicnet/diffcore/tensor.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace dicnet {

/// Double-incomplete multi-view multi-label data.
///
///   views[v]   : n x m_v features of view v
///   labels     : n x c, entries in {0, 1}
///   view_mask  : n x l, 1 where the instance of view v is available
///   label_mask : n x c, 1 where the label is observed
///
/// The constructor checks shapes, binary masks and that every sample keeps at
/// least one view. Available feature rows must be finite; missing rows may
/// hold anything (NaN included) until zero_fill() canonicalizes them.
class MultiViewDataset {
 public:
  MultiViewDataset() = default;
  MultiViewDataset(std::vector<Matrix> views, Matrix labels, Matrix view_mask,
                   Matrix label_mask);

  /// All-ones masks.
  static MultiViewDataset complete(std::vector<Matrix> views, Matrix labels);

  std::size_t num_samples() const { return static_cast<std::size_t>(labels_.rows()); }
  std::size_t num_views() const { return views_.size(); }
  std::size_t num_labels() const { return static_cast<std::size_t>(labels_.cols()); }
  std::size_t view_dim(std::size_t v) const;
  std::vector<std::size_t> view_dims() const;

  const std::vector<Matrix>& views() const { return views_; }
  const Matrix& view(std::size_t v) const { return views_.at(v); }
  const Matrix& labels() const { return labels_; }
  const Matrix& view_mask() const { return view_mask_; }
  const Matrix& label_mask() const { return label_mask_; }

  std::vector<std::string> view_names;
  std::vector<std::string> label_names;

  /// True when missing instances are zero rows and unobserved labels are 0.
  bool is_zero_filled() const;

  /// Rows `indices` (in the given order) of every matrix.
  MultiViewDataset subset(std::span<const std::size_t> indices) const;

  MultiViewDataset with_view_mask(Matrix view_mask) const;
  MultiViewDataset with_label_mask(Matrix label_mask) const;

  friend bool operator==(const MultiViewDataset& a, const MultiViewDataset& b);

 private:
  void validate() const;

  std::vector<Matrix> views_;
  Matrix labels_;
  Matrix view_mask_;
  Matrix label_mask_;
};

/// Missing instances become zero rows and unobserved labels become 0.
/// Idempotent. Throws if an available feature is non-finite.
MultiViewDataset zero_fill(const MultiViewDataset& ds);

}  // namespace dicnet
