#include "dicnet/data/dataset.hpp"

#include "dicnet/core/error.hpp"

#include <cmath>

namespace dicnet {

namespace {
constexpr std::string_view kModule = "data";
}

MultiViewDataset::MultiViewDataset(std::vector<Matrix> views, Matrix labels,
                                   Matrix view_mask, Matrix label_mask)
    : views_(std::move(views)),
      labels_(std::move(labels)),
      view_mask_(std::move(view_mask)),
      label_mask_(std::move(label_mask)) {
  validate();
}

MultiViewDataset MultiViewDataset::complete(std::vector<Matrix> views, Matrix labels) {
  const Eigen::Index n = labels.rows();
  const auto l = static_cast<Eigen::Index>(views.size());
  Matrix view_mask = Matrix::Ones(n, l);
  Matrix label_mask = Matrix::Ones(n, labels.cols());
  return {std::move(views), std::move(labels), std::move(view_mask),
          std::move(label_mask)};
}

void MultiViewDataset::validate() const {
  if (views_.empty()) throw ValidationError(kModule, "dataset has no views");
  const Eigen::Index n = labels_.rows();
  const auto l = static_cast<Eigen::Index>(views_.size());
  for (std::size_t v = 0; v < views_.size(); ++v) {
    if (views_[v].rows() != n) {
      throw ShapeError(kModule, "view " + std::to_string(v) + " has " +
                                    std::to_string(views_[v].rows()) +
                                    " rows, labels have " + std::to_string(n));
    }
    if (views_[v].cols() == 0) {
      throw ShapeError(kModule, "view " + std::to_string(v) + " has no features");
    }
  }
  if (view_mask_.rows() != n || view_mask_.cols() != l) {
    throw ShapeError(kModule, "view mask has shape " + to_string(shape_of(view_mask_)) +
                                  ", expected " + to_string({n, l}));
  }
  if (shape_of(label_mask_) != shape_of(labels_)) {
    throw ShapeError(kModule, "label mask has shape " + to_string(shape_of(label_mask_)) +
                                  ", labels have " + to_string(shape_of(labels_)));
  }
  if (!is_binary(labels_)) throw ValidationError(kModule, "labels must be 0/1");
  if (!is_binary(view_mask_)) throw ValidationError(kModule, "view mask must be 0/1");
  if (!is_binary(label_mask_)) throw ValidationError(kModule, "label mask must be 0/1");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (view_mask_.row(i).sum() < 1.0) {
      throw ValidationError(kModule, "sample " + std::to_string(i) +
                                         " has no available view");
    }
    for (std::size_t v = 0; v < views_.size(); ++v) {
      if (view_mask_(i, static_cast<Eigen::Index>(v)) == 1.0 &&
          !views_[v].row(i).allFinite()) {
        throw NumericError(kModule, "available instance of sample " + std::to_string(i) +
                                        " in view " + std::to_string(v) +
                                        " is non-finite");
      }
    }
  }
}

std::size_t MultiViewDataset::view_dim(std::size_t v) const {
  return static_cast<std::size_t>(views_.at(v).cols());
}

std::vector<std::size_t> MultiViewDataset::view_dims() const {
  std::vector<std::size_t> dims;
  for (const Matrix& x : views_) dims.push_back(static_cast<std::size_t>(x.cols()));
  return dims;
}

bool MultiViewDataset::is_zero_filled() const {
  for (std::size_t v = 0; v < views_.size(); ++v) {
    for (Eigen::Index i = 0; i < views_[v].rows(); ++i) {
      if (view_mask_(i, static_cast<Eigen::Index>(v)) == 0.0 &&
          !(views_[v].row(i).array() == 0.0).all()) {
        return false;
      }
    }
  }
  return (labels_.array() * (1.0 - label_mask_.array()) == 0.0).all();
}

MultiViewDataset MultiViewDataset::subset(std::span<const std::size_t> indices) const {
  const auto rows = static_cast<Eigen::Index>(indices.size());
  auto take = [&](const Matrix& m) {
    Matrix out(rows, m.cols());
    for (Eigen::Index r = 0; r < rows; ++r) {
      const auto src = static_cast<Eigen::Index>(indices[static_cast<std::size_t>(r)]);
      if (src >= m.rows()) {
        throw ValidationError(kModule, "subset index " + std::to_string(src) +
                                           " out of range");
      }
      out.row(r) = m.row(src);
    }
    return out;
  };
  std::vector<Matrix> views;
  for (const Matrix& x : views_) views.push_back(take(x));
  MultiViewDataset out(std::move(views), take(labels_), take(view_mask_),
                       take(label_mask_));
  out.view_names = view_names;
  out.label_names = label_names;
  return out;
}

MultiViewDataset MultiViewDataset::with_view_mask(Matrix view_mask) const {
  MultiViewDataset out(views_, labels_, std::move(view_mask), label_mask_);
  out.view_names = view_names;
  out.label_names = label_names;
  return out;
}

MultiViewDataset MultiViewDataset::with_label_mask(Matrix label_mask) const {
  MultiViewDataset out(views_, labels_, view_mask_, std::move(label_mask));
  out.view_names = view_names;
  out.label_names = label_names;
  return out;
}

bool operator==(const MultiViewDataset& a, const MultiViewDataset& b) {
  if (a.views_.size() != b.views_.size()) return false;
  for (std::size_t v = 0; v < a.views_.size(); ++v) {
    if (!bitwise_equal(a.views_[v], b.views_[v])) return false;
  }
  return bitwise_equal(a.labels_, b.labels_) &&
         bitwise_equal(a.view_mask_, b.view_mask_) &&
         bitwise_equal(a.label_mask_, b.label_mask_);
}

MultiViewDataset zero_fill(const MultiViewDataset& ds) {
  std::vector<Matrix> views = ds.views();
  const Matrix& w = ds.view_mask();
  for (std::size_t v = 0; v < views.size(); ++v) {
    for (Eigen::Index i = 0; i < views[v].rows(); ++i) {
      if (w(i, static_cast<Eigen::Index>(v)) == 0.0) views[v].row(i).setZero();
    }
  }
  Matrix labels = ds.labels().cwiseProduct(ds.label_mask());
  MultiViewDataset out(std::move(views), std::move(labels), ds.view_mask(),
                       ds.label_mask());
  out.view_names = ds.view_names;
  out.label_names = ds.label_names;
  return out;
}

}  // namespace dicnet
