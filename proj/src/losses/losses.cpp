#include "dicnet/losses/losses.hpp"

#include "dicnet/core/error.hpp"

#include <cmath>
#include <vector>

namespace dicnet {

namespace {

constexpr std::string_view kModule = "losses";

void check_view_mask(const Matrix& view_mask, Eigen::Index rows, std::size_t views) {
  if (view_mask.rows() != rows || view_mask.cols() != static_cast<Eigen::Index>(views)) {
    throw ShapeError(kModule, "view mask has shape " + to_string(shape_of(view_mask)) +
                                  ", expected " +
                                  to_string({rows, static_cast<Eigen::Index>(views)}));
  }
  if (!is_binary(view_mask)) throw ValidationError(kModule, "view mask must be 0/1");
}

// Row-normalized embeddings and same-view similarity of one view, shared by
// every pair that view takes part in.
struct ViewTerms {
  Var unit;
  Var self_similarity;
};

Var pair_loss(const ViewTerms& anchor, const ViewTerms& other, std::size_t anchor_view,
              std::size_t other_view, const Matrix& view_mask, double tau) {
  Graph& g = anchor.unit.graph();
  const Eigen::Index n = anchor.unit.shape().rows;
  const auto a = static_cast<Eigen::Index>(anchor_view);
  const auto o = static_cast<Eigen::Index>(other_view);

  Matrix identity = Matrix::Identity(n, n);
  Matrix other_gate(n, n);   // (i != j) W[j, other]
  Matrix anchor_gate(n, n);  // (i != j) W[j, anchor]
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      other_gate(i, j) = i == j ? 0.0 : view_mask(j, o);
      anchor_gate(i, j) = i == j ? 0.0 : view_mask(j, a);
    }
  }
  const Matrix pair_available = view_mask.col(a).cwiseProduct(view_mask.col(o));

  const double inv_tau = 1.0 / tau;
  Var cross = exp(scale(matmul_transposed(anchor.unit, other.unit), inv_tau));
  Var same = exp(scale(anchor.self_similarity, inv_tau));

  Var positive = sum_rows(cross * g.constant(std::move(identity)));
  Var negatives = sum_rows(cross * g.constant(std::move(other_gate))) +
                  sum_rows(same * g.constant(std::move(anchor_gate)));
  Var ratio = positive / (positive + negatives);
  Var log_ratio = log(clamp(ratio, kLogEpsilon, 1.0 - kLogEpsilon));
  Var gated = log_ratio * g.constant(pair_available);
  return scale(sum(gated), -1.0 / static_cast<double>(n));
}

ViewTerms view_terms(Var z) {
  Var unit = row_normalize(z);
  return {unit, matmul_transposed(unit, unit)};
}

void check_tau(double tau) {
  if (!(tau > 0.0) || !std::isfinite(tau)) {
    throw ValidationError(kModule, "temperature tau must be > 0");
  }
}

}  // namespace

void LossWeights::validate() const {
  check_tau(tau);
  if (!(beta >= 0.0) || !std::isfinite(beta)) {
    throw ValidationError(kModule, "beta must be finite and >= 0");
  }
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) {
    throw ValidationError(kModule, "gamma must be finite and >= 0");
  }
}

Var reconstruction_loss(std::span<const Var> inputs, std::span<const Var> reconstructions,
                        const Matrix& view_mask, ReconstructionScale scale_mode) {
  if (inputs.empty() || inputs.size() != reconstructions.size()) {
    throw ShapeError(kModule, "reconstruction loss needs one reconstruction per view, got " +
                                  std::to_string(inputs.size()) + " inputs and " +
                                  std::to_string(reconstructions.size()) + " reconstructions");
  }
  const Eigen::Index n = inputs.front().shape().rows;
  check_view_mask(view_mask, n, inputs.size());
  Graph& g = inputs.front().graph();

  Var total;
  for (std::size_t v = 0; v < inputs.size(); ++v) {
    if (inputs[v].shape() != reconstructions[v].shape() || inputs[v].shape().rows != n) {
      throw ShapeError(kModule, "view " + std::to_string(v) + ": input " +
                                    to_string(inputs[v].shape()) + " vs reconstruction " +
                                    to_string(reconstructions[v].shape()));
    }
    Var diff = reconstructions[v] - inputs[v];
    Var per_row = sum_rows(diff * diff);
    Var gated = per_row * g.constant(view_mask.col(static_cast<Eigen::Index>(v)));
    double factor = 1.0 / static_cast<double>(inputs[v].shape().cols);
    if (scale_mode == ReconstructionScale::kPerFeaturePerSample) {
      factor /= static_cast<double>(n);
    }
    Var term = scale(sum(gated), factor);
    total = v == 0 ? term : total + term;
  }
  return scale(total, 1.0 / static_cast<double>(inputs.size()));
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw ShapeError(kModule, "cosine similarity of vectors of length " +
                                  std::to_string(a.size()) + " and " + std::to_string(b.size()));
  }
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    dot += a[k] * b[k];
    na += a[k] * a[k];
    nb += b[k] * b[k];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / std::sqrt(na * nb);
}

Var cosine_similarity_matrix(Var a, Var b) {
  return matmul_transposed(row_normalize(a), row_normalize(b));
}

Var contrastive_pair_loss(Var z_anchor, Var z_other, std::size_t anchor_view,
                          std::size_t other_view, const Matrix& view_mask, double tau) {
  check_tau(tau);
  if (anchor_view == other_view) {
    throw ValidationError(kModule, "contrastive pair needs two distinct views");
  }
  if (z_anchor.shape() != z_other.shape()) {
    throw ShapeError(kModule, "representations " + to_string(z_anchor.shape()) + " and " +
                                  to_string(z_other.shape()) + " differ");
  }
  const auto needed = static_cast<Eigen::Index>(std::max(anchor_view, other_view)) + 1;
  if (view_mask.rows() != z_anchor.shape().rows || view_mask.cols() < needed) {
    throw ShapeError(kModule, "view mask " + to_string(shape_of(view_mask)) +
                                  " does not cover views " + std::to_string(anchor_view) +
                                  " and " + std::to_string(other_view));
  }
  if (!is_binary(view_mask)) throw ValidationError(kModule, "view mask must be 0/1");
  return pair_loss(view_terms(z_anchor), view_terms(z_other), anchor_view, other_view,
                   view_mask, tau);
}

Var contrastive_loss(std::span<const Var> z, const Matrix& view_mask, double tau) {
  check_tau(tau);
  if (z.empty()) throw ValidationError(kModule, "contrastive loss needs at least one view");
  Graph& g = z.front().graph();
  check_view_mask(view_mask, z.front().shape().rows, z.size());
  if (z.size() == 1) return g.constant(Matrix::Zero(1, 1));

  std::vector<ViewTerms> terms;
  for (std::size_t v = 0; v < z.size(); ++v) {
    if (z[v].shape() != z.front().shape()) {
      throw ShapeError(kModule, "representation " + std::to_string(v) + " has shape " +
                                    to_string(z[v].shape()) + ", expected " +
                                    to_string(z.front().shape()));
    }
    terms.push_back(view_terms(z[v]));
  }
  Var total;
  bool first = true;
  for (std::size_t v = 0; v < z.size(); ++v) {
    for (std::size_t u = 0; u < z.size(); ++u) {
      if (u == v) continue;
      Var term = pair_loss(terms[v], terms[u], v, u, view_mask, tau);
      total = first ? term : total + term;
      first = false;
    }
  }
  return scale(total, 0.5);
}

Var classification_loss(Var predictions, const Matrix& labels, const Matrix& label_mask) {
  const Shape s = predictions.shape();
  if (shape_of(labels) != s || shape_of(label_mask) != s) {
    throw ShapeError(kModule, "predictions " + to_string(s) + ", labels " +
                                  to_string(shape_of(labels)) + ", label mask " +
                                  to_string(shape_of(label_mask)));
  }
  if (!is_binary(labels)) throw ValidationError(kModule, "labels must be 0/1");
  if (!is_binary(label_mask)) throw ValidationError(kModule, "label mask must be 0/1");
  Graph& g = predictions.graph();

  const Matrix positive_weight = labels.cwiseProduct(label_mask);
  const Matrix negative_weight = (1.0 - labels.array()).matrix().cwiseProduct(label_mask);
  Var log_p = log(clamp(predictions, kLogEpsilon, 1.0 - kLogEpsilon));
  Var log_not_p = log(clamp(add_scalar(scale(predictions, -1.0), 1.0), kLogEpsilon,
                            1.0 - kLogEpsilon));
  Var terms = log_p * g.constant(positive_weight) + log_not_p * g.constant(negative_weight);
  return scale(sum(terms), -1.0 / static_cast<double>(s.rows * s.cols));
}

Var total_loss(Var classification, Var contrastive, Var reconstruction,
               const LossWeights& weights) {
  weights.validate();
  return classification + scale(contrastive, weights.beta) +
         scale(reconstruction, weights.gamma);
}

LossBreakdown total_loss(double classification, double contrastive, double reconstruction,
                         const LossWeights& weights) {
  weights.validate();
  LossBreakdown out;
  out.classification = classification;
  out.contrastive = contrastive;
  out.reconstruction = reconstruction;
  out.total = classification + weights.beta * contrastive + weights.gamma * reconstruction;
  return out;
}

}  // namespace dicnet
