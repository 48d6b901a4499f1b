#pragma once

#include "dicnet/diffcore/graph.hpp"
#include "dicnet/diffcore/tensor.hpp"

#include <span>

namespace dicnet {

/// Clamp applied to every log argument.
inline constexpr double kLogEpsilon = 1e-12;

struct LossWeights {
  double beta = 2e-3;   // contrastive weight
  double gamma = 8e-2;  // reconstruction weight
  double tau = 0.5;     // temperature

  void validate() const;
};

struct LossBreakdown {
  double classification = 0.0;  // L_MC
  double contrastive = 0.0;     // L_IC
  double reconstruction = 0.0;  // L_FR
  double total = 0.0;
};

enum class ReconstructionScale {
  /// (1/l) sum_v (1/m_v) sum_i ||x^_i - x_i||^2 W[i,v]
  kPerFeature,
  /// Same, with each view term additionally divided by the row count, so
  /// the value does not grow with batch size.
  kPerFeaturePerSample,
};

/// Masked reconstruction loss over all views.
Var reconstruction_loss(std::span<const Var> inputs, std::span<const Var> reconstructions,
                        const Matrix& view_mask,
                        ReconstructionScale scale = ReconstructionScale::kPerFeaturePerSample);

/// <a, b> / (|a| |b|); 0 when either vector is zero.
double cosine_similarity(std::span<const double> a, std::span<const double> b);

/// n x n matrix of cosine similarities between rows of a and rows of b.
Var cosine_similarity_matrix(Var a, Var b);

/// Contrastive loss of anchor view v against view u:
///   -(1/n) sum_i W[i,v] W[i,u] log( e(i,i) / (e(i,i) + S_neg(i)) )
/// with e(i,j) = exp(S(z_i(v), z_j(u)) / tau) and
///   S_neg(i) = sum_{r in {u,v}} sum_{j != i} exp(S(z_i(v), z_j(r)) / tau) W[j,r].
Var contrastive_pair_loss(Var z_anchor, Var z_other, std::size_t anchor_view,
                          std::size_t other_view, const Matrix& view_mask, double tau);

/// (1/2) sum over ordered view pairs (v, u), u != v, of the pair loss.
Var contrastive_loss(std::span<const Var> z, const Matrix& view_mask, double tau);

/// Masked binary cross-entropy, normalised by n * c.
Var classification_loss(Var predictions, const Matrix& labels, const Matrix& label_mask);

/// L = L_MC + beta L_IC + gamma L_FR inside the graph.
Var total_loss(Var classification, Var contrastive, Var reconstruction,
               const LossWeights& weights);

/// The same combination on plain scalars.
LossBreakdown total_loss(double classification, double contrastive, double reconstruction,
                         const LossWeights& weights);

}  // namespace dicnet
