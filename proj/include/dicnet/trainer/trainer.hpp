#pragma once

#include "dicnet/core/rng.hpp"
#include "dicnet/data/dataset.hpp"
#include "dicnet/diffcore/adam.hpp"
#include "dicnet/losses/losses.hpp"
#include "dicnet/model/model.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace dicnet {

enum class TrainingMode {
  /// Test samples join the reconstruction and contrastive terms with every
  /// label hidden.
  kSemiSupervised,
  kSupervised,
};

std::string to_string(TrainingMode mode);
TrainingMode training_mode_from_string(const std::string& name);

struct TrainConfig {
  std::size_t batch_size = 128;
  std::size_t max_epochs = 100;
  double stop_threshold = 1e-5;  // sigma
  LossWeights weights;
  double learning_rate = 1e-3;
  std::uint64_t seed = 0;
  TrainingMode mode = TrainingMode::kSemiSupervised;
  double prediction_threshold = 0.5;
  /// Threshold of the prediction-change stopping rule.
  double prediction_change_threshold = 1e-7;

  void validate() const;
};

enum class StopReason {
  kNone,
  kLossPlateau,          // |L_last - L| < sigma
  kPredictionAgreement,  // fraction of flipped test predictions < 1e-7
  kMaxEpochs,
};

std::string to_string(StopReason reason);

struct EpochReport {
  std::size_t epoch = 0;  // 1-based
  LossBreakdown losses;
  /// Fraction of test cells whose binarized prediction changed since the
  /// previous epoch; 1 on the first epoch, 0 when there is no test set.
  double prediction_change_rate = 0.0;
  double seconds = 0.0;
  bool loss_rule_met = false;
  bool prediction_rule_met = false;
  bool stopped = false;
  StopReason reason = StopReason::kNone;

  /// Record without the wall-clock field, so identical runs give identical
  /// records.
  std::string to_json() const;
};

struct TrainState {
  std::size_t epoch = 0;
  double last_loss = 0.0;
  /// Binarized test predictions of the previous epoch (n_t x c).
  Matrix last_predictions;
  AdamState optimizer;
};

struct StopDecision {
  bool stop = false;
  StopReason reason = StopReason::kNone;
  double change_rate = 0.0;
  bool loss_rule_met = false;
  bool prediction_rule_met = false;
};

/// Evaluates both stopping rules against the previous epoch. When neither
/// holds, last_loss and last_predictions are replaced by the current ones.
/// With zero test rows only the loss rule applies.
StopDecision check_stopping(TrainState& state, double loss, const Matrix& binary_predictions,
                            double sigma, double change_threshold = 1e-7);

struct Predictions {
  Matrix scores;  // P, entries in (0, 1)
  Matrix binary;  // P >= threshold
};

/// Encode every view, fuse over available views, classify.
Predictions predict(const DICNetModel& model, const MultiViewDataset& data,
                    double threshold = 0.5);

/// Loss breakdown and graph of one batch.
struct BatchLoss {
  Var total;
  Var classification;
  Var contrastive;
  Var reconstruction;
};

/// Builds the full objective for `batch` inside `graph`.
BatchLoss build_batch_loss(Graph& graph, const BoundModel& model, const MultiViewDataset& batch,
                           const LossWeights& weights);

struct TrainResult {
  DICNetModel model;
  std::vector<EpochReport> epochs;
};

using EpochCallback = std::function<void(const EpochReport&, const DICNetModel&)>;

/// Mini-batch training with the dual stopping rule. `train` carries the
/// observed labels (label_mask marks what may be used); `test` labels are
/// never read.
TrainResult train(DICNetModel model, const MultiViewDataset& train, const MultiViewDataset& test,
                  const TrainConfig& config, const EpochCallback& on_epoch = {});

}  // namespace dicnet
