#include "dicnet/trainer/trainer.hpp"

#include "dicnet/core/error.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>

namespace dicnet {

namespace {

constexpr std::string_view kModule = "trainer";
constexpr std::uint64_t kShuffleStream = 11;

// Rows of train followed by rows of test. Test labels are replaced by zeros
// and hidden by an all-zero label mask, so no loss can read them.
MultiViewDataset training_pool(const MultiViewDataset& train, const MultiViewDataset& test) {
  const Eigen::Index n_train = static_cast<Eigen::Index>(train.num_samples());
  const Eigen::Index n_test = static_cast<Eigen::Index>(test.num_samples());
  const Eigen::Index n = n_train + n_test;
  std::vector<Matrix> views;
  for (std::size_t v = 0; v < train.num_views(); ++v) {
    Matrix x(n, train.view(v).cols());
    x.topRows(n_train) = train.view(v);
    x.bottomRows(n_test) = test.view(v);
    views.push_back(std::move(x));
  }
  Matrix view_mask(n, train.view_mask().cols());
  view_mask.topRows(n_train) = train.view_mask();
  view_mask.bottomRows(n_test) = test.view_mask();
  Matrix labels = Matrix::Zero(n, train.labels().cols());
  labels.topRows(n_train) = train.labels();
  Matrix label_mask = Matrix::Zero(n, train.labels().cols());
  label_mask.topRows(n_train) = train.label_mask();
  return {std::move(views), std::move(labels), std::move(view_mask), std::move(label_mask)};
}

void check_compatible(const DICNetModel& model, const MultiViewDataset& data,
                      std::string_view what) {
  const ModelConfig& c = model.config();
  if (data.view_dims() != c.view_dims || data.num_labels() != c.num_labels) {
    throw ShapeError(kModule, std::string(what) + " does not match the model's view dims / label count");
  }
}

}  // namespace

std::string to_string(TrainingMode mode) {
  return mode == TrainingMode::kSupervised ? "supervised" : "semi-supervised";
}

TrainingMode training_mode_from_string(const std::string& name) {
  if (name == "semi-supervised" || name == "semi") return TrainingMode::kSemiSupervised;
  if (name == "supervised") return TrainingMode::kSupervised;
  throw ValidationError(kModule, "unknown training mode '" + name + "'");
}

std::string to_string(StopReason reason) {
  switch (reason) {
    case StopReason::kNone: return "none";
    case StopReason::kLossPlateau: return "loss_plateau";
    case StopReason::kPredictionAgreement: return "prediction_agreement";
    case StopReason::kMaxEpochs: return "max_epochs";
  }
  return "none";
}

void TrainConfig::validate() const {
  if (batch_size < 2) throw ValidationError(kModule, "batch size must be >= 2");
  if (max_epochs < 1) throw ValidationError(kModule, "max epochs must be >= 1");
  if (!(stop_threshold > 0.0)) throw ValidationError(kModule, "stop threshold sigma must be > 0");
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw ValidationError(kModule, "learning rate must be finite and >= 0");
  }
  if (!(prediction_threshold > 0.0 && prediction_threshold < 1.0)) {
    throw ValidationError(kModule, "prediction threshold must lie in (0, 1)");
  }
  if (!(prediction_change_threshold >= 0.0)) {
    throw ValidationError(kModule, "prediction change threshold must be >= 0");
  }
  weights.validate();
}

std::string EpochReport::to_json() const {
  nlohmann::json j = {{"epoch", epoch},
                      {"l_mc", losses.classification},
                      {"l_ic", losses.contrastive},
                      {"l_fr", losses.reconstruction},
                      {"l_total", losses.total},
                      {"prediction_change_rate", prediction_change_rate},
                      {"loss_rule_met", loss_rule_met},
                      {"prediction_rule_met", prediction_rule_met},
                      {"stopped", stopped},
                      {"reason", to_string(reason)}};
  return j.dump();
}

StopDecision check_stopping(TrainState& state, double loss, const Matrix& binary_predictions,
                            double sigma, double change_threshold) {
  if (!is_binary(binary_predictions)) {
    throw ValidationError(kModule, "stopping rule needs binarized predictions");
  }
  StopDecision d;
  d.loss_rule_met = std::abs(state.last_loss - loss) < sigma;
  const Eigen::Index cells = binary_predictions.size();
  if (cells > 0) {
    if (shape_of(state.last_predictions) != shape_of(binary_predictions)) {
      throw ShapeError(kModule, "previous predictions " +
                                    to_string(shape_of(state.last_predictions)) +
                                    " vs current " + to_string(shape_of(binary_predictions)));
    }
    const auto flipped = (binary_predictions.array() != state.last_predictions.array()).count();
    d.change_rate = static_cast<double>(flipped) / static_cast<double>(cells);
    d.prediction_rule_met = d.change_rate < change_threshold;
  }
  if (d.loss_rule_met) {
    d.stop = true;
    d.reason = StopReason::kLossPlateau;
  } else if (d.prediction_rule_met) {
    d.stop = true;
    d.reason = StopReason::kPredictionAgreement;
  } else {
    state.last_loss = loss;
    state.last_predictions = binary_predictions;
  }
  return d;
}

Predictions predict(const DICNetModel& model, const MultiViewDataset& data, double threshold) {
  check_compatible(model, data, "prediction data");
  Predictions out;
  if (data.num_samples() == 0) {
    out.scores = Matrix(0, static_cast<Eigen::Index>(model.config().num_labels));
    out.binary = out.scores;
    return out;
  }
  Graph g;
  BoundModel bound(g, model.config(), model.params());
  std::vector<Var> z;
  for (std::size_t v = 0; v < data.num_views(); ++v) {
    z.push_back(bound.encode(v, g.constant(data.view(v))));
  }
  Var p = bound.classify(fuse(z, data.view_mask()));
  out.scores = g.forward(p);
  out.binary = (out.scores.array() >= threshold).cast<double>();
  return out;
}

BatchLoss build_batch_loss(Graph& graph, const BoundModel& model, const MultiViewDataset& batch,
                           const LossWeights& weights) {
  std::vector<Var> inputs, z, recon;
  for (std::size_t v = 0; v < batch.num_views(); ++v) {
    inputs.push_back(graph.constant(batch.view(v)));
    z.push_back(model.encode(v, inputs.back()));
    recon.push_back(model.decode(v, z.back()));
  }
  BatchLoss out;
  out.reconstruction = reconstruction_loss(inputs, recon, batch.view_mask(),
                                           ReconstructionScale::kPerFeaturePerSample);
  out.contrastive = contrastive_loss(z, batch.view_mask(), weights.tau);
  Var h = fuse(z, batch.view_mask());
  out.classification = classification_loss(model.classify(h), batch.labels(), batch.label_mask());
  out.total = total_loss(out.classification, out.contrastive, out.reconstruction, weights);
  return out;
}

TrainResult train(DICNetModel model, const MultiViewDataset& train, const MultiViewDataset& test,
                  const TrainConfig& config, const EpochCallback& on_epoch) {
  config.validate();
  if (train.num_samples() == 0) throw ValidationError(kModule, "training set is empty");
  check_compatible(model, train, "training data");
  if (test.num_views() != 0) check_compatible(model, test, "test data");
  if (!train.is_zero_filled() || (test.num_views() != 0 && !test.is_zero_filled())) {
    throw ValidationError(kModule, "datasets must be zero-filled before training");
  }

  const bool semi = config.mode == TrainingMode::kSemiSupervised && test.num_samples() > 0;
  const MultiViewDataset pool = semi ? training_pool(train, test) : train;
  const std::size_t n_pool = pool.num_samples();
  const auto n_test = static_cast<Eigen::Index>(test.num_views() ? test.num_samples() : 0);

  AdamConfig adam;
  adam.learning_rate = config.learning_rate;
  TrainState state{0, 0.0, Matrix::Zero(n_test, static_cast<Eigen::Index>(train.num_labels())),
                   AdamState(adam)};
  Rng shuffler(derive_seed(config.seed, kShuffleStream));

  TrainResult result;
  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    const auto started = std::chrono::steady_clock::now();
    std::vector<std::size_t> order = shuffler.permutation(n_pool);

    double mc = 0.0, ic = 0.0, fr = 0.0;
    for (std::size_t start = 0; start < n_pool; start += config.batch_size) {
      const std::size_t stop = std::min(n_pool, start + config.batch_size);
      const std::span<const std::size_t> rows(order.data() + start, stop - start);
      const MultiViewDataset batch = pool.subset(rows);

      Graph graph;
      BoundModel bound(graph, model.config(), model.params());
      BatchLoss loss = build_batch_loss(graph, bound, batch, config.weights);
      graph.forward(loss.total);
      graph.backward(loss.total);
      adam_step(model.params(), graph.parameter_gradients(), state.optimizer);

      const double share = static_cast<double>(rows.size()) / static_cast<double>(n_pool);
      mc += share * loss.classification.item();
      ic += share * loss.contrastive.item();
      fr += share * loss.reconstruction.item();
    }
    state.epoch = epoch;

    EpochReport report;
    report.epoch = epoch;
    report.losses = total_loss(mc, ic, fr, config.weights);

    Matrix binary = Matrix::Zero(n_test, static_cast<Eigen::Index>(train.num_labels()));
    if (n_test > 0) binary = predict(model, test, config.prediction_threshold).binary;

    if (epoch == 1) {
      // Stopping is evaluated from the second epoch on; the first epoch only
      // records the reference loss and predictions.
      report.prediction_change_rate = n_test > 0 ? 1.0 : 0.0;
      state.last_loss = report.losses.total;
      state.last_predictions = binary;
    } else {
      const StopDecision d = check_stopping(state, report.losses.total, binary,
                                            config.stop_threshold,
                                            config.prediction_change_threshold);
      report.prediction_change_rate = d.change_rate;
      report.loss_rule_met = d.loss_rule_met;
      report.prediction_rule_met = d.prediction_rule_met;
      report.stopped = d.stop;
      report.reason = d.reason;
    }
    if (!report.stopped && epoch == config.max_epochs) {
      report.stopped = true;
      report.reason = StopReason::kMaxEpochs;
    }
    report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    result.epochs.push_back(report);
    if (on_epoch) on_epoch(report, model);
    if (report.stopped) break;
  }
  result.model = std::move(model);
  return result;
}

}  // namespace dicnet
