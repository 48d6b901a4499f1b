#include "dicnet/trainer/experiment.hpp"

#include "dicnet/core/error.hpp"
#include "dicnet/core/rng.hpp"

namespace dicnet {

namespace {
constexpr std::uint64_t kMaskStream = 21;
constexpr std::uint64_t kInitStream = 22;
constexpr std::uint64_t kTrainStream = 23;
}  // namespace

ModelConfig model_config_for(const MultiViewDataset& data, const Architecture& arch,
                             std::uint64_t seed) {
  ModelConfig c;
  c.view_dims = data.view_dims();
  c.hidden_widths = arch.hidden_widths;
  c.repr_dim = arch.repr_dim;
  c.num_labels = data.num_labels();
  c.init = arch.init;
  c.seed = seed;
  return c;
}

RunOutcome run_on_split(const MultiViewDataset& data, const Split& split,
                        const Architecture& arch, TrainConfig config, std::uint64_t seed,
                        const EpochCallback& on_epoch) {
  if (split.test.empty()) {
    throw ValidationError("trainer", "evaluation needs at least one test sample");
  }
  const MultiViewDataset train_rows = data.subset(split.train);
  const MultiViewDataset test_rows = data.subset(split.test);
  config.seed = derive_seed(seed, kTrainStream);
  DICNetModel model(model_config_for(data, arch, derive_seed(seed, kInitStream)));

  TrainResult trained = train(std::move(model), train_rows, test_rows, config, on_epoch);
  RunOutcome out;
  out.test_predictions = predict(trained.model, test_rows, config.prediction_threshold);
  out.eval = evaluate_all(out.test_predictions.scores, out.test_predictions.binary,
                          test_rows.labels());
  out.epochs = std::move(trained.epochs);
  out.model = std::move(trained.model);
  return out;
}

RunOutcome run_experiment(const MultiViewDataset& clean, MaskSpec masks,
                          const Architecture& arch, TrainConfig config, std::uint64_t seed) {
  masks.seed = derive_seed(seed, kMaskStream);
  const CorruptedDataset corrupted = corrupt(clean, masks);
  return run_on_split(corrupted.data, corrupted.split, arch, config, seed);
}

std::vector<AblationRow> ablation_rows() {
  return {{"MC", false, false},
          {"MC+FR", true, false},
          {"MC+IC", false, true},
          {"MC+FR+IC", true, true}};
}

LossWeights ablate(const LossWeights& full, const AblationRow& row) {
  LossWeights w = full;
  if (!row.reconstruction) w.gamma = 0.0;
  if (!row.contrastive) w.beta = 0.0;
  return w;
}

}  // namespace dicnet
