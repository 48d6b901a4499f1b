#pragma once

#include "dicnet/data/dataset.hpp"
#include "dicnet/data/masks.hpp"
#include "dicnet/metrics/metrics.hpp"
#include "dicnet/model/model.hpp"
#include "dicnet/trainer/trainer.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace dicnet {

/// Network shape without the data-dependent parts (view dims, label count).
struct Architecture {
  std::vector<std::size_t> hidden_widths{512, 512};
  std::size_t repr_dim = 128;
  InitScheme init = InitScheme::kKaimingUniform;
};

ModelConfig model_config_for(const MultiViewDataset& data, const Architecture& arch,
                             std::uint64_t seed);

struct RunOutcome {
  EvalReport eval;
  std::vector<EpochReport> epochs;
  DICNetModel model;
  Predictions test_predictions;
};

/// Trains on the split's training rows and evaluates on its test rows.
/// `data` must already be corrupted and zero-filled.
RunOutcome run_on_split(const MultiViewDataset& data, const Split& split,
                        const Architecture& arch, TrainConfig config, std::uint64_t seed,
                        const EpochCallback& on_epoch = {});

/// Corrupts `clean` with `masks` (its seed replaced by one derived from
/// `seed`), then trains and evaluates. Model init and batch order are also
/// derived from `seed`, so one seed fixes the whole run.
RunOutcome run_experiment(const MultiViewDataset& clean, MaskSpec masks,
                          const Architecture& arch, TrainConfig config, std::uint64_t seed);

/// The four loss configurations of the ablation: MC, MC+FR, MC+IC, MC+FR+IC.
struct AblationRow {
  std::string name;
  bool reconstruction = false;
  bool contrastive = false;
};
std::vector<AblationRow> ablation_rows();
LossWeights ablate(const LossWeights& full, const AblationRow& row);

}  // namespace dicnet
