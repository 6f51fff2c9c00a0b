#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "gaminet/data.hpp"
#include "gaminet/model.hpp"
#include "gaminet/screen.hpp"

namespace gaminet {

struct TrainConfig {
  std::vector<int> subnet_layers{40, 40, 40, 40, 40};
  Activation activation = Activation::kRelu;
  double learning_rate = 1e-4;
  int epochs_stage1 = 5000;
  int epochs_stage2 = 5000;
  int epochs_stage3 = 500;
  int batch_size = 0;  // 0: min(1000, max(32, n/20))
  int early_stop_patience = 50;
  double tolerance_eta = 0.01;
  int max_interactions = 20;
  double clarity_lambda = 0.1;
  Heredity heredity = Heredity::kWeak;
  std::uint64_t seed = 0;
  int screen_bins = 8;
  int threads = 1;

  void validate() const;
  int resolve_batch_size(int n_train) const;

  static TrainConfig from_toml(const TomlTable& table);
  TomlTable to_toml_unsupported() = delete;
};

struct PruneResult {
  std::vector<EffectId> ordered_effect_ids;   // descending D
  std::vector<double> cumulative_val_losses;  // l0..lm
  int selected_count = 0;
  double threshold = 0.0;
};

struct EpochRecord {
  int epoch = 0;  // 1-based within the stage
  int stage = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
};

struct TrainingTrace {
  std::vector<EpochRecord> epochs;
  std::vector<std::string> events;  // stage boundaries and prune outcomes

  int executed_epochs(int stage) const;
  double min_val_loss(int stage) const;
  void append(TrainingTrace&& other);
  std::string to_csv() const;
};

struct FitResult {
  GamiNetModel model;
  TrainingTrace trace;
  PruneResult prune_mains;
  PruneResult prune_interactions;
  double final_val_loss = 0.0;
};

/// The (1 + eta) rule: losses[i] is the validation loss of the model with
/// the top-i candidates; the selection is the minimal i whose loss is at
/// most (1 + eta) * min(losses).
PruneResult prune(const std::vector<EffectId>& ordered_candidates,
                  const std::function<double(int)>& cumulative_val_loss,
                  double tolerance_eta);

/// Stage 1: trains every candidate main effect (and the intercept) with
/// mini-batch Adam and early stopping on validation loss, restores the best
/// checkpoint, then centers the effects.
TrainingTrace train_main_effects(GamiNetModel& model, const Dataset& train,
                                 const Dataset& validation, const TrainConfig& config);

/// Stage 2: trains the candidate interaction subnetworks against the full
/// loss plus the marginal-clarity penalty, with every main effect frozen.
/// Candidates must already be present in the model.
TrainingTrace train_interactions(GamiNetModel& model,
                                 const std::vector<std::pair<int, int>>& candidates,
                                 const Dataset& train, const Dataset& validation,
                                 const TrainConfig& config);

/// Stage 3: jointly retrains all active effects under the clarity penalty
/// and re-centers them.
TrainingTrace fine_tune(GamiNetModel& model, const Dataset& train,
                        const Dataset& validation, const TrainConfig& config);

/// Full pipeline: stage 1 + pruning, interaction screening, stage 2 +
/// pruning, stage 3. Returns a centered model satisfying weak heredity.
FitResult fit(const Dataset& train, const Dataset& validation,
              const TrainConfig& config);

}  // namespace gaminet
