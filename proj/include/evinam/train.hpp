#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "evinam/data.hpp"
#include "evinam/errors.hpp"
#include "evinam/losses.hpp"
#include "evinam/model.hpp"

namespace evinam {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  std::size_t step = 0;
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;

  /// Zero moments shaped like `params`.
  static AdamState zeros_like(std::span<diff::Tensor* const> params);
};

/// One bias-corrected Adam update applied in place. Throws NumericError and
/// leaves params and state untouched when any gradient is non-finite.
void adam_step(std::span<diff::Tensor* const> params, std::span<const diff::Tensor> grads,
               AdamState& state, double lr, const AdamConfig& config = {});

/// Patience counter on a minimized quantity. Epochs are 1-based.
class EarlyStopping {
 public:
  EarlyStopping(std::size_t patience, double min_delta);

  /// Records the loss of `epoch`; returns true when it is a new best.
  bool observe(std::size_t epoch, double loss);
  bool should_stop() const noexcept { return stale_ >= patience_; }
  std::size_t best_epoch() const noexcept { return best_epoch_; }
  double best_loss() const noexcept { return best_loss_; }

 private:
  std::size_t patience_;
  double min_delta_;
  std::size_t stale_ = 0;
  std::size_t best_epoch_ = 0;
  double best_loss_ = std::numeric_limits<double>::infinity();
};

struct PlateauConfig {
  double factor = 0.5;
  std::size_t patience = 10;
  double min_lr = 1e-6;
  double threshold = 1e-6;
};

/// Multiplies the learning rate by `factor` after `patience` epochs without
/// an improvement larger than `threshold`, never going below `min_lr`.
class PlateauScheduler {
 public:
  PlateauScheduler(double lr, const PlateauConfig& config);

  /// Feeds one epoch's monitored loss and returns the learning rate to use next.
  double step(double loss);
  double lr() const noexcept { return lr_; }

 private:
  PlateauConfig config_;
  double lr_;
  double best_ = std::numeric_limits<double>::infinity();
  std::size_t stale_ = 0;
};

struct TrainConfig {
  double lr = 1e-3;
  std::size_t batch_size = 128;
  std::size_t max_epochs = 5000;
  std::size_t patience = 50;
  double min_delta = 1e-6;
  PlateauConfig scheduler;
  AdamConfig adam;
  std::uint64_t seed = 0;
  LossConfig loss;

  void validate() const;
};

struct TrainReport {
  std::vector<double> train_loss;
  std::vector<double> val_loss;
  std::vector<double> learning_rate;
  /// 1-based epoch whose weights the model holds after training.
  std::size_t best_epoch = 0;
  std::size_t stopped_epoch = 0;
  double best_val_loss = std::numeric_limits<double>::infinity();
  double wall_seconds = 0.0;
};

/// Raised when the training loss stops being finite.
class TrainingDiverged : public NumericError {
 public:
  TrainingDiverged(const std::string& what, TrainReport last) : NumericError(what), report(std::move(last)) {}
  TrainReport report;
};

/// Mean training objective of `model` on `data` without touching weights.
/// Classification uses the fully annealed KL weight.
double evaluate_loss(const EviNamModel& model, const EncodedData& data, const LossConfig& loss);

/// Mini-batch Adam with reduce-on-plateau and early stopping on validation
/// loss. On return `model` holds the best-validation weights.
TrainReport train(EviNamModel& model, const EncodedData& train_set, const EncodedData& val_set,
                  const TrainConfig& config);

struct SearchSpace {
  double lr_min = 1e-4;
  double lr_max = 1e-2;
  double lambda_min = 1e-3;
  double lambda_max = 1.0;
  std::vector<std::vector<std::size_t>> hidden_choices{{64, 32}, {32, 16}, {128, 64}};
};

struct SearchTrial {
  double lr = 0.0;
  double lambda = 0.0;
  std::vector<std::size_t> hidden_sizes;
  /// Validation NLL for regression, validation loss for classification.
  double score = 0.0;
  TrainReport report;
};

struct SearchResult {
  std::vector<SearchTrial> trials;
  std::size_t best = 0;
  EviNamModel model;
};

/// Seeded random search over (lr, lambda, hidden sizes); log-uniform for the
/// continuous axes. `base` supplies every other model setting.
SearchResult random_search(const ModelSpec& base, const Encoder& encoder,
                           const EncodedData& train_set, const EncodedData& val_set,
                           const TrainConfig& config, const SearchSpace& space,
                           std::size_t trials, std::uint64_t seed);

}  // namespace evinam
