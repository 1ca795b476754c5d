#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "milpsat/generator.hpp"
#include "milpsat/gnn.hpp"

namespace milpsat {

struct TrainConfig {
  int epochs = 150;
  int batch_size = 64;
  double learning_rate = 1e-4;
  int d = 32;
  int rounds = 2;
  double rni_fraction = 0.0;
  LossKind loss_kind = LossKind::bce;
  std::uint64_t seed = 0;
  bool deterministic = false; // force single-threaded evaluation
  int workers = 1;
  int eval_redraws = 1;   // RNI draws averaged before thresholding
  bool rni_freeze = false; // keep one RNI draw per entry instead of per epoch
};

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double train_accuracy = 0.0;
  double valid_accuracy = 0.0;
  double seconds = 0.0;
};

struct EvalResult {
  long long true_positive = 0, true_negative = 0;
  long long false_positive = 0, false_negative = 0;
  double accuracy = 0.0;
  long long total() const {
    return true_positive + true_negative + false_positive + false_negative;
  }
};

struct Metrics {
  std::vector<EpochRecord> epochs;
  int best_epoch = 0; // 1-based; 0 when no validation split exists
  double best_valid_accuracy = 0.0;
  EvalResult test;
  bool has_test = false;
  double total_seconds = 0.0;
};

// Epochs of shuffled mini-batches under the adaptive-moment optimizer; RNI
// features are redrawn each epoch unless frozen. Returns the checkpoint with
// the best validation accuracy (ties to the earlier epoch) and the metric
// history; without a validation split the final model is returned.
std::pair<GnnModel, Metrics> train(const Dataset& ds, const TrainConfig& cfg,
                                   std::ostream* log = nullptr);

// Accuracy over one split with the strict 1/2 threshold. For RNI models the
// prediction averages `redraws` independent feature draws.
EvalResult evaluate_split(const GnnModel& m, const Dataset& ds, Split split, int redraws,
                          std::uint64_t seed, int workers = 1);

// epoch,train_loss,valid_acc rows.
void write_metrics_csv(const Metrics& metrics, const std::string& path);

// Effective config, best epoch, test accuracy and runtime as JSON.
std::string summary_json(const TrainConfig& cfg, const Metrics& metrics);

} // namespace milpsat
