#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "har/evaluation.hpp"
#include "har/losses.hpp"
#include "har/model.hpp"
#include "har/pairs.hpp"
#include "har/segmentation.hpp"
#include "har/shift.hpp"

namespace har {

enum class TrainMode { supervised_only, through_step2, full };

std::string to_string(TrainMode m);
TrainMode train_mode_from_string(const std::string& s);

/// Schedule and optimizer settings for the three-step procedure.
struct TrainConfig {
  int epochs_step1 = 20;
  int epochs_step2 = 10;
  int epochs_step3 = 150;

  double lr_step1_F = 1e-4;
  double lr_step1_R = 1e-4;
  double lr_step2_F = 1e-4;
  double lr_step2_R = 1e-4;
  double lr_step2_C = 1e-5;  // ten times smaller than the other blocks
  double lr_step2_D = 1e-4;
  double lr_step3_F = 1e-3;
  double lr_step3_C = 1e-4;
  double lr_step3_D = 1e-4;
  double lr_supervised = 1e-4;

  int batch_a_step1 = 64;
  int batch_a_step23 = 32;

  int per_class_target = 400;  // train pairs per g class
  LossWeights weights;

  /// Verify frozen blocks after every sub-step (not just every epoch).
  bool strict_freeze_checks = true;
  /// Rebuild the pair set with a fresh stream each epoch (default: fixed).
  bool refresh_pairs_each_epoch = false;

  void validate() const;
};

/// One epoch of scalar diagnostics. Loss entries are means over processed
/// batches; validation fields are filled by the caller's epoch hook.
struct EpochRecord {
  int epoch = 0;  // 1-based within the step
  std::map<std::string, double> losses;
  double val_accuracy = -1.0;
  double val_macro_f1 = -1.0;
  double val_disc_accuracy = -1.0;  // -1 when not measured
  int updates = 0;                  // gradient updates per trained block
  int skipped_pair_batches = 0;
  double seconds = 0.0;
};

struct StepHistory {
  std::string step;
  std::vector<EpochRecord> epochs;
};

struct TrainHistory {
  std::vector<StepHistory> steps;
  std::string best_step;
  int best_epoch = -1;
  double best_val_macro_f1 = -1.0;
};

/// Invoked after every epoch; may fill validation fields of the record.
using EpochHook = std::function<void(const std::string& step, int epoch, EpochRecord&)>;

/// Invoked at sub-step boundaries of step 3 with events "3.1.begin",
/// "3.1.end", "3.2.begin", "3.2.end"; test instrumentation only.
using SubstepObserver = std::function<void(const char* event, ModelBundle&)>;

/// Step 1: autoencoder pre-training of F and R on window batches; C and D
/// stay bit-identical.
StepHistory run_step1(ModelBundle& bundle, const std::vector<WindowedSample>& train,
                      const TrainConfig& config, std::uint64_t seed,
                      const EpochHook& hook = {});

/// Step 2: joint training. Per iteration (one window batch + one
/// count-matched pair batch): F descends classification + pair
/// reconstruction, R the pair reconstruction, C the classification at its
/// smaller rate, D its discrimination objective.
StepHistory run_step2(ModelBundle& bundle, const std::vector<WindowedSample>& train,
                      const PairSet& pair_set, const TrainConfig& config,
                      std::uint64_t seed, const EpochHook& hook = {});

/// Step 3: alternating adversarial phase. R is frozen throughout; 3.1
/// updates F (weighted adversarial + reconstruction + classification) and C
/// while D is frozen; 3.2 recomputes features and updates D while F and C
/// are frozen. Pair batches without a g=0 pair are skipped and counted.
StepHistory run_step3(ModelBundle& bundle, const std::vector<WindowedSample>& train,
                      const PairSet& pair_set, const TrainConfig& config,
                      std::uint64_t seed, const EpochHook& hook = {},
                      const SubstepObserver& observer = {});

/// Normalized per-fold window sets; scaler statistics come from the train
/// subjects only.
struct FoldData {
  FoldSpec fold;
  std::vector<WindowedSample> train;
  std::vector<WindowedSample> val;
  std::vector<WindowedSample> test;
  ScalerParams scaler;
};

FoldData assemble_fold_data(const std::vector<WindowedSample>& all_windows,
                            const FoldSpec& fold);

struct TrainResult {
  ModelBundle bundle;  // best validation checkpoint restored
  TrainHistory history;
  LatentShift shift_step2;
  LatentShift shift_step3;
  bool has_shift_step2 = false;
  bool has_shift_step3 = false;
};

/// Runs the configured mode end to end on one fold: builds the bundle and
/// pair sets from per-purpose streams of `seed`, tracks validation macro F1
/// each epoch, retains the best checkpoint (classifier-bearing steps only),
/// and measures the train-vs-test latent shift at the step 2 / step 3
/// boundaries.
TrainResult train_fold(const FoldData& data, ModelArch arch, const TrainConfig& config,
                       TrainMode mode, std::uint64_t seed, bool measure_shift = true,
                       bool shift_per_activity = true);

/// Fraction of pairs whose thresholded same-subject probability matches g.
double pair_disc_accuracy(ModelBundle& bundle, const std::vector<WindowedSample>& windows,
                          const std::vector<PairSample>& pairs);

}  // namespace har
