#pragma once

#include <cstdint>
#include <vector>

#include "har/nn.hpp"
#include "har/segmentation.hpp"

namespace har {

/// First-order Wasserstein distance between empirical 1-D distributions.
/// Equal-size inputs reduce to the mean absolute difference of order
/// statistics; unequal sizes use the quantile integral on the merged grid.
double wasserstein_1d(std::vector<double> a, std::vector<double> b);

/// Mean over `n_projections` random unit directions of the 1-D distance
/// between the projected point sets (rows of a and b).
double sliced_wasserstein(const nn::Tensor& a, const nn::Tensor& b, int n_projections,
                          std::uint64_t seed);

/// Train-vs-test latent distance, one entry per activity class plus the
/// pooled overall value. Activities missing on either side are flagged
/// rather than scored.
struct ActivityShift {
  int activity = -1;
  double distance = 0.0;
  bool skipped = false;
};

struct LatentShift {
  double overall = 0.0;
  std::vector<ActivityShift> per_activity;
};

/// Embeds both window sets with F (evaluation mode) and measures, per
/// latent dimension, the 1-D Wasserstein distance between the train-side
/// and test-side embeddings; distances are averaged over dimensions.
LatentShift latent_shift(nn::Sequential& F, const std::vector<WindowedSample>& train_windows,
                         const std::vector<WindowedSample>& test_windows, int K,
                         bool per_activity);

/// Cross-fold average of distances before/after the adversarial step and
/// the signed percentage change (positive = reduction).
struct ShiftReport {
  struct Row {
    int activity = -1;
    double d_step2 = 0.0;
    double d_step3 = 0.0;
    double pct_change = 0.0;
    bool valid = false;  // at least one fold contributed and d_step2 > 0
    int n_folds = 0;
  };

  double overall_step2 = 0.0;
  double overall_step3 = 0.0;
  double overall_pct_change = 0.0;
  std::vector<Row> per_activity;
};

ShiftReport shift_delta(const std::vector<LatentShift>& after_step2,
                        const std::vector<LatentShift>& after_step3);

}  // namespace har
