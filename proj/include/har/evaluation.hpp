#pragma once

#include <cstdint>
#include <vector>

#include "har/model.hpp"
#include "har/segmentation.hpp"

namespace har {

/// Classification quality on one window set. `confusion` is row-major K x K
/// with rows indexed by ground truth and columns by prediction.
struct Metrics {
  double accuracy = 0.0;
  double macro_f1 = 0.0;
  std::vector<double> per_class_f1;
  std::vector<std::int64_t> confusion;
  int K = 0;
  std::int64_t n = 0;

  std::int64_t at(int truth, int pred) const { return confusion[truth * K + pred]; }
};

/// Mean and sample standard deviation (n-1) of per-fold seed-averaged
/// accuracy and macro F1.
struct AggregateStats {
  double mean_accuracy = 0.0;
  double std_accuracy = 0.0;
  double mean_macro_f1 = 0.0;
  double std_macro_f1 = 0.0;
  int n_folds = 0;
};

/// Confusion matrix, accuracy, and macro F1 over all K classes; a class
/// absent from both truths and predictions contributes F1 = 0.
Metrics metrics_from_predictions(const std::vector<int>& truths,
                                 const std::vector<int>& preds, int K);

/// Packs windows[indices] into a (B, c, w) tensor, channels-major in time.
nn::Tensor pack_windows(const std::vector<WindowedSample>& windows,
                        const std::vector<int>& indices);
nn::Tensor pack_windows(const std::vector<WindowedSample>& windows);

/// Row-wise argmax with lowest-index tie break.
std::vector<int> argmax_rows(const nn::Tensor& logits);

/// Evaluation-mode embeddings for all windows: (N, d_latent), computed in
/// batches of `batch` windows.
nn::Tensor embed_windows(nn::Sequential& F, const std::vector<WindowedSample>& windows,
                         int batch = 64);

/// argmax C(F(x)) per window.
std::vector<int> predict_classes(ModelBundle& bundle,
                                 const std::vector<WindowedSample>& windows,
                                 int batch = 64);

Metrics evaluate(ModelBundle& bundle, const std::vector<WindowedSample>& test_windows);

/// folds x metrics, one entry per fold (already seed-averaged by caller).
AggregateStats aggregate(const std::vector<double>& fold_accuracy,
                         const std::vector<double>& fold_macro_f1);

}  // namespace har
