#include "har/evaluation.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace har {

Metrics metrics_from_predictions(const std::vector<int>& truths,
                                 const std::vector<int>& preds, int K) {
  if (K < 1) throw std::invalid_argument("metrics: K must be >= 1");
  if (truths.size() != preds.size()) {
    throw std::invalid_argument("metrics: truth/prediction length mismatch");
  }
  if (truths.empty()) throw std::invalid_argument("metrics: empty prediction set");

  Metrics m;
  m.K = K;
  m.n = static_cast<std::int64_t>(truths.size());
  m.confusion.assign(static_cast<std::size_t>(K) * K, 0);
  for (std::size_t i = 0; i < truths.size(); ++i) {
    if (truths[i] < 0 || truths[i] >= K || preds[i] < 0 || preds[i] >= K) {
      throw std::invalid_argument("metrics: class index out of range");
    }
    ++m.confusion[truths[i] * K + preds[i]];
  }

  std::int64_t correct = 0;
  for (int k = 0; k < K; ++k) correct += m.at(k, k);
  m.accuracy = static_cast<double>(correct) / static_cast<double>(m.n);

  m.per_class_f1.assign(K, 0.0);
  for (int k = 0; k < K; ++k) {
    std::int64_t tp = m.at(k, k), fp = 0, fn = 0;
    for (int j = 0; j < K; ++j) {
      if (j == k) continue;
      fp += m.at(j, k);
      fn += m.at(k, j);
    }
    const std::int64_t denom = 2 * tp + fp + fn;
    m.per_class_f1[k] = denom > 0 ? 2.0 * tp / static_cast<double>(denom) : 0.0;
  }
  m.macro_f1 =
      std::accumulate(m.per_class_f1.begin(), m.per_class_f1.end(), 0.0) / K;
  return m;
}

nn::Tensor pack_windows(const std::vector<WindowedSample>& windows,
                        const std::vector<int>& indices) {
  if (indices.empty()) throw std::invalid_argument("pack_windows: empty batch");
  const WindowedSample& first = windows[indices.front()];
  nn::Tensor x({static_cast<int>(indices.size()), first.c, first.w});
  for (std::size_t b = 0; b < indices.size(); ++b) {
    const WindowedSample& win = windows[indices[b]];
    if (win.w != first.w || win.c != first.c) {
      throw std::invalid_argument("pack_windows: inconsistent window shapes");
    }
    for (int t = 0; t < win.w; ++t) {
      for (int j = 0; j < win.c; ++j) {
        x.at3(static_cast<int>(b), j, t) = win.at(t, j);
      }
    }
  }
  return x;
}

nn::Tensor pack_windows(const std::vector<WindowedSample>& windows) {
  std::vector<int> idx(windows.size());
  std::iota(idx.begin(), idx.end(), 0);
  return pack_windows(windows, idx);
}

std::vector<int> argmax_rows(const nn::Tensor& logits) {
  if (logits.rank() != 2) throw std::invalid_argument("argmax_rows: need (B, K)");
  std::vector<int> out(logits.dim(0));
  for (int i = 0; i < logits.dim(0); ++i) {
    int best = 0;
    for (int k = 1; k < logits.dim(1); ++k) {
      if (logits.at2(i, k) > logits.at2(i, best)) best = k;
    }
    out[i] = best;
  }
  return out;
}

nn::Tensor embed_windows(nn::Sequential& F, const std::vector<WindowedSample>& windows,
                         int batch) {
  if (windows.empty()) throw std::invalid_argument("embed_windows: empty window list");
  if (batch < 1) throw std::invalid_argument("embed_windows: batch must be >= 1");
  nn::Tensor all({0, 0});
  std::vector<int> idx;
  for (std::size_t start = 0; start < windows.size(); start += batch) {
    idx.clear();
    for (std::size_t i = start; i < std::min(windows.size(), start + batch); ++i) {
      idx.push_back(static_cast<int>(i));
    }
    const nn::Tensor z = F.forward(pack_windows(windows, idx), nullptr);
    if (all.dim(0) == 0) {
      all = nn::Tensor({static_cast<int>(windows.size()), z.dim(1)});
    }
    for (int b = 0; b < z.dim(0); ++b) {
      for (int j = 0; j < z.dim(1); ++j) {
        all.at2(static_cast<int>(start) + b, j) = z.at2(b, j);
      }
    }
  }
  return all;
}

std::vector<int> predict_classes(ModelBundle& bundle,
                                 const std::vector<WindowedSample>& windows, int batch) {
  const nn::Tensor z = embed_windows(bundle.F.net, windows, batch);
  const nn::Tensor logits = bundle.C.net.forward(z, nullptr);
  return argmax_rows(logits);
}

Metrics evaluate(ModelBundle& bundle, const std::vector<WindowedSample>& test_windows) {
  if (test_windows.empty()) throw std::invalid_argument("evaluate: empty test set");
  std::vector<int> truths(test_windows.size());
  for (std::size_t i = 0; i < test_windows.size(); ++i) truths[i] = test_windows[i].y;
  return metrics_from_predictions(truths, predict_classes(bundle, test_windows),
                                  bundle.arch.K);
}

AggregateStats aggregate(const std::vector<double>& fold_accuracy,
                         const std::vector<double>& fold_macro_f1) {
  if (fold_accuracy.size() != fold_macro_f1.size() || fold_accuracy.empty()) {
    throw std::invalid_argument("aggregate: need matching non-empty fold series");
  }
  const auto stats = [](const std::vector<double>& v) {
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
    double var = 0.0;
    for (double x : v) var += (x - mean) * (x - mean);
    // sample convention (n-1); a single fold reports zero spread
    const double sd = v.size() > 1 ? std::sqrt(var / (v.size() - 1)) : 0.0;
    return std::pair<double, double>{mean, sd};
  };
  AggregateStats agg;
  agg.n_folds = static_cast<int>(fold_accuracy.size());
  std::tie(agg.mean_accuracy, agg.std_accuracy) = stats(fold_accuracy);
  std::tie(agg.mean_macro_f1, agg.std_macro_f1) = stats(fold_macro_f1);
  return agg;
}

}  // namespace har
