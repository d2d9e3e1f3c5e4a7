#include "har/segmentation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "har/rng.hpp"

namespace har {

void WindowedSample::validate(int n_classes) const {
  if (w <= 0 || c <= 0) throw std::invalid_argument("WindowedSample: empty shape");
  if (x.size() != static_cast<std::size_t>(w) * c) {
    throw std::invalid_argument("WindowedSample: buffer size mismatch");
  }
  if (y < 0 || y >= n_classes) throw std::invalid_argument("WindowedSample: class out of range");
  for (float v : x) {
    if (!std::isfinite(v)) throw std::invalid_argument("WindowedSample: non-finite value");
  }
}

int window_stride(const DatasetSpec& spec) {
  const int stride =
      static_cast<int>(std::floor(spec.window_size * (1.0 - spec.overlap_fraction)));
  if (stride <= 0) throw std::invalid_argument("window_stride: stride must be positive");
  return stride;
}

std::vector<WindowedSample> segment_windows(const RawRecording& recording,
                                            const DatasetSpec& spec) {
  spec.validate();
  recording.validate();
  const int w = spec.window_size;
  const int stride = window_stride(spec);
  std::vector<WindowedSample> out;
  if (recording.T < w) return out;

  for (std::int64_t start = 0; start + w <= recording.T; start += stride) {
    const int label = recording.labels[start];
    bool uniform = true;
    for (std::int64_t t = start + 1; t < start + w; ++t) {
      if (recording.labels[t] != label) {
        uniform = false;
        break;
      }
    }
    if (!uniform) continue;
    const int cls = spec.class_index(label);
    if (cls < 0) continue;

    WindowedSample sample;
    sample.w = w;
    sample.c = recording.c;
    sample.y = cls;
    sample.s = recording.subject_id;
    sample.x.resize(static_cast<std::size_t>(w) * recording.c);
    std::copy_n(recording.channels.begin() + start * recording.c, sample.x.size(),
                sample.x.begin());
    out.push_back(std::move(sample));
  }
  return out;
}

ScalerParams fit_minmax(const std::vector<WindowedSample>& train_windows) {
  if (train_windows.empty()) throw std::invalid_argument("fit_minmax: empty window list");
  const int c = train_windows.front().c;
  ScalerParams params;
  params.min.assign(c, std::numeric_limits<float>::infinity());
  params.max.assign(c, -std::numeric_limits<float>::infinity());
  for (const auto& win : train_windows) {
    if (win.c != c) throw std::invalid_argument("fit_minmax: inconsistent channel count");
    for (int t = 0; t < win.w; ++t) {
      for (int j = 0; j < c; ++j) {
        const float v = win.at(t, j);
        params.min[j] = std::min(params.min[j], v);
        params.max[j] = std::max(params.max[j], v);
      }
    }
  }
  return params;
}

void apply_minmax(WindowedSample& window, const ScalerParams& params) {
  if (window.c != params.c()) throw std::invalid_argument("apply_minmax: channel mismatch");
  for (int j = 0; j < window.c; ++j) {
    const float lo = params.min[j];
    const float range = params.max[j] - lo;
    for (int t = 0; t < window.w; ++t) {
      float& v = window.at(t, j);
      v = (range > 0.0f) ? (v - lo) / range : 0.0f;
    }
  }
}

void apply_minmax(std::vector<WindowedSample>& windows, const ScalerParams& params) {
  for (auto& win : windows) apply_minmax(win, params);
}

std::vector<FoldSpec> loso_splits(const std::vector<int>& subjects, int n_val,
                                  std::uint64_t seed) {
  if (n_val < 0) throw std::invalid_argument("loso_splits: n_val must be >= 0");
  if (static_cast<int>(subjects.size()) < n_val + 2) {
    throw std::invalid_argument("loso_splits: need at least n_val + 2 subjects");
  }
  std::vector<int> sorted = subjects;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw std::invalid_argument("loso_splits: duplicate subject ids");
  }

  std::vector<FoldSpec> folds;
  folds.reserve(sorted.size());
  for (int test : sorted) {
    FoldSpec fold;
    fold.test_subject = test;
    fold.seed = seed;
    std::vector<int> rest;
    for (int s : sorted) {
      if (s != test) rest.push_back(s);
    }
    // Per-fold stream: independent of subject-list order and of other folds.
    Rng rng(mix_seed(seed, 0x70'1d00ULL + static_cast<std::uint64_t>(test)));
    for (int i = 0; i < n_val; ++i) {
      const std::size_t pick = i + static_cast<std::size_t>(
          rng.uniform_int(static_cast<std::uint64_t>(rest.size() - i)));
      std::swap(rest[i], rest[pick]);
    }
    fold.val_subjects.assign(rest.begin(), rest.begin() + n_val);
    fold.train_subjects.assign(rest.begin() + n_val, rest.end());
    std::sort(fold.val_subjects.begin(), fold.val_subjects.end());
    std::sort(fold.train_subjects.begin(), fold.train_subjects.end());
    folds.push_back(std::move(fold));
  }
  return folds;
}

}  // namespace har
