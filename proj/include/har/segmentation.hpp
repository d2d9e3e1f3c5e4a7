#pragma once

#include <cstdint>
#include <vector>

#include "har/data.hpp"

namespace har {

/// One fixed-length sensor window. `x` is row-major (w timesteps x c
/// channels), `y` is the dense class index, `s` the subject id.
struct WindowedSample {
  std::vector<float> x;
  int w = 0;
  int c = 0;
  int y = -1;
  int s = -1;

  float at(int t, int j) const { return x[static_cast<std::size_t>(t) * c + j]; }
  float& at(int t, int j) { return x[static_cast<std::size_t>(t) * c + j]; }
  void validate(int n_classes) const;
};

/// Per-channel min-max statistics fit on training windows only.
struct ScalerParams {
  std::vector<float> min;
  std::vector<float> max;

  int c() const { return static_cast<int>(min.size()); }
};

/// One leave-one-subject-out fold. The three subject sets partition S.
struct FoldSpec {
  int test_subject = -1;
  std::vector<int> val_subjects;
  std::vector<int> train_subjects;
  std::uint64_t seed = 0;
};

/// Slides windows of spec.window_size with stride
/// floor(window_size * (1 - overlap_fraction)); keeps a window only when
/// every timestep has the same label and that label maps to a class.
/// A recording shorter than one window yields an empty list.
std::vector<WindowedSample> segment_windows(const RawRecording& recording,
                                            const DatasetSpec& spec);

ScalerParams fit_minmax(const std::vector<WindowedSample>& train_windows);

/// x'[t,j] = (x[t,j] - min[j]) / (max[j] - min[j]); constant channels map
/// to 0. Values outside the train range are not clipped.
void apply_minmax(WindowedSample& window, const ScalerParams& params);
void apply_minmax(std::vector<WindowedSample>& windows, const ScalerParams& params);

/// One fold per subject; n_val validation subjects drawn uniformly without
/// replacement from the remaining subjects with a per-fold seeded generator.
std::vector<FoldSpec> loso_splits(const std::vector<int>& subjects, int n_val,
                                  std::uint64_t seed);

int window_stride(const DatasetSpec& spec);

}  // namespace har
