#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace har {

/// Continuous per-subject sensor stream with per-timestep activity labels.
/// `channels` is row-major T x c; label 0 marks null/transient samples.
struct RawRecording {
  int subject_id = 0;
  std::int64_t T = 0;
  int c = 0;
  std::vector<float> channels;  // row-major, labels[i] <-> row i
  std::vector<int> labels;
  double sample_rate_hz = 0.0;
  std::vector<std::string> channel_names;

  float at(std::int64_t t, int j) const { return channels[static_cast<std::size_t>(t) * c + j]; }
  void validate() const;
};

enum class DatasetName { pamap2, mhealth, realdisp, synthetic };

std::string to_string(DatasetName n);
DatasetName dataset_name_from_string(const std::string& s);

enum class RealdispScenario { ideal, self, mutual };

/// Everything needed to turn raw files into a windowed dataset: which
/// subjects, which raw labels map to class indices, window geometry, and the
/// raw-file columns to keep.
struct DatasetSpec {
  DatasetName name = DatasetName::synthetic;
  std::vector<int> subjects;
  std::vector<int> activity_labels;  // ascending raw labels -> class 0..K-1
  int window_size = 512;
  double overlap_fraction = 0.5;
  std::vector<int> channel_columns;  // raw-file column indices to keep
  std::vector<std::string> channel_names;

  int K() const { return static_cast<int>(activity_labels.size()); }
  /// Class index for a raw label, or -1 when unmapped.
  int class_index(int raw_label) const;
  void validate() const;
};

/// Built-in specs matching each dataset's published layout and protocol.
DatasetSpec default_pamap2_spec();
DatasetSpec default_mhealth_spec();
DatasetSpec default_realdisp_spec();
DatasetSpec default_synthetic_spec(int n_activities, int n_subjects, int window_size);

/// PAMAP2: one space-separated 54-column file per subject. Keeps the +-16g
/// accelerometer and gyroscope of the hand, chest and ankle IMUs (18
/// channels); activity ids outside the spec's mapping become null; NaN
/// dropouts are linearly interpolated within each file.
std::vector<RawRecording> parse_pamap2(const std::filesystem::path& root,
                                       const DatasetSpec& spec);

/// MHEALTH: one tab-separated 24-column log per subject; the selected
/// acc/gyro columns come from spec.channel_columns.
std::vector<RawRecording> parse_mhealth(const std::filesystem::path& root,
                                        const DatasetSpec& spec);

/// REALDISP: per-subject per-scenario logs with 2 time columns, 9 sensor
/// blocks of 13 columns and a trailing label (120 columns).
std::vector<RawRecording> parse_realdisp(const std::filesystem::path& root,
                                         const DatasetSpec& spec,
                                         RealdispScenario scenario = RealdispScenario::ideal);

struct SyntheticParams {
  int n_subjects = 6;
  int n_activities = 4;
  double duration_s = 128.0;
  double sample_rate_hz = 50.0;
  int c = 6;
  double subject_distortion_strength = 1.0;
  std::uint64_t seed = 9;
};

/// Desk-scale fixture: activity-specific sinusoid banks plus a per-subject
/// distortion (channel gain/offset, phase, time warp) scaled by
/// `subject_distortion_strength`. Deterministic in `seed`.
std::vector<RawRecording> generate_synthetic(const SyntheticParams& p);

}  // namespace har
