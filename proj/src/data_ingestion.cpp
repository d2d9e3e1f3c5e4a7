#include "har/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "har/errors.hpp"
#include "har/rng.hpp"

namespace har {

namespace fs = std::filesystem;

void RawRecording::validate() const {
  if (subject_id < 1) throw std::invalid_argument("RawRecording: subject_id must be >= 1");
  if (static_cast<std::int64_t>(labels.size()) != T) {
    throw std::invalid_argument("RawRecording: labels length != channel rows");
  }
  if (channels.size() != static_cast<std::size_t>(T) * c) {
    throw std::invalid_argument("RawRecording: channel buffer size mismatch");
  }
  if (channel_names.size() != static_cast<std::size_t>(c)) {
    throw std::invalid_argument("RawRecording: channel_names length != c");
  }
}

std::string to_string(DatasetName n) {
  switch (n) {
    case DatasetName::pamap2: return "pamap2";
    case DatasetName::mhealth: return "mhealth";
    case DatasetName::realdisp: return "realdisp";
    case DatasetName::synthetic: return "synthetic";
  }
  return "?";
}

DatasetName dataset_name_from_string(const std::string& s) {
  if (s == "pamap2") return DatasetName::pamap2;
  if (s == "mhealth") return DatasetName::mhealth;
  if (s == "realdisp") return DatasetName::realdisp;
  if (s == "synthetic") return DatasetName::synthetic;
  throw ConfigError("unknown dataset name: '" + s + "'");
}

int DatasetSpec::class_index(int raw_label) const {
  for (std::size_t i = 0; i < activity_labels.size(); ++i) {
    if (activity_labels[i] == raw_label) return static_cast<int>(i);
  }
  return -1;
}

void DatasetSpec::validate() const {
  if (activity_labels.size() < 2) throw std::invalid_argument("DatasetSpec: need K >= 2");
  std::set<int> uniq(activity_labels.begin(), activity_labels.end());
  if (uniq.size() != activity_labels.size()) {
    throw std::invalid_argument("DatasetSpec: duplicate activity labels");
  }
  if (window_size <= 0) throw std::invalid_argument("DatasetSpec: window_size must be > 0");
  if (overlap_fraction < 0.0 || overlap_fraction >= 1.0) {
    throw std::invalid_argument("DatasetSpec: overlap_fraction must be in [0, 1)");
  }
}

namespace {

std::vector<int> ascending(std::vector<int> v) {
  std::sort(v.begin(), v.end());
  return v;
}

// Splits a line on spaces/tabs; returns token count and writes values.
// Returns false on any non-numeric token ("NaN" parses to a quiet NaN).
bool parse_row(const std::string& line, std::vector<double>& out) {
  out.clear();
  const char* p = line.c_str();
  const char* end = p + line.size();
  while (p < end) {
    while (p < end && (*p == ' ' || *p == '\t' || *p == '\r')) ++p;
    if (p >= end) break;
    char* next = nullptr;
    const double val = std::strtod(p, &next);
    if (next == p) return false;
    out.push_back(val);
    p = next;
  }
  return true;
}

bool blank(const std::string& line) {
  return line.find_first_not_of(" \t\r\n") == std::string::npos;
}

/// Reads a whitespace-separated numeric table with a fixed column count.
std::vector<std::vector<double>> read_table(const fs::path& file, std::size_t n_cols,
                                            const char* dataset) {
  std::ifstream in(file);
  if (!in) {
    throw DatasetError(std::string(dataset) + ": missing subject file: " + file.string());
  }
  std::vector<std::vector<double>> rows;
  std::string line;
  std::vector<double> vals;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    if (!parse_row(line, vals) || vals.size() != n_cols) {
      throw ParseError(std::string(dataset) + ": malformed row in " + file.string() +
                       " line " + std::to_string(line_no) + ": expected " +
                       std::to_string(n_cols) + " columns, got " +
                       std::to_string(vals.size()));
    }
    rows.push_back(vals);
  }
  if (rows.empty()) {
    throw DatasetError(std::string(dataset) + ": empty subject file: " + file.string());
  }
  return rows;
}

/// Linear interpolation of NaN runs within one channel; boundary runs take
/// the nearest finite value.
void repair_dropouts(std::vector<float>& col, const fs::path& file, const std::string& name) {
  const std::int64_t n = static_cast<std::int64_t>(col.size());
  std::int64_t first = -1, last = -1;
  for (std::int64_t i = 0; i < n; ++i) {
    if (std::isfinite(col[i])) {
      if (first < 0) first = i;
      last = i;
    }
  }
  if (first < 0) {
    throw DatasetError("channel '" + name + "' has no finite samples in " + file.string());
  }
  for (std::int64_t i = 0; i < first; ++i) col[i] = col[first];
  for (std::int64_t i = last + 1; i < n; ++i) col[i] = col[last];
  std::int64_t i = first;
  while (i <= last) {
    if (std::isfinite(col[i])) {
      ++i;
      continue;
    }
    std::int64_t j = i;
    while (!std::isfinite(col[j])) ++j;  // j <= last by construction
    const float lo = col[i - 1];
    const float hi = col[j];
    const double span = static_cast<double>(j - (i - 1));
    for (std::int64_t t = i; t < j; ++t) {
      col[t] = static_cast<float>(lo + (hi - lo) * static_cast<double>(t - (i - 1)) / span);
    }
    i = j + 1;
  }
}

RawRecording from_table(const std::vector<std::vector<double>>& rows, int subject,
                        const DatasetSpec& spec, int label_col, double rate,
                        bool null_unmapped, const fs::path& file) {
  RawRecording rec;
  rec.subject_id = subject;
  rec.T = static_cast<std::int64_t>(rows.size());
  rec.c = static_cast<int>(spec.channel_columns.size());
  rec.sample_rate_hz = rate;
  rec.channel_names = spec.channel_names;
  rec.labels.resize(rows.size());
  rec.channels.resize(rows.size() * spec.channel_columns.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const int raw = static_cast<int>(rows[i][label_col]);
    rec.labels[i] = (null_unmapped && spec.class_index(raw) < 0) ? 0 : raw;
    for (std::size_t j = 0; j < spec.channel_columns.size(); ++j) {
      rec.channels[i * rec.c + j] = static_cast<float>(rows[i][spec.channel_columns[j]]);
    }
  }
  // Repair NaN dropouts channel by channel.
  std::vector<float> col(rows.size());
  for (int j = 0; j < rec.c; ++j) {
    bool any_nan = false;
    for (std::int64_t t = 0; t < rec.T; ++t) {
      col[t] = rec.at(t, j);
      if (!std::isfinite(col[t])) any_nan = true;
    }
    if (!any_nan) continue;
    repair_dropouts(col, file, rec.channel_names[j]);
    for (std::int64_t t = 0; t < rec.T; ++t) rec.channels[t * rec.c + j] = col[t];
  }
  rec.validate();
  return rec;
}

fs::path find_subject_file(const fs::path& root, std::initializer_list<fs::path> candidates,
                           const char* dataset) {
  for (const auto& cand : candidates) {
    if (fs::exists(root / cand)) return root / cand;
  }
  throw DatasetError(std::string(dataset) + ": missing subject file: " +
                     (root / *candidates.begin()).string());
}

}  // namespace

// ---------------------------------------------------------------------------
// PAMAP2

DatasetSpec default_pamap2_spec() {
  DatasetSpec spec;
  spec.name = DatasetName::pamap2;
  spec.subjects = {1, 2, 3, 4, 5, 6, 7, 8};  // ninth subject excluded
  spec.activity_labels = ascending({1, 2, 3, 4, 5, 6, 7, 12, 13, 16, 17, 24});
  spec.window_size = 512;
  spec.overlap_fraction = 0.5;
  // 54-column layout: ts, activity, HR, then hand/chest/ankle IMU blocks of
  // 17 (temp, acc16g x3, acc6g x3, gyro x3, mag x3, orient x4).
  const char* sites[3] = {"hand", "chest", "ankle"};
  for (int s = 0; s < 3; ++s) {
    const int base = 3 + 17 * s;
    const char* axes[3] = {"x", "y", "z"};
    for (int a = 0; a < 3; ++a) {
      spec.channel_columns.push_back(base + 1 + a);  // acc +-16g
      spec.channel_names.push_back(std::string(sites[s]) + "_acc16_" + axes[a]);
    }
    for (int a = 0; a < 3; ++a) {
      spec.channel_columns.push_back(base + 7 + a);  // gyro
      spec.channel_names.push_back(std::string(sites[s]) + "_gyro_" + axes[a]);
    }
  }
  return spec;
}

std::vector<RawRecording> parse_pamap2(const fs::path& root, const DatasetSpec& spec) {
  spec.validate();
  std::vector<RawRecording> out;
  for (int subject : spec.subjects) {
    const std::string fname = "subject10" + std::to_string(subject) + ".dat";
    const fs::path file =
        find_subject_file(root, {fs::path(fname), fs::path("Protocol") / fname}, "pamap2");
    const auto rows = read_table(file, 54, "pamap2");
    out.push_back(from_table(rows, subject, spec, /*label_col=*/1, /*rate=*/100.0,
                             /*null_unmapped=*/true, file));
  }
  return out;
}

// ---------------------------------------------------------------------------
// MHEALTH

DatasetSpec default_mhealth_spec() {
  DatasetSpec spec;
  spec.name = DatasetName::mhealth;
  spec.subjects = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  spec.activity_labels = ascending({1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12});
  spec.window_size = 512;
  spec.overlap_fraction = 0.5;
  // 24-column layout: chest acc 0-2, ECG 3-4, ankle acc 5-7 / gyro 8-10 /
  // mag 11-13, wrist acc 14-16 / gyro 17-19 / mag 20-22, label 23.
  // The chest unit has no gyroscope, so the default keeps the 15 acc/gyro
  // channels that physically exist.
  struct Sel { int col; const char* name; };
  const Sel sel[] = {
      {0, "chest_acc_x"},  {1, "chest_acc_y"},  {2, "chest_acc_z"},
      {5, "ankle_acc_x"},  {6, "ankle_acc_y"},  {7, "ankle_acc_z"},
      {8, "ankle_gyro_x"}, {9, "ankle_gyro_y"}, {10, "ankle_gyro_z"},
      {14, "wrist_acc_x"}, {15, "wrist_acc_y"}, {16, "wrist_acc_z"},
      {17, "wrist_gyro_x"}, {18, "wrist_gyro_y"}, {19, "wrist_gyro_z"},
  };
  for (const auto& s : sel) {
    spec.channel_columns.push_back(s.col);
    spec.channel_names.push_back(s.name);
  }
  return spec;
}

std::vector<RawRecording> parse_mhealth(const fs::path& root, const DatasetSpec& spec) {
  spec.validate();
  std::vector<RawRecording> out;
  for (int subject : spec.subjects) {
    const std::string fname = "mHealth_subject" + std::to_string(subject) + ".log";
    const fs::path file = find_subject_file(
        root, {fs::path(fname), fs::path("MHEALTHDATASET") / fname}, "mhealth");
    const auto rows = read_table(file, 24, "mhealth");
    out.push_back(from_table(rows, subject, spec, /*label_col=*/23, /*rate=*/50.0,
                             /*null_unmapped=*/false, file));
  }
  return out;
}

// ---------------------------------------------------------------------------
// REALDISP

DatasetSpec default_realdisp_spec() {
  DatasetSpec spec;
  spec.name = DatasetName::realdisp;
  spec.subjects.resize(17);
  for (int i = 0; i < 17; ++i) spec.subjects[i] = i + 1;
  spec.activity_labels.resize(33);
  for (int i = 0; i < 33; ++i) spec.activity_labels[i] = i + 1;
  spec.window_size = 256;
  spec.overlap_fraction = 0.5;
  // 120-column layout: 2 time columns, 9 sensor blocks of 13 (acc 3, gyro 3,
  // mag 3, quat 4), trailing label. Keep acc + gyro of every sensor (54).
  const char* axes[3] = {"x", "y", "z"};
  for (int s = 0; s < 9; ++s) {
    const int base = 2 + 13 * s;
    for (int a = 0; a < 3; ++a) {
      spec.channel_columns.push_back(base + a);
      spec.channel_names.push_back("s" + std::to_string(s + 1) + "_acc_" + axes[a]);
    }
    for (int a = 0; a < 3; ++a) {
      spec.channel_columns.push_back(base + 3 + a);
      spec.channel_names.push_back("s" + std::to_string(s + 1) + "_gyro_" + axes[a]);
    }
  }
  return spec;
}

std::vector<RawRecording> parse_realdisp(const fs::path& root, const DatasetSpec& spec,
                                         RealdispScenario scenario) {
  spec.validate();
  const char* scen = nullptr;
  switch (scenario) {
    case RealdispScenario::ideal: scen = "ideal"; break;
    case RealdispScenario::self: scen = "self"; break;
    case RealdispScenario::mutual: scen = "mutual"; break;
  }
  std::vector<RawRecording> out;
  for (int subject : spec.subjects) {
    const std::string fname =
        "subject" + std::to_string(subject) + "_" + scen + ".log";
    const fs::path file = find_subject_file(root, {fs::path(fname)}, "realdisp");
    const auto rows = read_table(file, 120, "realdisp");
    out.push_back(from_table(rows, subject, spec, /*label_col=*/119, /*rate=*/50.0,
                             /*null_unmapped=*/false, file));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Synthetic fixture

DatasetSpec default_synthetic_spec(int n_activities, int n_subjects, int window_size) {
  DatasetSpec spec;
  spec.name = DatasetName::synthetic;
  spec.subjects.resize(n_subjects);
  for (int i = 0; i < n_subjects; ++i) spec.subjects[i] = i + 1;
  spec.activity_labels.resize(n_activities);
  for (int i = 0; i < n_activities; ++i) spec.activity_labels[i] = i + 1;
  spec.window_size = window_size;
  spec.overlap_fraction = 0.5;
  return spec;
}

std::vector<RawRecording> generate_synthetic(const SyntheticParams& p) {
  if (p.n_subjects < 2 || p.n_activities < 2 || p.c < 2) {
    throw std::invalid_argument("generate_synthetic: counts must be >= 2");
  }
  if (p.subject_distortion_strength < 0.0) {
    throw std::invalid_argument("generate_synthetic: strength must be >= 0");
  }
  if (p.duration_s <= 0.0 || p.sample_rate_hz <= 0.0) {
    throw std::invalid_argument("generate_synthetic: duration and rate must be > 0");
  }

  const Rng base(p.seed);
  constexpr double kTwoPi = 2.0 * 3.14159265358979323846;

  // Activity prototypes, shared by all subjects.
  struct Component { double amp, freq, phase; };
  Rng proto_rng = base.derive(1);
  std::vector<double> base_freq(p.n_activities);
  for (int k = 0; k < p.n_activities; ++k) {
    base_freq[k] = 0.7 + 0.8 * k + proto_rng.uniform(-0.08, 0.08);
  }
  std::vector<std::vector<Component>> comp1(p.n_activities), comp2(p.n_activities);
  std::vector<std::vector<double>> offset(p.n_activities);
  for (int k = 0; k < p.n_activities; ++k) {
    comp1[k].resize(p.c);
    comp2[k].resize(p.c);
    offset[k].resize(p.c);
    for (int j = 0; j < p.c; ++j) {
      const double mult = 1.0 + 0.1 * j;
      comp1[k][j] = {proto_rng.uniform(0.6, 1.4), base_freq[k] * mult,
                     proto_rng.uniform(0.0, kTwoPi)};
      comp2[k][j] = {proto_rng.uniform(0.2, 0.6), 2.0 * base_freq[k] * mult,
                     proto_rng.uniform(0.0, kTwoPi)};
      offset[k][j] = proto_rng.uniform(-0.4, 0.4);
    }
  }

  const auto T = static_cast<std::int64_t>(std::llround(p.duration_s * p.sample_rate_hz));
  const double seg_s = 8.0;  // one activity segment
  const auto seg_len = static_cast<std::int64_t>(std::llround(seg_s * p.sample_rate_hz));

  std::vector<RawRecording> out;
  out.reserve(p.n_subjects);
  for (int s = 0; s < p.n_subjects; ++s) {
    Rng subj_rng = base.derive(100 + static_cast<std::uint64_t>(s));
    const double warp = 1.0 + p.subject_distortion_strength * subj_rng.uniform(-0.12, 0.12);
    const double phase_shift = p.subject_distortion_strength * subj_rng.uniform(0.0, kTwoPi / 4);
    std::vector<double> gain(p.c), shift(p.c);
    for (int j = 0; j < p.c; ++j) {
      gain[j] = 1.0 + p.subject_distortion_strength * subj_rng.uniform(-0.3, 0.3);
      // Dominant per-subject DC offset: carries no activity information, so a
      // subject-invariant encoder can suppress it entirely.
      shift[j] = p.subject_distortion_strength * subj_rng.uniform(-0.55, 0.55);
    }
    Rng noise_rng = base.derive(10000 + static_cast<std::uint64_t>(s));

    RawRecording rec;
    rec.subject_id = s + 1;
    rec.T = T;
    rec.c = p.c;
    rec.sample_rate_hz = p.sample_rate_hz;
    rec.channels.resize(static_cast<std::size_t>(T) * p.c);
    rec.labels.resize(T);
    for (int j = 0; j < p.c; ++j) rec.channel_names.push_back("ch" + std::to_string(j));

    for (std::int64_t t = 0; t < T; ++t) {
      const int k = static_cast<int>((t / seg_len) % p.n_activities);
      rec.labels[t] = k + 1;
      const double tau = warp * static_cast<double>(t) / p.sample_rate_hz;
      for (int j = 0; j < p.c; ++j) {
        const Component& c1 = comp1[k][j];
        const Component& c2 = comp2[k][j];
        double v = c1.amp * std::sin(kTwoPi * c1.freq * tau + c1.phase + phase_shift) +
                   c2.amp * std::sin(kTwoPi * c2.freq * tau + c2.phase + phase_shift) +
                   offset[k][j];
        v = gain[j] * v + shift[j] + 0.08 * noise_rng.normal();
        rec.channels[static_cast<std::size_t>(t) * p.c + j] = static_cast<float>(v);
      }
    }
    rec.validate();
    out.push_back(std::move(rec));
  }
  return out;
}

}  // namespace har
