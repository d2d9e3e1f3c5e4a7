#pragma once

#include <map>
#include <string>
#include <vector>

#include "har/config.hpp"
#include "har/records.hpp"
#include "har/segmentation.hpp"
#include "har/shift.hpp"
#include "har/trainer.hpp"

namespace har {

/// Parses (or generates) and segments the configured dataset. With
/// use_cache, windows round-trip through a versioned binary cache keyed by
/// the data-affecting part of the config; corrupt or stale caches are
/// rebuilt with a warning.
std::vector<WindowedSample> load_windows(const ExperimentConfig& config, bool use_cache,
                                         bool* cache_hit = nullptr);

struct LosoOutcome {
  std::vector<nlohmann::json> records;  // this run's records, resumed ones included
  AggregateStats stats;
  ShiftReport shift;
  bool has_shift = false;
};

/// Full LOSO sweep for the configured mode: trains fold x seed (resuming
/// completed triples), evaluates on the held-out subject, appends records
/// in canonical order, and aggregates seed-averaged fold metrics.
LosoOutcome run_loso(const ExperimentConfig& config);
LosoOutcome run_loso_mode(const ExperimentConfig& config, TrainMode mode);

/// Runs run_loso once per discriminator variant with everything else held
/// fixed; keyed by variant name.
std::map<std::string, LosoOutcome> compare_discriminators(const ExperimentConfig& config);

struct SweepPoint {
  double value = 0.0;
  AggregateStats stats;
};

/// Holds the other two weights at their configured values and sweeps the
/// named one; one LOSO run per value.
std::vector<SweepPoint> weight_sweep(const ExperimentConfig& config,
                                     const std::string& which,
                                     const std::vector<double>& values);

}  // namespace har
