#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "har/evaluation.hpp"
#include "har/shift.hpp"

namespace har {

/// One result line: fold x seed x mode.
struct ResultRecord {
  int schema_version = 1;
  std::string config_hash;
  std::string dataset;
  std::string mode;
  std::string discriminator;
  int fold_test_subject = -1;
  std::uint64_t seed = 0;

  Metrics metrics;

  bool has_shift_step2 = false;
  bool has_shift_step3 = false;
  LatentShift shift_step2;
  LatentShift shift_step3;

  std::string best_step;
  int best_epoch = -1;
  double best_val_macro_f1 = -1.0;
  int skipped_pair_batches = 0;

  /// Wall-clock; excluded from serialization in deterministic mode.
  double train_seconds = 0.0;
};

nlohmann::json record_to_json(const ResultRecord& r, bool deterministic);
ResultRecord record_from_json(const nlohmann::json& j);

struct RecordKey {
  std::string mode;
  int fold_test_subject = -1;
  std::uint64_t seed = 0;

  bool operator<(const RecordKey& o) const;
  std::string str() const;
};

/// Append-only JSONL log with canonical-order buffering: records may be
/// submitted from any thread in any order, but lines land in the order
/// fixed by begin(). Existing lines are loaded for resuming.
class RecordLog {
 public:
  explicit RecordLog(std::filesystem::path file);

  const std::vector<nlohmann::json>& existing() const { return existing_; }

  /// True when a record for the key with this config hash is already on disk.
  bool has(const RecordKey& key, const std::string& config_hash) const;

  /// Fixes the emission order for the keys this run will compute.
  void begin(const std::vector<RecordKey>& order);

  /// Thread-safe; flushes every record whose turn has come.
  void submit(const RecordKey& key, nlohmann::json record);

  /// Throws if a begun key was never submitted.
  void finish();

 private:
  void flush_ready();

  std::filesystem::path file_;
  std::vector<nlohmann::json> existing_;
  std::vector<RecordKey> order_;
  std::size_t next_ = 0;
  std::map<std::string, nlohmann::json> pending_;
  std::mutex mu_;
};

/// Seed-averages metrics per fold, then aggregates across folds.
AggregateStats aggregate_records(const std::vector<nlohmann::json>& records,
                                 const std::string& mode);

/// "mean +- std" table row block for a run (sample std, n-1).
std::string format_aggregate_table(const std::string& title, const AggregateStats& stats);

}  // namespace har
