#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "har/data.hpp"
#include "har/trainer.hpp"

namespace har {

/// Full experiment description. Every run persists its resolved form next
/// to its results; unknown keys in a config file are rejected.
struct ExperimentConfig {
  int schema_version = 1;

  std::string dataset = "synthetic";
  std::string dataset_root;  // overridable via HAR_DATA_ROOT
  std::string realdisp_scenario = "ideal";
  SyntheticParams synthetic;

  int d_latent = 128;
  double width_scale = 1.0;
  std::string discriminator = "ours";

  int window_size = 0;            // 0: dataset default
  double overlap_fraction = -1.0;  // <0: dataset default

  TrainConfig train;
  int pairs_per_class = -1;  // <0: dataset default (25000/25000/5000/400)

  std::vector<std::uint64_t> seeds = {17, 23};
  std::string mode = "full";

  bool shift_per_activity = true;
  bool use_sliced_wasserstein = false;
  int sliced_projections = 32;

  std::string out_dir = "runs";
  std::string device = "cpu";
  bool deterministic = false;
  int workers = 1;
  int n_val_subjects = 2;
  std::uint64_t split_seed = 1234;

  void validate() const;

  /// Dataset spec with window/overlap overrides applied.
  DatasetSpec make_dataset_spec() const;

  /// pairs_per_class, or the per-dataset default when unset.
  int resolved_pairs_per_class() const;

  /// Train config with the resolved pair target filled in.
  TrainConfig resolved_train_config() const;

  /// Dataset root after the environment override.
  std::filesystem::path resolved_dataset_root() const;

  nlohmann::json to_json() const;
  static ExperimentConfig from_json(const nlohmann::json& j);
  static ExperimentConfig load(const std::filesystem::path& path);

  /// FNV-1a over the canonical resolved form; keys windows caches and
  /// stale-config detection.
  std::uint64_t hash() const;
  std::string hash_hex() const;
};

/// Writes the resolved config (pretty JSON) to out_dir/resolved_config.json.
void write_resolved_config(const ExperimentConfig& config,
                           const std::filesystem::path& out_dir);

}  // namespace har
