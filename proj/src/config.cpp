#include "har/config.hpp"

#include <cstdlib>
#include <fstream>
#include <set>

#include "har/errors.hpp"

namespace har {

using json = nlohmann::json;

namespace {

void reject_unknown_keys(const json& j, const std::set<std::string>& allowed,
                         const std::string& where) {
  if (!j.is_object()) throw ConfigError("config: " + where + " must be an object");
  for (const auto& [key, _] : j.items()) {
    if (!allowed.count(key)) {
      throw ConfigError("config: unknown key '" + key + "' in " + where);
    }
  }
}

template <typename T>
void read_if(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

json train_to_json(const TrainConfig& t) {
  return json{{"epochs_step1", t.epochs_step1},
              {"epochs_step2", t.epochs_step2},
              {"epochs_step3", t.epochs_step3},
              {"lr_step1_F", t.lr_step1_F},
              {"lr_step1_R", t.lr_step1_R},
              {"lr_step2_F", t.lr_step2_F},
              {"lr_step2_R", t.lr_step2_R},
              {"lr_step2_C", t.lr_step2_C},
              {"lr_step2_D", t.lr_step2_D},
              {"lr_step3_F", t.lr_step3_F},
              {"lr_step3_C", t.lr_step3_C},
              {"lr_step3_D", t.lr_step3_D},
              {"lr_supervised", t.lr_supervised},
              {"batch_a_step1", t.batch_a_step1},
              {"batch_a_step23", t.batch_a_step23},
              {"weights",
               {{"w_A", t.weights.w_A}, {"w_R", t.weights.w_R}, {"w_C", t.weights.w_C}}},
              {"strict_freeze_checks", t.strict_freeze_checks},
              {"refresh_pairs_each_epoch", t.refresh_pairs_each_epoch}};
}

TrainConfig train_from_json(const json& j) {
  reject_unknown_keys(
      j,
      {"epochs_step1", "epochs_step2", "epochs_step3", "lr_step1_F", "lr_step1_R",
       "lr_step2_F", "lr_step2_R", "lr_step2_C", "lr_step2_D", "lr_step3_F",
       "lr_step3_C", "lr_step3_D", "lr_supervised", "batch_a_step1", "batch_a_step23",
       "weights", "strict_freeze_checks", "refresh_pairs_each_epoch"},
      "train");
  TrainConfig t;
  read_if(j, "epochs_step1", t.epochs_step1);
  read_if(j, "epochs_step2", t.epochs_step2);
  read_if(j, "epochs_step3", t.epochs_step3);
  read_if(j, "lr_step1_F", t.lr_step1_F);
  read_if(j, "lr_step1_R", t.lr_step1_R);
  read_if(j, "lr_step2_F", t.lr_step2_F);
  read_if(j, "lr_step2_R", t.lr_step2_R);
  read_if(j, "lr_step2_C", t.lr_step2_C);
  read_if(j, "lr_step2_D", t.lr_step2_D);
  read_if(j, "lr_step3_F", t.lr_step3_F);
  read_if(j, "lr_step3_C", t.lr_step3_C);
  read_if(j, "lr_step3_D", t.lr_step3_D);
  read_if(j, "lr_supervised", t.lr_supervised);
  read_if(j, "batch_a_step1", t.batch_a_step1);
  read_if(j, "batch_a_step23", t.batch_a_step23);
  if (j.contains("weights")) {
    const json& w = j.at("weights");
    reject_unknown_keys(w, {"w_A", "w_R", "w_C"}, "train.weights");
    read_if(w, "w_A", t.weights.w_A);
    read_if(w, "w_R", t.weights.w_R);
    read_if(w, "w_C", t.weights.w_C);
  }
  read_if(j, "strict_freeze_checks", t.strict_freeze_checks);
  read_if(j, "refresh_pairs_each_epoch", t.refresh_pairs_each_epoch);
  return t;
}

json synthetic_to_json(const SyntheticParams& p) {
  return json{{"n_subjects", p.n_subjects},
              {"n_activities", p.n_activities},
              {"duration_s", p.duration_s},
              {"sample_rate_hz", p.sample_rate_hz},
              {"c", p.c},
              {"subject_distortion_strength", p.subject_distortion_strength},
              {"seed", p.seed}};
}

SyntheticParams synthetic_from_json(const json& j) {
  reject_unknown_keys(j,
                      {"n_subjects", "n_activities", "duration_s", "sample_rate_hz", "c",
                       "subject_distortion_strength", "seed"},
                      "synthetic");
  SyntheticParams p;
  read_if(j, "n_subjects", p.n_subjects);
  read_if(j, "n_activities", p.n_activities);
  read_if(j, "duration_s", p.duration_s);
  read_if(j, "sample_rate_hz", p.sample_rate_hz);
  read_if(j, "c", p.c);
  read_if(j, "subject_distortion_strength", p.subject_distortion_strength);
  read_if(j, "seed", p.seed);
  return p;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (schema_version != 1) {
    throw ConfigError("config: unsupported schema_version " +
                      std::to_string(schema_version));
  }
  dataset_name_from_string(dataset);
  train_mode_from_string(mode);
  discriminator_variant_from_string(discriminator);
  if (realdisp_scenario != "ideal" && realdisp_scenario != "self" &&
      realdisp_scenario != "mutual") {
    throw ConfigError("config: unknown realdisp_scenario '" + realdisp_scenario + "'");
  }
  if (device != "cpu") {
    throw ConfigError("config: only device 'cpu' is available");
  }
  if (d_latent < 2) throw ConfigError("config: d_latent must be >= 2");
  if (width_scale <= 0.0) throw ConfigError("config: width_scale must be > 0");
  if (window_size != 0 && window_size < 8) {
    throw ConfigError("config: window_size must be 0 (default) or >= 8");
  }
  if (overlap_fraction >= 1.0) throw ConfigError("config: overlap_fraction must be < 1");
  if (seeds.empty()) throw ConfigError("config: need at least one seed");
  if (workers < 1) throw ConfigError("config: workers must be >= 1");
  if (n_val_subjects < 1) throw ConfigError("config: n_val_subjects must be >= 1");
  if (sliced_projections < 1) throw ConfigError("config: sliced_projections must be >= 1");
  train.validate();
}

DatasetSpec ExperimentConfig::make_dataset_spec() const {
  DatasetSpec spec;
  switch (dataset_name_from_string(dataset)) {
    case DatasetName::pamap2: spec = default_pamap2_spec(); break;
    case DatasetName::mhealth: spec = default_mhealth_spec(); break;
    case DatasetName::realdisp: spec = default_realdisp_spec(); break;
    case DatasetName::synthetic:
      spec = default_synthetic_spec(synthetic.n_activities, synthetic.n_subjects, 64);
      break;
  }
  if (window_size > 0) spec.window_size = window_size;
  if (overlap_fraction >= 0.0) spec.overlap_fraction = overlap_fraction;
  spec.validate();
  return spec;
}

int ExperimentConfig::resolved_pairs_per_class() const {
  if (pairs_per_class > 0) return pairs_per_class;
  switch (dataset_name_from_string(dataset)) {
    case DatasetName::pamap2: return 25000;
    case DatasetName::realdisp: return 25000;
    case DatasetName::mhealth: return 5000;
    case DatasetName::synthetic: return 400;
  }
  return 400;
}

TrainConfig ExperimentConfig::resolved_train_config() const {
  TrainConfig t = train;
  t.per_class_target = resolved_pairs_per_class();
  return t;
}

std::filesystem::path ExperimentConfig::resolved_dataset_root() const {
  if (const char* env = std::getenv("HAR_DATA_ROOT"); env && *env) {
    return std::filesystem::path(env);
  }
  return std::filesystem::path(dataset_root);
}

json ExperimentConfig::to_json() const {
  json j;
  j["schema_version"] = schema_version;
  j["dataset"] = dataset;
  j["dataset_root"] = dataset_root;
  j["realdisp_scenario"] = realdisp_scenario;
  j["synthetic"] = synthetic_to_json(synthetic);
  j["model"] = json{{"d_latent", d_latent},
                    {"width_scale", width_scale},
                    {"discriminator", discriminator}};
  j["window_size"] = window_size;
  j["overlap_fraction"] = overlap_fraction;
  j["train"] = train_to_json(train);
  j["pairs_per_class"] = pairs_per_class;
  j["seeds"] = seeds;
  j["mode"] = mode;
  j["shift_per_activity"] = shift_per_activity;
  j["use_sliced_wasserstein"] = use_sliced_wasserstein;
  j["sliced_projections"] = sliced_projections;
  j["out_dir"] = out_dir;
  j["device"] = device;
  j["deterministic"] = deterministic;
  j["workers"] = workers;
  j["n_val_subjects"] = n_val_subjects;
  j["split_seed"] = split_seed;
  return j;
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  reject_unknown_keys(
      j, {"schema_version", "dataset",      "dataset_root",        "realdisp_scenario",
          "synthetic",      "model",        "window_size",         "overlap_fraction",
          "train",          "pairs_per_class", "seeds",            "mode",
          "shift_per_activity", "use_sliced_wasserstein", "sliced_projections",
          "out_dir",        "device",       "deterministic",       "workers",
          "n_val_subjects", "split_seed"},
      "config");
  ExperimentConfig c;
  read_if(j, "schema_version", c.schema_version);
  read_if(j, "dataset", c.dataset);
  read_if(j, "dataset_root", c.dataset_root);
  read_if(j, "realdisp_scenario", c.realdisp_scenario);
  if (j.contains("synthetic")) c.synthetic = synthetic_from_json(j.at("synthetic"));
  if (j.contains("model")) {
    const json& m = j.at("model");
    reject_unknown_keys(m, {"d_latent", "width_scale", "discriminator"}, "model");
    read_if(m, "d_latent", c.d_latent);
    read_if(m, "width_scale", c.width_scale);
    read_if(m, "discriminator", c.discriminator);
  }
  read_if(j, "window_size", c.window_size);
  read_if(j, "overlap_fraction", c.overlap_fraction);
  if (j.contains("train")) c.train = train_from_json(j.at("train"));
  read_if(j, "pairs_per_class", c.pairs_per_class);
  read_if(j, "seeds", c.seeds);
  read_if(j, "mode", c.mode);
  read_if(j, "shift_per_activity", c.shift_per_activity);
  read_if(j, "use_sliced_wasserstein", c.use_sliced_wasserstein);
  read_if(j, "sliced_projections", c.sliced_projections);
  read_if(j, "out_dir", c.out_dir);
  read_if(j, "device", c.device);
  read_if(j, "deterministic", c.deterministic);
  read_if(j, "workers", c.workers);
  read_if(j, "n_val_subjects", c.n_val_subjects);
  read_if(j, "split_seed", c.split_seed);
  c.validate();
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config: invalid JSON in " + path.string() + ": " + e.what());
  }
  return from_json(j);
}

std::uint64_t ExperimentConfig::hash() const {
  const std::string canonical = to_json().dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : canonical) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string ExperimentConfig::hash_hex() const {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash()));
  return std::string(buf);
}

void write_resolved_config(const ExperimentConfig& config,
                           const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  std::ofstream out(out_dir / "resolved_config.json");
  if (!out) {
    throw ConfigError("config: cannot write resolved config under " + out_dir.string());
  }
  json j = config.to_json();
  j["config_hash"] = config.hash_hex();
  out << j.dump(2) << "\n";
}

}  // namespace har
