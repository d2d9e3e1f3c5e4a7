#include "har/experiments.hpp"

#include <atomic>
#include <chrono>
#include <cstring>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "har/errors.hpp"
#include "har/rng.hpp"

namespace har {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Windows cache

namespace {

constexpr char kCacheMagic[8] = {'H', 'A', 'R', 'W', 'C', 'A', 'C', 'H'};
constexpr std::uint32_t kCacheVersion = 1;

/// Hash over the data-affecting configuration only, so schedule changes do
/// not invalidate cached windows.
std::uint64_t data_hash(const ExperimentConfig& config) {
  json j;
  j["dataset"] = config.dataset;
  j["dataset_root"] = config.resolved_dataset_root().string();
  j["realdisp_scenario"] = config.realdisp_scenario;
  j["synthetic"] = json{{"n_subjects", config.synthetic.n_subjects},
                        {"n_activities", config.synthetic.n_activities},
                        {"duration_s", config.synthetic.duration_s},
                        {"sample_rate_hz", config.synthetic.sample_rate_hz},
                        {"c", config.synthetic.c},
                        {"strength", config.synthetic.subject_distortion_strength},
                        {"seed", config.synthetic.seed}};
  const DatasetSpec spec = config.make_dataset_spec();
  j["window_size"] = spec.window_size;
  j["overlap_fraction"] = spec.overlap_fraction;
  j["channels"] = spec.channel_columns;
  const std::string s = j.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::filesystem::path cache_path(const ExperimentConfig& config) {
  return std::filesystem::path(config.out_dir) / "cache" /
         (config.dataset + "_windows.bin");
}

void write_cache(const std::filesystem::path& path, std::uint64_t hash,
                 const std::vector<WindowedSample>& windows) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) return;  // cache is best-effort
  out.write(kCacheMagic, sizeof(kCacheMagic));
  out.write(reinterpret_cast<const char*>(&kCacheVersion), sizeof(kCacheVersion));
  out.write(reinterpret_cast<const char*>(&hash), sizeof(hash));
  const auto count = static_cast<std::uint64_t>(windows.size());
  out.write(reinterpret_cast<const char*>(&count), sizeof(count));
  for (const auto& w : windows) {
    const std::int32_t meta[4] = {w.w, w.c, w.y, w.s};
    out.write(reinterpret_cast<const char*>(meta), sizeof(meta));
    out.write(reinterpret_cast<const char*>(w.x.data()),
              static_cast<std::streamsize>(w.x.size() * sizeof(float)));
  }
}

bool read_cache(const std::filesystem::path& path, std::uint64_t expected_hash,
                std::vector<WindowedSample>& windows, bool& stale) {
  stale = false;
  std::ifstream in(path, std::ios::binary);
  if (!in) return false;
  char magic[8];
  std::uint32_t version = 0;
  std::uint64_t hash = 0, count = 0;
  in.read(magic, sizeof(magic));
  in.read(reinterpret_cast<char*>(&version), sizeof(version));
  in.read(reinterpret_cast<char*>(&hash), sizeof(hash));
  in.read(reinterpret_cast<char*>(&count), sizeof(count));
  if (!in || std::memcmp(magic, kCacheMagic, sizeof(magic)) != 0 ||
      version != kCacheVersion) {
    return false;
  }
  if (hash != expected_hash) {
    stale = true;
    return false;
  }
  std::vector<WindowedSample> loaded;
  loaded.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    std::int32_t meta[4];
    in.read(reinterpret_cast<char*>(meta), sizeof(meta));
    if (!in || meta[0] <= 0 || meta[1] <= 0) return false;
    WindowedSample w;
    w.w = meta[0];
    w.c = meta[1];
    w.y = meta[2];
    w.s = meta[3];
    w.x.resize(static_cast<std::size_t>(w.w) * w.c);
    in.read(reinterpret_cast<char*>(w.x.data()),
            static_cast<std::streamsize>(w.x.size() * sizeof(float)));
    if (!in) return false;
    loaded.push_back(std::move(w));
  }
  windows = std::move(loaded);
  return true;
}

std::vector<RawRecording> load_recordings(const ExperimentConfig& config,
                                          const DatasetSpec& spec) {
  switch (dataset_name_from_string(config.dataset)) {
    case DatasetName::pamap2:
      return parse_pamap2(config.resolved_dataset_root(), spec);
    case DatasetName::mhealth:
      return parse_mhealth(config.resolved_dataset_root(), spec);
    case DatasetName::realdisp: {
      RealdispScenario scen = RealdispScenario::ideal;
      if (config.realdisp_scenario == "self") scen = RealdispScenario::self;
      if (config.realdisp_scenario == "mutual") scen = RealdispScenario::mutual;
      return parse_realdisp(config.resolved_dataset_root(), spec, scen);
    }
    case DatasetName::synthetic:
      return generate_synthetic(config.synthetic);
  }
  throw ConfigError("load_recordings: unreachable dataset");
}

}  // namespace

std::vector<WindowedSample> load_windows(const ExperimentConfig& config, bool use_cache,
                                         bool* cache_hit) {
  config.validate();
  const DatasetSpec spec = config.make_dataset_spec();
  if (cache_hit) *cache_hit = false;

  const std::uint64_t hash = data_hash(config);
  const auto path = cache_path(config);
  if (use_cache) {
    std::vector<WindowedSample> cached;
    bool stale = false;
    if (read_cache(path, hash, cached, stale)) {
      if (cache_hit) *cache_hit = true;
      return cached;
    }
    if (stale) {
      std::cerr << "[har] windows cache is stale (config changed), rebuilding: " << path
                << "\n";
    } else if (std::filesystem::exists(path)) {
      std::cerr << "[har] windows cache is unreadable, rebuilding: " << path << "\n";
    }
  }

  std::vector<WindowedSample> windows;
  for (const RawRecording& rec : load_recordings(config, spec)) {
    auto part = segment_windows(rec, spec);
    windows.insert(windows.end(), std::make_move_iterator(part.begin()),
                   std::make_move_iterator(part.end()));
  }
  if (windows.empty()) {
    throw DatasetError("load_windows: dataset '" + config.dataset +
                       "' produced no labeled windows");
  }
  if (use_cache) write_cache(path, hash, windows);
  return windows;
}

// ---------------------------------------------------------------------------
// LOSO driver

namespace {

struct Task {
  RecordKey key;
  FoldSpec fold;
};

ResultRecord run_task(const Task& task, const std::vector<WindowedSample>& windows,
                      const ExperimentConfig& config, TrainMode mode,
                      const DatasetSpec& spec) {
  const auto t0 = std::chrono::steady_clock::now();
  const FoldData data = assemble_fold_data(windows, task.fold);

  ModelArch arch;
  arch.c = data.train.front().c;
  arch.w = spec.window_size;
  arch.d_latent = config.d_latent;
  arch.K = spec.K();
  arch.width_scale = config.width_scale;
  arch.variant = discriminator_variant_from_string(config.discriminator);

  const std::uint64_t fold_seed =
      mix_seed(task.key.seed, 0xF01DULL + static_cast<std::uint64_t>(task.fold.test_subject));
  const bool measure_shift = mode != TrainMode::supervised_only;
  TrainResult trained = train_fold(data, arch, config.resolved_train_config(), mode,
                                   fold_seed, measure_shift, config.shift_per_activity);

  ResultRecord rec;
  rec.config_hash = config.hash_hex();
  rec.dataset = config.dataset;
  rec.mode = to_string(mode);
  rec.discriminator = config.discriminator;
  rec.fold_test_subject = task.fold.test_subject;
  rec.seed = task.key.seed;
  rec.metrics = evaluate(trained.bundle, data.test);
  rec.has_shift_step2 = trained.has_shift_step2;
  rec.has_shift_step3 = trained.has_shift_step3;
  rec.shift_step2 = trained.shift_step2;
  rec.shift_step3 = trained.shift_step3;
  rec.best_step = trained.history.best_step;
  rec.best_epoch = trained.history.best_epoch;
  rec.best_val_macro_f1 = trained.history.best_val_macro_f1;
  for (const auto& step : trained.history.steps) {
    for (const auto& ep : step.epochs) rec.skipped_pair_batches += ep.skipped_pair_batches;
  }
  rec.train_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  const auto ckpt_dir = std::filesystem::path(config.out_dir) / "checkpoints";
  std::filesystem::create_directories(ckpt_dir);
  save_checkpoint(trained.bundle,
                  ckpt_dir / (to_string(mode) + "_s" +
                              std::to_string(task.fold.test_subject) + "_seed" +
                              std::to_string(task.key.seed) + ".ckpt"));
  return rec;
}

}  // namespace

LosoOutcome run_loso_mode(const ExperimentConfig& config, TrainMode mode) {
  config.validate();
  const DatasetSpec spec = config.make_dataset_spec();
  const std::vector<WindowedSample> windows = load_windows(config, /*use_cache=*/true);

  std::filesystem::create_directories(config.out_dir);
  write_resolved_config(config, config.out_dir);

  const auto folds = loso_splits(spec.subjects, config.n_val_subjects, config.split_seed);
  RecordLog log(std::filesystem::path(config.out_dir) / "records.jsonl");

  // Canonical order: folds ascending, seeds in configured order.
  std::vector<Task> tasks;
  std::vector<RecordKey> order;
  for (const auto& fold : folds) {
    for (std::uint64_t seed : config.seeds) {
      RecordKey key{to_string(mode), fold.test_subject, seed};
      if (log.has(key, config.hash_hex())) continue;
      order.push_back(key);
      tasks.push_back(Task{key, fold});
    }
  }
  log.begin(order);

  if (config.workers <= 1 || tasks.size() <= 1) {
    for (const auto& task : tasks) {
      ResultRecord rec = run_task(task, windows, config, mode, spec);
      log.submit(task.key, record_to_json(rec, config.deterministic));
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(tasks.size());
    const int n_workers = std::min<int>(config.workers, static_cast<int>(tasks.size()));
    for (int t = 0; t < n_workers; ++t) {
      pool.emplace_back([&] {
        while (true) {
          const std::size_t i = next.fetch_add(1);
          if (i >= tasks.size()) return;
          try {
            ResultRecord rec = run_task(tasks[i], windows, config, mode, spec);
            log.submit(tasks[i].key, record_to_json(rec, config.deterministic));
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    }
    for (auto& th : pool) th.join();
    // A failed task leaves later records buffered; completed lines on disk
    // stay valid for resuming.
    for (const auto& err : errors) {
      if (err) std::rethrow_exception(err);
    }
  }
  log.finish();

  // Collect this config's records for the mode (resumed ones included).
  LosoOutcome outcome;
  for (const auto& j : log.existing()) {
    if (j.value("mode", "") == to_string(mode) &&
        j.value("config_hash", "") == config.hash_hex()) {
      outcome.records.push_back(j);
    }
  }
  outcome.stats = aggregate_records(outcome.records, to_string(mode));

  if (mode == TrainMode::full) {
    std::vector<LatentShift> s2, s3;
    for (const auto& j : outcome.records) {
      if (!j.contains("shift_step2") || !j.contains("shift_step3")) continue;
      const ResultRecord r = record_from_json(j);
      s2.push_back(r.shift_step2);
      s3.push_back(r.shift_step3);
    }
    if (!s2.empty()) {
      outcome.shift = shift_delta(s2, s3);
      outcome.has_shift = true;
    }
  }
  return outcome;
}

LosoOutcome run_loso(const ExperimentConfig& config) {
  return run_loso_mode(config, train_mode_from_string(config.mode));
}

std::map<std::string, LosoOutcome> compare_discriminators(const ExperimentConfig& config) {
  std::map<std::string, LosoOutcome> table;
  for (const std::string variant : {"ours", "subject_id", "pair_random"}) {
    ExperimentConfig c = config;
    c.discriminator = variant;
    c.out_dir =
        (std::filesystem::path(config.out_dir) / ("disc_" + variant)).string();
    table[variant] = run_loso_mode(c, train_mode_from_string(config.mode));
  }
  return table;
}

std::vector<SweepPoint> weight_sweep(const ExperimentConfig& config,
                                     const std::string& which,
                                     const std::vector<double>& values) {
  if (which != "w_A" && which != "w_R" && which != "w_C") {
    throw ConfigError("weight_sweep: unknown weight '" + which + "'");
  }
  if (values.empty()) throw ConfigError("weight_sweep: empty value list");
  std::vector<SweepPoint> points;
  for (double v : values) {
    ExperimentConfig c = config;
    if (which == "w_A") c.train.weights.w_A = v;
    if (which == "w_R") c.train.weights.w_R = v;
    if (which == "w_C") c.train.weights.w_C = v;
    std::ostringstream dir;
    dir << "sweep_" << which << "_" << v;
    c.out_dir = (std::filesystem::path(config.out_dir) / dir.str()).string();
    const LosoOutcome outcome = run_loso_mode(c, train_mode_from_string(config.mode));
    points.push_back(SweepPoint{v, outcome.stats});
  }
  return points;
}

}  // namespace har
