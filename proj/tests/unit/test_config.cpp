#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <doctest.h>
#include <nlohmann/json.hpp>

#include "har/config.hpp"
#include "har/errors.hpp"

using namespace har;
using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string error_text(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const std::exception& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("config: defaults are valid and round-trip through JSON") {
  ExperimentConfig c;
  c.validate();
  auto j = c.to_json();
  auto back = ExperimentConfig::from_json(j);
  CHECK(back.to_json() == j);
  CHECK(back.dataset == "synthetic");
  CHECK(back.seeds == std::vector<std::uint64_t>{17, 23});
}

TEST_CASE("config: unknown keys are rejected by name and location") {
  auto base = ExperimentConfig().to_json();

  auto top = base;
  top["learning_rate"] = 0.1;
  auto msg = error_text([&] { ExperimentConfig::from_json(top); });
  CHECK(msg.find("learning_rate") != std::string::npos);
  CHECK(msg.find("config") != std::string::npos);

  auto nested = base;
  nested["train"]["momentum"] = 0.9;
  msg = error_text([&] { ExperimentConfig::from_json(nested); });
  CHECK(msg.find("momentum") != std::string::npos);
  CHECK(msg.find("train") != std::string::npos);

  auto weights = base;
  weights["train"]["weights"]["w_X"] = 0.5;
  msg = error_text([&] { ExperimentConfig::from_json(weights); });
  CHECK(msg.find("w_X") != std::string::npos);
  CHECK(msg.find("train.weights") != std::string::npos);

  auto model = base;
  model["model"]["layers"] = 4;
  msg = error_text([&] { ExperimentConfig::from_json(model); });
  CHECK(msg.find("layers") != std::string::npos);

  auto synth = base;
  synth["synthetic"]["sigma"] = 1.0;
  CHECK_THROWS_AS(ExperimentConfig::from_json(synth), ConfigError);
}

TEST_CASE("config: validation rejects out-of-range fields") {
  ExperimentConfig c;
  c.mode = "step4";
  CHECK_THROWS(c.validate());
  c = {};
  c.dataset = "uci_har";
  CHECK_THROWS(c.validate());
  c = {};
  c.device = "cuda";
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  c.seeds.clear();
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  c.width_scale = 0.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  c.overlap_fraction = 1.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  c.realdisp_scenario = "lab";
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("config: file loading surfaces JSON and schema problems") {
  auto dir = fs::temp_directory_path() / "har_test_config";
  fs::create_directories(dir);

  const auto good = dir / "good.json";
  std::ofstream(good) << R"({"dataset": "mhealth", "mode": "through_step2"})";
  auto c = ExperimentConfig::load(good);
  CHECK(c.dataset == "mhealth");
  CHECK(c.mode == "through_step2");

  const auto broken = dir / "broken.json";
  std::ofstream(broken) << "{ not json";
  CHECK_THROWS_AS(ExperimentConfig::load(broken), ConfigError);

  CHECK_THROWS_AS(ExperimentConfig::load(dir / "absent.json"), ConfigError);
}

TEST_CASE("config: hash tracks content, not identity") {
  ExperimentConfig a, b;
  CHECK(a.hash() == b.hash());
  CHECK(a.hash_hex().size() == 16);

  b.d_latent = 64;
  CHECK(a.hash() != b.hash());

  b = {};
  b.train.weights.w_A = 0.11;
  CHECK(a.hash() != b.hash());
}

TEST_CASE("config: per-dataset pair budgets apply when unset") {
  ExperimentConfig c;
  c.dataset = "pamap2";
  CHECK(c.resolved_pairs_per_class() == 25000);
  c.dataset = "realdisp";
  CHECK(c.resolved_pairs_per_class() == 25000);
  c.dataset = "mhealth";
  CHECK(c.resolved_pairs_per_class() == 5000);
  c.dataset = "synthetic";
  CHECK(c.resolved_pairs_per_class() == 400);
  c.pairs_per_class = 123;
  CHECK(c.resolved_pairs_per_class() == 123);
  CHECK(c.resolved_train_config().per_class_target == 123);
}

TEST_CASE("config: window overrides reach the dataset spec") {
  ExperimentConfig c;
  c.dataset = "pamap2";
  auto spec = c.make_dataset_spec();
  CHECK(spec.window_size == 512);
  c.window_size = 256;
  c.overlap_fraction = 0.25;
  spec = c.make_dataset_spec();
  CHECK(spec.window_size == 256);
  CHECK(spec.overlap_fraction == 0.25);
}

TEST_CASE("config: environment variable overrides the dataset root") {
  ExperimentConfig c;
  c.dataset_root = "/from/config";
  unsetenv("HAR_DATA_ROOT");
  CHECK(c.resolved_dataset_root() == fs::path("/from/config"));
  setenv("HAR_DATA_ROOT", "/from/env", 1);
  CHECK(c.resolved_dataset_root() == fs::path("/from/env"));
  unsetenv("HAR_DATA_ROOT");
}

TEST_CASE("config: resolved form is persisted next to results") {
  auto dir = fs::temp_directory_path() / "har_test_resolved";
  fs::remove_all(dir);

  ExperimentConfig c;
  c.out_dir = dir.string();
  write_resolved_config(c, dir);

  std::ifstream in(dir / "resolved_config.json");
  REQUIRE(in.good());
  json j;
  in >> j;
  CHECK(j["dataset"] == "synthetic");
  CHECK(j["config_hash"] == c.hash_hex());
}
