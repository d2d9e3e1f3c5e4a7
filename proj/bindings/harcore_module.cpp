// Python bindings for the activity-recognition core: pair construction,
// LOSO splits, loss values, Wasserstein distances, metrics, synthetic data,
// and the full LOSO experiment driver.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <nlohmann/json.hpp>

#include "har/config.hpp"
#include "har/data.hpp"
#include "har/evaluation.hpp"
#include "har/experiments.hpp"
#include "har/losses.hpp"
#include "har/pairs.hpp"
#include "har/segmentation.hpp"
#include "har/shift.hpp"

namespace py = pybind11;

namespace {

har::nn::Tensor to_tensor(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) throw std::invalid_argument("harcore: empty matrix");
  har::nn::Tensor t(std::vector<int>{static_cast<int>(rows.size()),
                                     static_cast<int>(rows.front().size())});
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows.front().size())
      throw std::invalid_argument("harcore: ragged matrix");
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      t.at2(static_cast<int>(i), static_cast<int>(j)) = rows[i][j];
  }
  return t;
}

py::dict metrics_to_dict(const har::Metrics& m) {
  py::dict d;
  d["accuracy"] = m.accuracy;
  d["macro_f1"] = m.macro_f1;
  d["per_class_f1"] = m.per_class_f1;
  d["confusion"] = m.confusion;
  d["K"] = m.K;
  d["n"] = m.n;
  return d;
}

}  // namespace

PYBIND11_MODULE(harcore, m) {
  m.doc() = "Subject-invariant activity recognition core";

  m.def(
      "wasserstein_1d",
      [](std::vector<double> a, std::vector<double> b) {
        return har::wasserstein_1d(std::move(a), std::move(b));
      },
      py::arg("a"), py::arg("b"),
      "First-order Wasserstein distance between 1-D empirical distributions");

  m.def(
      "recon_loss",
      [](const std::vector<std::vector<double>>& x_hat,
         const std::vector<std::vector<double>>& x) {
        return har::recon_loss(to_tensor(x_hat), to_tensor(x)).value;
      },
      py::arg("x_hat"), py::arg("x"),
      "Mean squared element difference (element mean, then batch mean)");

  m.def(
      "classification_loss",
      [](const std::vector<std::vector<double>>& logits, const std::vector<int>& y) {
        return har::classification_loss(to_tensor(logits), y).value;
      },
      py::arg("logits"), py::arg("y"), "Mean cross-entropy of softmax(logits) vs y");

  m.def(
      "discrimination_loss",
      [](const std::vector<double>& p, const std::vector<int>& g) {
        har::nn::Tensor t(std::vector<int>{static_cast<int>(p.size()), 1});
        t.v = p;
        return har::discrimination_loss(t, g).value;
      },
      py::arg("p"), py::arg("g"),
      "Binary cross-entropy of same-subject probabilities vs pair labels");

  m.def(
      "adversarial_loss",
      [](const std::vector<double>& p, const std::vector<int>& g) {
        har::nn::Tensor t(std::vector<int>{static_cast<int>(p.size()), 1});
        t.v = p;
        return har::adversarial_loss(t, g).value;
      },
      py::arg("p"), py::arg("g"),
      "Mean of -log p over different-subject (g = 0) pairs only");

  m.def(
      "build_pairs",
      [](const std::vector<int>& y, const std::vector<int>& s, int per_class_target,
         std::uint64_t seed) {
        auto set = har::build_pair_set_from_labels(y, s, per_class_target, seed);
        py::list out;
        for (const auto& p : set.pairs) {
          py::dict d;
          d["a"] = p.index_a;
          d["b"] = p.index_b;
          d["y"] = p.y;
          d["s_a"] = p.s_a;
          d["s_b"] = p.s_b;
          d["g"] = p.g;
          out.append(d);
        }
        return out;
      },
      py::arg("y"), py::arg("s"), py::arg("per_class_target"), py::arg("seed"),
      "Class-balanced same-activity pairs over parallel activity/subject labels");

  m.def(
      "loso_splits",
      [](const std::vector<int>& subjects, int n_val, std::uint64_t seed) {
        auto folds = har::loso_splits(subjects, n_val, seed);
        py::list out;
        for (const auto& f : folds) {
          py::dict d;
          d["test_subject"] = f.test_subject;
          d["val_subjects"] = f.val_subjects;
          d["train_subjects"] = f.train_subjects;
          out.append(d);
        }
        return out;
      },
      py::arg("subjects"), py::arg("n_val"), py::arg("seed"),
      "Leave-one-subject-out folds with seeded validation-subject draws");

  m.def(
      "metrics_from_predictions",
      [](const std::vector<int>& truths, const std::vector<int>& preds, int K) {
        return metrics_to_dict(har::metrics_from_predictions(truths, preds, K));
      },
      py::arg("truths"), py::arg("preds"), py::arg("K"),
      "Accuracy, macro F1, per-class F1, and confusion matrix");

  m.def(
      "generate_synthetic",
      [](int n_subjects, int n_activities, double duration_s, double sample_rate_hz,
         int channels, double subject_distortion_strength, std::uint64_t seed) {
        har::SyntheticParams p;
        p.n_subjects = n_subjects;
        p.n_activities = n_activities;
        p.duration_s = duration_s;
        p.sample_rate_hz = sample_rate_hz;
        p.c = channels;
        p.subject_distortion_strength = subject_distortion_strength;
        p.seed = seed;
        auto recordings = har::generate_synthetic(p);
        py::list out;
        for (const auto& r : recordings) {
          py::dict d;
          d["subject"] = r.subject_id;
          d["n_timesteps"] = r.T;
          d["n_channels"] = r.c;
          d["labels"] = r.labels;
          d["x"] = r.channels;  // row-major timesteps x channels
          out.append(d);
        }
        return out;
      },
      py::arg("n_subjects") = 6, py::arg("n_activities") = 4,
      py::arg("duration_s") = 128.0, py::arg("sample_rate_hz") = 50.0,
      py::arg("channels") = 6, py::arg("subject_distortion_strength") = 1.0,
      py::arg("seed") = 9,
      "Deterministic synthetic recordings with per-subject distortions");

  m.def(
      "run_experiment",
      [](const std::string& config_json) {
        auto config = har::ExperimentConfig::from_json(nlohmann::json::parse(config_json));
        config.validate();
        har::LosoOutcome outcome;
        {
          py::gil_scoped_release release;
          outcome = har::run_loso(config);
        }
        py::list records;
        for (const auto& r : outcome.records) records.append(r.dump());
        py::dict stats;
        stats["mean_accuracy"] = outcome.stats.mean_accuracy;
        stats["std_accuracy"] = outcome.stats.std_accuracy;
        stats["mean_macro_f1"] = outcome.stats.mean_macro_f1;
        stats["std_macro_f1"] = outcome.stats.std_macro_f1;
        stats["n_folds"] = outcome.stats.n_folds;
        py::dict out;
        out["records"] = records;
        out["stats"] = stats;
        return out;
      },
      py::arg("config_json"),
      "Full LOSO run from a JSON config string; returns records and aggregates");
}
