// Acceptance gate: ten independent checks over the built library, each
// printing one [PASS]/[FAIL] line. Exit status is nonzero when any check
// fails. Check 9 needs a real PAMAP2 tree and is skipped unless
// HAR_PAMAP2_ROOT is set.

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "har/config.hpp"
#include "har/data.hpp"
#include "har/errors.hpp"
#include "har/evaluation.hpp"
#include "har/experiments.hpp"
#include "har/losses.hpp"
#include "har/model.hpp"
#include "har/pairs.hpp"
#include "har/records.hpp"
#include "har/segmentation.hpp"
#include "har/shift.hpp"
#include "har/trainer.hpp"

#include "support/oracles.hpp"

using namespace har;
namespace fs = std::filesystem;

namespace {

struct Gate {
  int failures = 0;

  void report(int n, bool ok, const std::string& what) {
    std::printf("[%s] criterion %d: %s\n", ok ? "PASS" : "FAIL", n, what.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
  }
  void skip(int n, const std::string& why) {
    std::printf("[SKIP] criterion %d: %s\n", n, why.c_str());
    std::fflush(stdout);
  }
};

double seconds_since(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

fs::path work_dir() {
  static const fs::path dir = [] {
    auto d = fs::temp_directory_path() / "har_acceptance";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(4);
  os << v;
  return os.str();
}

// ---------------------------------------------------------------------------
// 1. Pair-set invariants on randomly generated corpora.

bool check_pair_invariants(std::string& detail) {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 gen(701);
  int built = 0;
  long long violations = 0, pairs_seen = 0;

  for (int trial = 0; built < 12 && trial < 400; ++trial) {
    const int K = 2 + static_cast<int>(gen() % 4);
    const int S = 2 + static_cast<int>(gen() % 5);
    const int n = 40 + static_cast<int>(gen() % 160);
    const int target = 10 + static_cast<int>(gen() % 40);
    std::vector<int> y(n), s(n);
    for (int i = 0; i < n; ++i) {
      y[i] = static_cast<int>(gen() % K);
      s[i] = 1 + static_cast<int>(gen() % S);
    }

    PairSet ps;
    try {
      ps = build_pair_set_from_labels(y, s, target, 5000 + trial);
    } catch (const ConstructionError&) {
      continue;  // infeasible corpus; draw another
    }
    ++built;

    int n_same = 0, n_cross = 0;
    for (const PairSample& p : ps.pairs) {
      ++pairs_seen;
      const bool same_activity = y[p.index_a] == y[p.index_b] && p.y == y[p.index_a];
      const bool g_matches = (p.g == 1) == (s[p.index_a] == s[p.index_b]);
      const bool subjects_match = p.s_a == s[p.index_a] && p.s_b == s[p.index_b];
      if (!same_activity || !g_matches || !subjects_match) ++violations;
      (p.g == 1 ? n_same : n_cross) += 1;
    }
    if (n_same != target || n_cross != target) ++violations;
  }

  const double elapsed = seconds_since(t0);
  detail = std::to_string(built) + " corpora, " + std::to_string(pairs_seen) +
           " pairs, " + std::to_string(violations) + " violations, " + fmt(elapsed) + " s";
  return built >= 10 && violations == 0 && elapsed < 1.0;
}

// ---------------------------------------------------------------------------
// 2. The adversarial objective ignores same-subject pairs exactly.

bool check_adversarial_subset(std::string& detail) {
  std::mt19937_64 gen(702);
  std::uniform_real_distribution<double> unif(0.05, 0.95);

  const int n = 16, extra = 8;
  nn::Tensor p({n, 1});
  std::vector<int> g(n);
  for (int i = 0; i < n; ++i) {
    p.v[i] = unif(gen);
    g[i] = i % 2;  // half cross-subject, half same-subject
  }
  const LossResult base = adversarial_loss(p, g);

  nn::Tensor p2({n + extra, 1});
  std::vector<int> g2(n + extra, 1);
  for (int i = 0; i < n; ++i) {
    p2.v[i] = p.v[i];
    g2[i] = g[i];
  }
  for (int i = n; i < n + extra; ++i) p2.v[i] = unif(gen);
  const LossResult ext = adversarial_loss(p2, g2);

  bool ok = ext.value == base.value;
  for (int i = 0; i < n; ++i) ok = ok && ext.grad.v[i] == base.grad.v[i];
  for (int i = n; i < n + extra; ++i) ok = ok && ext.grad.v[i] == 0.0;
  detail = "value " + fmt(base.value) + " unchanged by appended same-subject pairs";
  return ok;
}

// ---------------------------------------------------------------------------
// 3. Analytic gradients of every training objective vs central differences
//    on a tiny bundle.

nn::Tensor concat_features(const nn::Tensor& za, const nn::Tensor& zb) {
  const int B = za.dim(0), d = za.dim(1);
  nn::Tensor z({B, 2 * d});
  for (int i = 0; i < B; ++i) {
    for (int j = 0; j < d; ++j) {
      z.at2(i, j) = za.at2(i, j);
      z.at2(i, d + j) = zb.at2(i, j);
    }
  }
  return z;
}

void split_features(const nn::Tensor& gz, nn::Tensor& ga, nn::Tensor& gb) {
  const int B = gz.dim(0), d = gz.dim(1) / 2;
  ga = nn::Tensor({B, d});
  gb = nn::Tensor({B, d});
  for (int i = 0; i < B; ++i) {
    for (int j = 0; j < d; ++j) {
      ga.at2(i, j) = gz.at2(i, j);
      gb.at2(i, j) = gz.at2(i, d + j);
    }
  }
}

nn::Tensor scaled(const nn::Tensor& t, double a) {
  nn::Tensor out = t;
  for (double& x : out.v) x *= a;
  return out;
}

bool check_loss_gradients(std::string& detail) {
  const auto t0 = std::chrono::steady_clock::now();

  ModelArch arch;
  arch.c = 2;
  arch.w = 16;
  arch.d_latent = 4;
  arch.K = 3;
  arch.width_scale = 0.25;
  arch.n_train_subjects = 3;
  ModelBundle bundle = ModelBundle::build(arch, 990801);
  nn::Sequential subj_head = make_discriminator_subject_id(arch.d_latent, 3);
  {
    Rng init(424242);
    subj_head.init(init);
  }

  std::mt19937_64 gen(703);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  const int B = 5, P = 4;
  nn::Tensor x({B, arch.c, arch.w}), xa({P, arch.c, arch.w}), xb({P, arch.c, arch.w});
  for (double& v : x.v) v = unif(gen);
  for (double& v : xa.v) v = unif(gen);
  for (double& v : xb.v) v = unif(gen);
  std::vector<int> y(B);
  for (int i = 0; i < B; ++i) y[i] = i % arch.K;
  const std::vector<int> g = {0, 1, 0, 1};

  auto& F = bundle.F.net;
  auto& R = bundle.R.net;
  auto& C = bundle.C.net;
  auto& D = bundle.D.net;

  double worst = 0.0;
  std::string worst_name;
  const auto track = [&](const char* name, const test::GradCheck& res) {
    if (res.max_rel_err > worst) {
      worst = res.max_rel_err;
      worst_name = std::string(name) + " " + res.worst;
    }
  };

  {  // reconstruction through F and R
    const auto loss = [&] {
      return recon_loss(R.forward(F.forward(x, nullptr), nullptr), x).value;
    };
    nn::Sequential::Ctx fc, rc;
    const nn::Tensor z = F.forward(x, &fc);
    const LossResult l = recon_loss(R.forward(z, &rc), x);
    F.zero_grad();
    R.zero_grad();
    F.backward(fc, R.backward(rc, l.grad, true), true);
    track("recon/F", test::fd_check_params(F, loss, test::flat_grads(F)));
    track("recon/R", test::fd_check_params(R, loss, test::flat_grads(R)));
  }

  {  // classification through F and C
    const auto loss = [&] {
      return classification_loss(C.forward(F.forward(x, nullptr), nullptr), y).value;
    };
    nn::Sequential::Ctx fc, cc;
    const nn::Tensor z = F.forward(x, &fc);
    const LossResult l = classification_loss(C.forward(z, &cc), y);
    F.zero_grad();
    C.zero_grad();
    F.backward(fc, C.backward(cc, l.grad, true), true);
    track("clf/F", test::fd_check_params(F, loss, test::flat_grads(F)));
    track("clf/C", test::fd_check_params(C, loss, test::flat_grads(C)));
  }

  {  // discrimination through D on fixed pair features
    nn::Tensor z({P, 2 * arch.d_latent});
    for (double& v : z.v) v = unif(gen);
    const auto loss = [&] { return discrimination_loss(D.forward(z, nullptr), g).value; };
    nn::Sequential::Ctx dc;
    const LossResult l = discrimination_loss(D.forward(z, &dc), g);
    D.zero_grad();
    D.backward(dc, l.grad, true);
    track("disc/D", test::fd_check_params(D, loss, test::flat_grads(D)));
  }

  {  // adversarial objective back through the frozen discriminator into F
    const auto loss = [&] {
      const nn::Tensor za = F.forward(xa, nullptr), zb = F.forward(xb, nullptr);
      return adversarial_loss(D.forward(concat_features(za, zb), nullptr), g).value;
    };
    nn::Sequential::Ctx fa, fb, dc;
    const nn::Tensor za = F.forward(xa, &fa), zb = F.forward(xb, &fb);
    const LossResult l = adversarial_loss(D.forward(concat_features(za, zb), &dc), g);
    const nn::Tensor gz = D.backward(dc, l.grad, false);
    nn::Tensor ga, gb;
    split_features(gz, ga, gb);
    F.zero_grad();
    F.backward(fa, ga, true);
    F.backward(fb, gb, true);
    track("adv/F", test::fd_check_params(F, loss, test::flat_grads(F)));
  }

  {  // subject-confusion objective through the identification head into F
    const auto loss = [&] {
      return subject_confusion_loss(subj_head.forward(F.forward(x, nullptr), nullptr)).value;
    };
    nn::Sequential::Ctx fc, sc;
    const nn::Tensor z = F.forward(x, &fc);
    const LossResult l = subject_confusion_loss(subj_head.forward(z, &sc));
    F.zero_grad();
    F.backward(fc, subj_head.backward(sc, l.grad, false), true);
    track("confusion/F", test::fd_check_params(F, loss, test::flat_grads(F)));
  }

  {  // weighted stage-3.1 feature objective, all terms combined
    const LossWeights w;
    const auto loss = [&] {
      const nn::Tensor z = F.forward(x, nullptr);
      const double rec = recon_loss(R.forward(z, nullptr), x).value;
      const double clf = classification_loss(C.forward(z, nullptr), y).value;
      const nn::Tensor za = F.forward(xa, nullptr), zb = F.forward(xb, nullptr);
      const double adv =
          adversarial_loss(D.forward(concat_features(za, zb), nullptr), g).value;
      return feature_step31_loss(adv, rec, clf, w);
    };
    nn::Sequential::Ctx fc, rc, cc, fa, fb, dc;
    const nn::Tensor z = F.forward(x, &fc);
    const LossResult lr = recon_loss(R.forward(z, &rc), x);
    const LossResult lc = classification_loss(C.forward(z, &cc), y);
    const nn::Tensor za = F.forward(xa, &fa), zb = F.forward(xb, &fb);
    const LossResult la =
        adversarial_loss(D.forward(concat_features(za, zb), &dc), g);
    F.zero_grad();
    nn::Tensor gz = R.backward(rc, scaled(lr.grad, w.w_R), false);
    const nn::Tensor gz2 = C.backward(cc, scaled(lc.grad, w.w_C), false);
    for (std::size_t i = 0; i < gz.v.size(); ++i) gz.v[i] += gz2.v[i];
    F.backward(fc, gz, true);
    nn::Tensor ga, gb;
    split_features(D.backward(dc, scaled(la.grad, w.w_A), false), ga, gb);
    F.backward(fa, ga, true);
    F.backward(fb, gb, true);
    track("stage31/F", test::fd_check_params(F, loss, test::flat_grads(F)));
  }

  const double elapsed = seconds_since(t0);
  detail = "max rel err " + fmt(worst) + " (" + worst_name + "), " + fmt(elapsed) + " s";
  return worst < 1e-3 && elapsed < 30.0;
}

// ---------------------------------------------------------------------------
// 4. Freeze semantics of the adversarial step.

std::vector<WindowedSample> miniature_corpus(int n_subjects, std::uint64_t seed) {
  SyntheticParams p;
  p.n_subjects = n_subjects;
  p.n_activities = 2;
  p.duration_s = 16.0;
  p.sample_rate_hz = 50.0;
  p.c = 3;
  p.seed = seed;
  const DatasetSpec spec = default_synthetic_spec(p.n_activities, p.n_subjects, 16);
  std::vector<WindowedSample> all;
  for (const RawRecording& rec : generate_synthetic(p)) {
    auto part = segment_windows(rec, spec);
    all.insert(all.end(), part.begin(), part.end());
  }
  return all;
}

bool check_freeze_semantics(std::string& detail) {
  FoldSpec fold;
  fold.test_subject = 4;
  fold.val_subjects = {3};
  fold.train_subjects = {1, 2};
  const FoldData data = assemble_fold_data(miniature_corpus(4, 41), fold);

  ModelArch arch;
  arch.c = 3;
  arch.w = 16;
  arch.d_latent = 4;
  arch.K = 2;
  arch.width_scale = 0.25;
  ModelBundle bundle = ModelBundle::build(arch, 404);

  TrainConfig config;
  config.epochs_step3 = 2;
  config.per_class_target = 16;
  PairSet pairs = build_pair_set(data.train, config.per_class_target, 405);

  const std::vector<double> r_before = bundle.R.net.flat_params();
  const std::vector<double> f_before = bundle.F.net.flat_params();
  const std::vector<double> d_before = bundle.D.net.flat_params();

  int n_31 = 0, n_32 = 0, violations = 0;
  std::vector<double> d_snap, f_snap, c_snap;
  const SubstepObserver observer = [&](const char* event, ModelBundle& b) {
    const std::string e = event;
    if (e == "3.1.begin") {
      d_snap = b.D.net.flat_params();
    } else if (e == "3.1.end") {
      ++n_31;
      if (b.D.net.flat_params() != d_snap) ++violations;
    } else if (e == "3.2.begin") {
      f_snap = b.F.net.flat_params();
      c_snap = b.C.net.flat_params();
    } else if (e == "3.2.end") {
      ++n_32;
      if (b.F.net.flat_params() != f_snap) ++violations;
      if (b.C.net.flat_params() != c_snap) ++violations;
    }
  };

  const StepHistory history = run_step3(bundle, data.train, pairs, config, 406, {}, observer);

  const bool r_frozen = bundle.R.net.flat_params() == r_before;
  const bool f_moved = bundle.F.net.flat_params() != f_before;
  const bool d_moved = bundle.D.net.flat_params() != d_before;
  int updates = 0;
  for (const EpochRecord& e : history.epochs) updates += e.updates;

  detail = std::to_string(n_31) + " feature sub-steps, " + std::to_string(n_32) +
           " discriminator sub-steps, " + std::to_string(violations) +
           " frozen-parameter changes; R bit-identical: " + (r_frozen ? "yes" : "no");
  return history.epochs.size() == 2 && n_31 > 0 && n_31 == n_32 && violations == 0 &&
         r_frozen && f_moved && d_moved && updates > 0;
}

// ---------------------------------------------------------------------------
// 5. LOSO isolation and scaler provenance.

bool check_loso_isolation(std::string& detail) {
  const auto all = miniature_corpus(5, 51);
  std::vector<int> subjects = {1, 2, 3, 4, 5};
  const auto folds = loso_splits(subjects, 1, 1234);
  if (folds.size() != 5) {
    detail = "expected 5 folds";
    return false;
  }

  int checked = 0;
  for (const FoldSpec& fold : folds) {
    const FoldData data = assemble_fold_data(all, fold);

    std::set<int> train_s, val_s, test_s;
    for (const auto& w : data.train) train_s.insert(w.s);
    for (const auto& w : data.val) val_s.insert(w.s);
    for (const auto& w : data.test) test_s.insert(w.s);
    if (test_s != std::set<int>{fold.test_subject}) return false;
    if (train_s.count(fold.test_subject) || val_s.count(fold.test_subject)) return false;
    for (int v : val_s)
      if (train_s.count(v)) return false;
    if (data.train.size() + data.val.size() + data.test.size() != all.size()) return false;

    // Scaler statistics must recompute exactly from raw train-subject windows.
    std::vector<WindowedSample> raw_train;
    const std::set<int> train_set(fold.train_subjects.begin(), fold.train_subjects.end());
    for (const auto& w : all)
      if (train_set.count(w.s)) raw_train.push_back(w);
    const ScalerParams expect = fit_minmax(raw_train);
    if (data.scaler.min != expect.min || data.scaler.max != expect.max) return false;
    ++checked;
  }
  detail = std::to_string(checked) + " folds isolated; scaler matches train-only fit";
  return checked == 5;
}

// ---------------------------------------------------------------------------
// 6. Wasserstein distance vs two independent oracles.

bool check_wasserstein_oracle(std::string& detail) {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 gen(706);
  std::uniform_real_distribution<double> unif(-5.0, 5.0);

  double worst_equal = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 1 + static_cast<int>(gen() % 64);
    std::vector<double> a(n), b(n);
    for (double& v : a) v = unif(gen);
    for (double& v : b) v = unif(gen);
    worst_equal =
        std::max(worst_equal, std::abs(wasserstein_1d(a, b) - test::w1_sorted_diff(a, b)));
  }

  double worst_small = 0.0;
  for (int trial = 0; trial < 300; ++trial) {
    const int na = 1 + static_cast<int>(gen() % 6);
    const int nb = 1 + static_cast<int>(gen() % 6);
    std::vector<double> a(na), b(nb);
    for (double& v : a) v = unif(gen);
    for (double& v : b) v = unif(gen);
    worst_small =
        std::max(worst_small, std::abs(wasserstein_1d(a, b) - test::w1_exhaustive(a, b)));
  }

  const double elapsed = seconds_since(t0);
  detail = "1000 equal-size pairs (max dev " + fmt(worst_equal) +
           "), 300 small pairs vs exhaustive transport (max dev " + fmt(worst_small) +
           "), " + fmt(elapsed) + " s";
  return worst_equal <= 1e-9 && worst_small <= 1e-9 && elapsed < 10.0;
}

// ---------------------------------------------------------------------------
// 7. Accuracy and macro F1 vs direct confusion counting.

bool check_metric_oracle(std::string& detail) {
  std::mt19937_64 gen(707);
  int exact = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int K = 2 + static_cast<int>(gen() % 8);
    const int n = 1 + static_cast<int>(gen() % 200);
    std::vector<int> truths(n), preds(n);
    for (int i = 0; i < n; ++i) {
      truths[i] = static_cast<int>(gen() % K);
      preds[i] = static_cast<int>(gen() % K);
    }
    const Metrics m = metrics_from_predictions(truths, preds, K);
    const test::OracleMetrics o = test::metrics_oracle(truths, preds, K);
    if (m.accuracy == o.accuracy && m.macro_f1 == o.macro_f1) ++exact;
  }
  detail = std::to_string(exact) + "/100 prediction sets match exactly";
  return exact == 100;
}

// ---------------------------------------------------------------------------
// 8 + 10. Desk-scale end-to-end training and determinism.

ExperimentConfig desk_scale_config(const fs::path& out_dir) {
  ExperimentConfig c;
  c.dataset = "synthetic";
  c.synthetic.n_subjects = 6;
  c.synthetic.n_activities = 4;
  c.synthetic.subject_distortion_strength = 1.0;
  // Long recordings at a low rate: the pinned 5/5/20 epoch budget only trains
  // the discriminator far enough to drive alignment when each epoch has a few
  // hundred batches, and 25 Hz halves the per-window cost of getting them.
  c.synthetic.duration_s = 1024.0;
  c.synthetic.sample_rate_hz = 25.0;
  c.synthetic.c = 6;
  c.synthetic.seed = 9;
  c.d_latent = 16;
  c.width_scale = 0.25;
  c.window_size = 32;
  c.train.epochs_step1 = 5;
  c.train.epochs_step2 = 5;
  c.train.epochs_step3 = 20;
  c.seeds = {17, 23};
  c.pairs_per_class = 1400;
  c.n_val_subjects = 1;
  c.deterministic = true;
  c.workers = 1;
  c.out_dir = out_dir.string();
  return c;
}

struct DeskScaleRun {
  bool ran = false;
  LosoOutcome full;
  ExperimentConfig config;
};

bool check_end_to_end(std::string& detail, DeskScaleRun& shared) {
  const auto t0 = std::chrono::steady_clock::now();

  ExperimentConfig full_cfg = desk_scale_config(work_dir() / "full");
  full_cfg.mode = "full";
  const LosoOutcome full = run_loso_mode(full_cfg, TrainMode::full);

  ExperimentConfig ts2_cfg = desk_scale_config(work_dir() / "through_step2");
  ts2_cfg.mode = "through_step2";
  const LosoOutcome ts2 = run_loso_mode(ts2_cfg, TrainMode::through_step2);

  shared.ran = true;
  shared.full = full;
  shared.config = full_cfg;

  // Seed-averaged latent shift per fold, before vs after the adversarial step.
  std::map<int, std::array<double, 3>> per_fold;  // {sum d2, sum d3, count}
  for (const auto& j : full.records) {
    if (!j.contains("shift_step2") || !j.contains("shift_step3")) continue;
    const ResultRecord r = record_from_json(j);
    auto& acc = per_fold[r.fold_test_subject];
    acc[0] += r.shift_step2.overall;
    acc[1] += r.shift_step3.overall;
    acc[2] += 1.0;
  }
  int improved = 0;
  for (const auto& [fold, acc] : per_fold) {
    if (acc[1] / acc[2] < acc[0] / acc[2]) ++improved;
  }

  const double elapsed = seconds_since(t0);
  const bool acc_ok = full.stats.mean_accuracy > 0.80;
  const bool f1_ok = full.stats.mean_macro_f1 >= ts2.stats.mean_macro_f1;
  const bool shift_ok = per_fold.size() == 6 && improved >= 4;

  detail = "full acc " + fmt(full.stats.mean_accuracy) + " (>0.80: " +
           (acc_ok ? "yes" : "no") + "), full F1 " + fmt(full.stats.mean_macro_f1) +
           " vs step-2-only " + fmt(ts2.stats.mean_macro_f1) + " (" +
           (f1_ok ? "ordered" : "inverted") + "), shift reduced in " +
           std::to_string(improved) + "/6 folds, " + fmt(elapsed) + " s";
  return acc_ok && f1_ok && shift_ok;
}

bool check_determinism(std::string& detail, const DeskScaleRun& shared) {
  if (!shared.ran) {
    detail = "skipped because the end-to-end run failed to produce records";
    return false;
  }
  const fs::path log_path = fs::path(shared.config.out_dir) / "records.jsonl";
  fs::rename(log_path, fs::path(shared.config.out_dir) / "records_first.jsonl");

  const LosoOutcome second = run_loso_mode(shared.config, TrainMode::full);
  if (second.records.size() != shared.full.records.size()) {
    detail = "record count changed between runs";
    return false;
  }
  int mismatches = 0;
  for (std::size_t i = 0; i < second.records.size(); ++i) {
    if (second.records[i] != shared.full.records[i]) ++mismatches;
  }
  detail = std::to_string(second.records.size()) + " records re-derived, " +
           std::to_string(mismatches) + " mismatches";
  return mismatches == 0;
}

// ---------------------------------------------------------------------------
// 9. Full-scale PAMAP2 reproduction (opt-in).

bool check_pamap2_full_scale(std::string& detail) {
  const char* root = std::getenv("HAR_PAMAP2_ROOT");
  ExperimentConfig c;
  c.dataset = "pamap2";
  c.dataset_root = root;
  c.mode = "full";
  c.seeds = {17};
  c.out_dir = (work_dir() / "pamap2").string();
  const LosoOutcome outcome = run_loso_mode(c, TrainMode::full);
  const double target = 0.8703;
  const double dev = std::abs(outcome.stats.mean_accuracy - target);
  detail = "fold-mean accuracy " + fmt(outcome.stats.mean_accuracy) + ", reference " +
           fmt(target) + " +- 0.04 band, deviation " + fmt(dev);
  return dev <= 0.04;
}

}  // namespace

int main() {
  Gate gate;
  DeskScaleRun shared;

  const auto run = [&](int n, const std::function<bool(std::string&)>& fn,
                       const std::string& title) {
    std::string detail;
    bool ok = false;
    try {
      ok = fn(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    gate.report(n, ok, title + " -- " + detail);
  };

  run(1, check_pair_invariants,
      "pair sets keep same-activity, subject-flag, and class-balance invariants");
  run(2, check_adversarial_subset,
      "adversarial objective is exactly invariant to appended same-subject pairs");
  run(3, check_loss_gradients,
      "analytic gradients of all objectives match central differences (tol 1e-3)");
  run(4, check_freeze_semantics,
      "adversarial step keeps R frozen throughout and D/F/C frozen in their sub-steps");
  run(5, check_loso_isolation,
      "fold assembly isolates the test subject and fits the scaler on train data only");
  run(6, check_wasserstein_oracle,
      "distance matches sorted-order and exhaustive-transport oracles within 1e-9");
  run(7, check_metric_oracle, "accuracy and macro F1 match direct confusion counting");
  run(8, [&](std::string& d) { return check_end_to_end(d, shared); },
      "desk-scale training beats 0.80 accuracy, orders F1, and reduces latent shift");
  if (std::getenv("HAR_PAMAP2_ROOT")) {
    run(9, check_pamap2_full_scale, "full-scale PAMAP2 accuracy within the reference band");
  } else {
    gate.skip(9, "full-scale PAMAP2 reproduction (set HAR_PAMAP2_ROOT to enable; "
                 "not part of the desk-scale gate)");
  }
  run(10, [&](std::string& d) { return check_determinism(d, shared); },
      "re-running the desk-scale training reproduces identical records");

  if (gate.failures == 0) {
    std::printf("acceptance: all checks passed\n");
    return 0;
  }
  std::printf("acceptance: %d check(s) failed\n", gate.failures);
  return 1;
}
