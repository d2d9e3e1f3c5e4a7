#include "har/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>

#include "har/errors.hpp"
#include "har/rng.hpp"

namespace har {

std::string to_string(TrainMode m) {
  switch (m) {
    case TrainMode::supervised_only: return "supervised_only";
    case TrainMode::through_step2: return "through_step2";
    case TrainMode::full: return "full";
  }
  return "?";
}

TrainMode train_mode_from_string(const std::string& s) {
  if (s == "supervised_only") return TrainMode::supervised_only;
  if (s == "through_step2") return TrainMode::through_step2;
  if (s == "full") return TrainMode::full;
  throw ConfigError("unknown train mode: '" + s + "'");
}

void TrainConfig::validate() const {
  if (epochs_step1 < 1 || epochs_step2 < 1 || epochs_step3 < 1) {
    throw std::invalid_argument("TrainConfig: epochs must be >= 1");
  }
  for (double lr : {lr_step1_F, lr_step1_R, lr_step2_F, lr_step2_R, lr_step2_C,
                    lr_step2_D, lr_step3_F, lr_step3_C, lr_step3_D, lr_supervised}) {
    if (lr <= 0.0) throw std::invalid_argument("TrainConfig: learning rates must be > 0");
  }
  if (batch_a_step1 < 1 || batch_a_step23 < 1) {
    throw std::invalid_argument("TrainConfig: batch sizes must be >= 1");
  }
  if (per_class_target < 1) {
    throw std::invalid_argument("TrainConfig: per_class_target must be >= 1");
  }
  weights.validate();
}

namespace {

// per-purpose stream ids under the fold seed
constexpr std::uint64_t kStreamInit = 1;
constexpr std::uint64_t kStreamPairs = 2;
constexpr std::uint64_t kStreamValPairs = 3;
constexpr std::uint64_t kStreamStep1 = 0x51;
constexpr std::uint64_t kStreamStep2 = 0x52;
constexpr std::uint64_t kStreamStep3 = 0x53;
constexpr std::uint64_t kStreamSupervised = 0x54;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::vector<std::vector<int>> window_batches(std::size_t n, int batch, Rng& rng) {
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  rng.shuffle(idx);
  std::vector<std::vector<int>> out;
  for (std::size_t start = 0; start < n; start += batch) {
    out.emplace_back(idx.begin() + start,
                     idx.begin() + std::min(n, start + static_cast<std::size_t>(batch)));
  }
  return out;
}

void add_scaled(nn::Tensor& dst, const nn::Tensor& src, double s) {
  if (!dst.same_shape(src)) throw std::invalid_argument("trainer: gradient shape mismatch");
  for (std::size_t i = 0; i < dst.v.size(); ++i) dst.v[i] += s * src.v[i];
}

nn::Tensor scaled(const nn::Tensor& src, double s) {
  nn::Tensor out(src.shape);
  for (std::size_t i = 0; i < src.v.size(); ++i) out.v[i] = s * src.v[i];
  return out;
}

nn::Tensor concat_cols(const nn::Tensor& a, const nn::Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.dim(0) != b.dim(0)) {
    throw std::invalid_argument("trainer: cannot concatenate feature tensors");
  }
  nn::Tensor out({a.dim(0), a.dim(1) + b.dim(1)});
  for (int i = 0; i < a.dim(0); ++i) {
    for (int j = 0; j < a.dim(1); ++j) out.at2(i, j) = a.at2(i, j);
    for (int j = 0; j < b.dim(1); ++j) out.at2(i, a.dim(1) + j) = b.at2(i, j);
  }
  return out;
}

std::pair<nn::Tensor, nn::Tensor> split_cols(const nn::Tensor& g, int d) {
  nn::Tensor a({g.dim(0), d}), b({g.dim(0), g.dim(1) - d});
  for (int i = 0; i < g.dim(0); ++i) {
    for (int j = 0; j < d; ++j) a.at2(i, j) = g.at2(i, j);
    for (int j = d; j < g.dim(1); ++j) b.at2(i, j - d) = g.at2(i, j);
  }
  return {std::move(a), std::move(b)};
}

struct PairBatch {
  nn::Tensor xa{std::vector<int>{0}};
  nn::Tensor xb{std::vector<int>{0}};
  std::vector<int> g;
  bool has_g0 = false;
};

PairBatch pack_pair_batch(const std::vector<WindowedSample>& windows,
                          const std::vector<PairSample>& pairs) {
  std::vector<int> ia(pairs.size()), ib(pairs.size());
  PairBatch pb;
  pb.g.resize(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    ia[i] = pairs[i].index_a;
    ib[i] = pairs[i].index_b;
    pb.g[i] = pairs[i].g;
    if (pairs[i].g == 0) pb.has_g0 = true;
  }
  pb.xa = pack_windows(windows, ia);
  pb.xb = pack_windows(windows, ib);
  return pb;
}

std::map<int, int> subject_indexer(const std::vector<WindowedSample>& train) {
  std::set<int> subjects;
  for (const auto& w : train) subjects.insert(w.s);
  std::map<int, int> index;
  int next = 0;
  for (int s : subjects) index[s] = next++;
  return index;
}

void verify_or_throw(const Block& blk, const char* where) {
  if (!blk.matches_snapshot()) {
    throw FreezeViolation("trainer: parameters of frozen block " + blk.name +
                          " changed during " + where);
  }
}

void check_pair_set(const PairSet& pair_set) {
  if (pair_set.pairs.empty()) throw std::invalid_argument("trainer: empty pair set");
  std::size_t n0 = 0, n1 = 0;
  for (const auto& p : pair_set.pairs) (p.g == 0 ? n0 : n1)++;
  if (n0 != n1) throw std::invalid_argument("trainer: pair set is class-imbalanced");
}

bool uses_pair_head(DiscriminatorVariant v) {
  return v == DiscriminatorVariant::ours || v == DiscriminatorVariant::pair_random;
}

/// Rebuilds the step's pair set when per-epoch refresh is enabled.
PairSet epoch_pair_set(const PairSet& base, const std::vector<WindowedSample>& train,
                       DiscriminatorVariant variant, std::uint64_t step_seed, int epoch,
                       bool refresh) {
  if (!refresh) return base;
  const std::uint64_t seed = mix_seed(step_seed, 0x9ef8ULL + static_cast<std::uint64_t>(epoch));
  if (variant == DiscriminatorVariant::pair_random) {
    return build_pair_set_subject_only(train, base.per_class_target, seed);
  }
  return build_pair_set(train, base.per_class_target, seed);
}

/// Mean of the recorded losses over processed batches.
void finalize_losses(EpochRecord& rec, const std::map<std::string, double>& sums, int n) {
  for (const auto& [name, sum] : sums) {
    rec.losses[name] = n > 0 ? sum / n : 0.0;
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Step 1: autoencoder pre-training

StepHistory run_step1(ModelBundle& bundle, const std::vector<WindowedSample>& train,
                      const TrainConfig& config, std::uint64_t seed,
                      const EpochHook& hook) {
  config.validate();
  if (train.empty()) throw std::invalid_argument("run_step1: empty training set");

  Block& F = bundle.F;
  Block& R = bundle.R;
  F.frozen = R.frozen = false;
  F.opt = nn::Adam(config.lr_step1_F);
  R.opt = nn::Adam(config.lr_step1_R);
  bundle.C.frozen = bundle.D.frozen = true;
  bundle.C.take_snapshot();
  bundle.D.take_snapshot();

  const std::uint64_t step_seed = mix_seed(seed, kStreamStep1);
  StepHistory history{"step1", {}};
  for (int epoch = 1; epoch <= config.epochs_step1; ++epoch) {
    const auto t0 = Clock::now();
    Rng rng(mix_seed(step_seed, static_cast<std::uint64_t>(epoch)));
    const auto batches = window_batches(train.size(), config.batch_a_step1, rng);

    double recon_sum = 0.0;
    for (const auto& batch : batches) {
      const nn::Tensor x = pack_windows(train, batch);
      nn::Sequential::Ctx fctx, rctx;
      const nn::Tensor z = F.net.forward(x, &fctx);
      const nn::Tensor xh = R.net.forward(z, &rctx);
      const LossResult res = recon_loss(xh, x);
      recon_sum += res.value;

      F.net.zero_grad();
      R.net.zero_grad();
      const nn::Tensor gz = R.net.backward(rctx, res.grad, true);
      F.net.backward(fctx, gz, true);
      F.opt.step(F.net.params());
      R.opt.step(R.net.params());
    }

    verify_or_throw(bundle.C, "step1");
    verify_or_throw(bundle.D, "step1");

    EpochRecord rec;
    rec.epoch = epoch;
    rec.updates = static_cast<int>(batches.size());
    finalize_losses(rec, {{"recon", recon_sum}}, rec.updates);
    rec.seconds = seconds_since(t0);
    if (hook) hook(history.step, epoch, rec);
    history.epochs.push_back(std::move(rec));
  }
  bundle.C.frozen = bundle.D.frozen = false;
  return history;
}

// ---------------------------------------------------------------------------
// Step 2: joint supervised pre-training

StepHistory run_step2(ModelBundle& bundle, const std::vector<WindowedSample>& train,
                      const PairSet& pair_set, const TrainConfig& config,
                      std::uint64_t seed, const EpochHook& hook) {
  config.validate();
  if (train.empty()) throw std::invalid_argument("run_step2: empty training set");
  check_pair_set(pair_set);

  Block& F = bundle.F;
  Block& R = bundle.R;
  Block& C = bundle.C;
  Block& D = bundle.D;
  for (Block* b : bundle.blocks()) b->frozen = false;
  F.opt = nn::Adam(config.lr_step2_F);
  R.opt = nn::Adam(config.lr_step2_R);
  C.opt = nn::Adam(config.lr_step2_C);
  D.opt = nn::Adam(config.lr_step2_D);

  const DiscriminatorVariant variant = bundle.arch.variant;
  const std::map<int, int> subj_index =
      variant == DiscriminatorVariant::subject_id ? subject_indexer(train)
                                                  : std::map<int, int>{};

  const std::uint64_t step_seed = mix_seed(seed, kStreamStep2);
  StepHistory history{"step2", {}};
  for (int epoch = 1; epoch <= config.epochs_step2; ++epoch) {
    const auto t0 = Clock::now();
    const PairSet& pairs = pair_set;
    const PairSet refreshed = epoch_pair_set(pairs, train, variant, step_seed, epoch,
                                             config.refresh_pairs_each_epoch);
    const PairSet& active = config.refresh_pairs_each_epoch ? refreshed : pairs;

    Rng rng(mix_seed(step_seed, static_cast<std::uint64_t>(epoch)));
    const auto a_batches = window_batches(train.size(), config.batch_a_step23, rng);
    const auto p_batches =
        pair_batches(active, static_cast<int>(a_batches.size()),
                     mix_seed(step_seed, 0xb000ULL + static_cast<std::uint64_t>(epoch)));

    std::map<std::string, double> sums{
        {"classification", 0.0}, {"recon_pair", 0.0}, {"discrimination", 0.0}};
    for (std::size_t i = 0; i < a_batches.size(); ++i) {
      const auto& a_idx = a_batches[i];
      const nn::Tensor xA = pack_windows(train, a_idx);
      std::vector<int> y(a_idx.size());
      for (std::size_t k = 0; k < a_idx.size(); ++k) y[k] = train[a_idx[k]].y;

      nn::Sequential::Ctx fctxA, cctx;
      const nn::Tensor zA = F.net.forward(xA, &fctxA);
      const nn::Tensor logits = C.net.forward(zA, &cctx);
      const LossResult cls = classification_loss(logits, y);

      const PairBatch pb = pack_pair_batch(train, p_batches[i]);
      nn::Sequential::Ctx fctxPa, fctxPb, rctxa, rctxb;
      const nn::Tensor zPa = F.net.forward(pb.xa, &fctxPa);
      const nn::Tensor zPb = F.net.forward(pb.xb, &fctxPb);
      const nn::Tensor xha = R.net.forward(zPa, &rctxa);
      const nn::Tensor xhb = R.net.forward(zPb, &rctxb);
      const LossResult ra = recon_loss(xha, pb.xa);
      const LossResult rb = recon_loss(xhb, pb.xb);

      nn::Sequential::Ctx dctx;
      LossResult disc;
      if (uses_pair_head(variant)) {
        const nn::Tensor p = D.net.forward(concat_cols(zPa, zPb), &dctx);
        disc = discrimination_loss(p, pb.g);
      } else {
        std::vector<int> subj(a_idx.size());
        for (std::size_t k = 0; k < a_idx.size(); ++k) {
          subj[k] = subj_index.at(train[a_idx[k]].s);
        }
        const nn::Tensor slogits = D.net.forward(zA, &dctx);
        disc = classification_loss(slogits, subj);
      }

      sums["classification"] += cls.value;
      sums["recon_pair"] += 0.5 * (ra.value + rb.value);
      sums["discrimination"] += disc.value;

      // All gradients are taken at the batch-start parameters; the stage-2
      // feature objective has no discriminator term, so D's input gradient
      // is dropped.
      for (Block* b : bundle.blocks()) b->net.zero_grad();
      const nn::Tensor gzA_C = C.net.backward(cctx, cls.grad, true);
      const nn::Tensor gzPa_R = R.net.backward(rctxa, scaled(ra.grad, 0.5), true);
      const nn::Tensor gzPb_R = R.net.backward(rctxb, scaled(rb.grad, 0.5), true);
      D.net.backward(dctx, disc.grad, true);

      F.net.backward(fctxA, gzA_C, true);
      F.net.backward(fctxPa, gzPa_R, true);
      F.net.backward(fctxPb, gzPb_R, true);

      F.opt.step(F.net.params());
      R.opt.step(R.net.params());
      C.opt.step(C.net.params());
      D.opt.step(D.net.params());
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.updates = static_cast<int>(a_batches.size());
    finalize_losses(rec, sums, rec.updates);
    rec.seconds = seconds_since(t0);
    if (hook) hook(history.step, epoch, rec);
    history.epochs.push_back(std::move(rec));
  }
  return history;
}

// ---------------------------------------------------------------------------
// Step 3: alternating adversarial optimization

StepHistory run_step3(ModelBundle& bundle, const std::vector<WindowedSample>& train,
                      const PairSet& pair_set, const TrainConfig& config,
                      std::uint64_t seed, const EpochHook& hook,
                      const SubstepObserver& observer) {
  config.validate();
  if (train.empty()) throw std::invalid_argument("run_step3: empty training set");
  check_pair_set(pair_set);

  Block& F = bundle.F;
  Block& R = bundle.R;
  Block& C = bundle.C;
  Block& D = bundle.D;
  F.frozen = C.frozen = D.frozen = false;
  R.frozen = true;  // frozen for the entire step
  R.take_snapshot();
  F.opt = nn::Adam(config.lr_step3_F);
  C.opt = nn::Adam(config.lr_step3_C);
  D.opt = nn::Adam(config.lr_step3_D);

  const DiscriminatorVariant variant = bundle.arch.variant;
  const bool pair_head = uses_pair_head(variant);
  const std::map<int, int> subj_index =
      variant == DiscriminatorVariant::subject_id ? subject_indexer(train)
                                                  : std::map<int, int>{};
  const LossWeights& wts = config.weights;

  const std::uint64_t step_seed = mix_seed(seed, kStreamStep3);
  StepHistory history{"step3", {}};
  for (int epoch = 1; epoch <= config.epochs_step3; ++epoch) {
    const auto t0 = Clock::now();
    const PairSet refreshed = epoch_pair_set(pair_set, train, variant, step_seed, epoch,
                                             config.refresh_pairs_each_epoch);
    const PairSet& active = config.refresh_pairs_each_epoch ? refreshed : pair_set;

    Rng rng(mix_seed(step_seed, static_cast<std::uint64_t>(epoch)));
    const auto a_batches = window_batches(train.size(), config.batch_a_step23, rng);
    const auto p_batches =
        pair_batches(active, static_cast<int>(a_batches.size()),
                     mix_seed(step_seed, 0xb000ULL + static_cast<std::uint64_t>(epoch)));

    std::map<std::string, double> sums{{"classification", 0.0},
                                       {"recon_pair", 0.0},
                                       {"adversarial", 0.0},
                                       {"discrimination", 0.0},
                                       {"feature31", 0.0}};
    int processed = 0, skipped = 0;
    for (std::size_t i = 0; i < a_batches.size(); ++i) {
      const PairBatch pb = pack_pair_batch(train, p_batches[i]);
      if (pair_head && !pb.has_g0) {
        // The adversarial objective is undefined without a cross-subject
        // pair; skip the iteration and count it.
        ++skipped;
        continue;
      }

      const auto& a_idx = a_batches[i];
      const nn::Tensor xA = pack_windows(train, a_idx);
      std::vector<int> y(a_idx.size());
      for (std::size_t k = 0; k < a_idx.size(); ++k) y[k] = train[a_idx[k]].y;

      // --- sub-step 3.1: D frozen; F and C update ---
      D.frozen = true;
      if (config.strict_freeze_checks) D.take_snapshot();
      if (observer) observer("3.1.begin", bundle);

      nn::Sequential::Ctx fctxA, cctx, fctxPa, fctxPb, rctxa, rctxb, dctx31;
      const nn::Tensor zA = F.net.forward(xA, &fctxA);
      const nn::Tensor logits = C.net.forward(zA, &cctx);
      const LossResult cls = classification_loss(logits, y);

      const nn::Tensor zPa = F.net.forward(pb.xa, &fctxPa);
      const nn::Tensor zPb = F.net.forward(pb.xb, &fctxPb);
      const nn::Tensor xha = R.net.forward(zPa, &rctxa);
      const nn::Tensor xhb = R.net.forward(zPb, &rctxb);
      const LossResult ra = recon_loss(xha, pb.xa);
      const LossResult rb = recon_loss(xhb, pb.xb);
      const double recon_pair = 0.5 * (ra.value + rb.value);

      LossResult adv;
      nn::Tensor gzPa_A({0}), gzPb_A({0}), gzA_A({0});
      if (pair_head) {
        const nn::Tensor p = D.net.forward(concat_cols(zPa, zPb), &dctx31);
        adv = adversarial_loss(p, pb.g);
        const nn::Tensor gpcat = D.net.backward(dctx31, adv.grad, false);
        std::tie(gzPa_A, gzPb_A) = split_cols(gpcat, bundle.arch.d_latent);
      } else {
        const nn::Tensor slogits = D.net.forward(zA, &dctx31);
        adv = subject_confusion_loss(slogits);
        gzA_A = D.net.backward(dctx31, adv.grad, false);
      }

      F.net.zero_grad();
      C.net.zero_grad();
      const nn::Tensor gzA_C = C.net.backward(cctx, cls.grad, true);
      // R is frozen: reconstruction gradients flow through it to F only.
      const nn::Tensor gzPa_R = R.net.backward(rctxa, scaled(ra.grad, 0.5), false);
      const nn::Tensor gzPb_R = R.net.backward(rctxb, scaled(rb.grad, 0.5), false);

      if (pair_head) {
        nn::Tensor gPa = scaled(gzPa_R, wts.w_R);
        add_scaled(gPa, gzPa_A, wts.w_A);
        nn::Tensor gPb = scaled(gzPb_R, wts.w_R);
        add_scaled(gPb, gzPb_A, wts.w_A);
        F.net.backward(fctxPa, gPa, true);
        F.net.backward(fctxPb, gPb, true);
        F.net.backward(fctxA, scaled(gzA_C, wts.w_C), true);
      } else {
        F.net.backward(fctxPa, scaled(gzPa_R, wts.w_R), true);
        F.net.backward(fctxPb, scaled(gzPb_R, wts.w_R), true);
        nn::Tensor gA = scaled(gzA_C, wts.w_C);
        add_scaled(gA, gzA_A, wts.w_A);
        F.net.backward(fctxA, gA, true);
      }

      F.opt.step(F.net.params());
      C.opt.step(C.net.params());
      if (observer) observer("3.1.end", bundle);
      if (config.strict_freeze_checks) {
        verify_or_throw(D, "step 3.1");
        verify_or_throw(R, "step 3.1");
      }

      // --- sub-step 3.2: F and C frozen; D updates on refreshed features ---
      D.frozen = false;
      F.frozen = C.frozen = true;
      if (config.strict_freeze_checks) {
        F.take_snapshot();
        C.take_snapshot();
      }
      if (observer) observer("3.2.begin", bundle);

      nn::Sequential::Ctx dctx32;
      LossResult disc;
      if (pair_head) {
        const nn::Tensor zPa2 = F.net.forward(pb.xa, nullptr);
        const nn::Tensor zPb2 = F.net.forward(pb.xb, nullptr);
        const nn::Tensor p2 = D.net.forward(concat_cols(zPa2, zPb2), &dctx32);
        disc = discrimination_loss(p2, pb.g);
      } else {
        std::vector<int> subj(a_idx.size());
        for (std::size_t k = 0; k < a_idx.size(); ++k) {
          subj[k] = subj_index.at(train[a_idx[k]].s);
        }
        const nn::Tensor zA2 = F.net.forward(xA, nullptr);
        const nn::Tensor slogits2 = D.net.forward(zA2, &dctx32);
        disc = classification_loss(slogits2, subj);
      }
      D.net.zero_grad();
      D.net.backward(dctx32, disc.grad, true);
      D.opt.step(D.net.params());
      if (observer) observer("3.2.end", bundle);
      if (config.strict_freeze_checks) {
        verify_or_throw(F, "step 3.2");
        verify_or_throw(C, "step 3.2");
        verify_or_throw(R, "step 3.2");
      }
      F.frozen = C.frozen = false;

      sums["classification"] += cls.value;
      sums["recon_pair"] += recon_pair;
      sums["adversarial"] += adv.value;
      sums["discrimination"] += disc.value;
      sums["feature31"] += feature_step31_loss(adv.value, recon_pair, cls.value, wts);
      ++processed;
    }

    verify_or_throw(R, "step3 epoch");

    EpochRecord rec;
    rec.epoch = epoch;
    rec.updates = processed;
    rec.skipped_pair_batches = skipped;
    finalize_losses(rec, sums, processed);
    rec.seconds = seconds_since(t0);
    if (hook) hook(history.step, epoch, rec);
    history.epochs.push_back(std::move(rec));
  }

  verify_or_throw(R, "step3");
  R.frozen = false;
  return history;
}

// ---------------------------------------------------------------------------
// Fold assembly and full training

FoldData assemble_fold_data(const std::vector<WindowedSample>& all_windows,
                            const FoldSpec& fold) {
  FoldData data;
  data.fold = fold;
  const std::set<int> val_set(fold.val_subjects.begin(), fold.val_subjects.end());
  const std::set<int> train_set(fold.train_subjects.begin(), fold.train_subjects.end());
  for (const auto& w : all_windows) {
    if (w.s == fold.test_subject) {
      data.test.push_back(w);
    } else if (val_set.count(w.s)) {
      data.val.push_back(w);
    } else if (train_set.count(w.s)) {
      data.train.push_back(w);
    } else {
      throw DatasetError("assemble_fold_data: window subject " + std::to_string(w.s) +
                         " is not in the fold's subject sets");
    }
  }
  if (data.train.empty() || data.val.empty() || data.test.empty()) {
    throw DatasetError("assemble_fold_data: fold with test subject " +
                       std::to_string(fold.test_subject) +
                       " has an empty train, validation, or test set");
  }
  data.scaler = fit_minmax(data.train);
  apply_minmax(data.train, data.scaler);
  apply_minmax(data.val, data.scaler);
  apply_minmax(data.test, data.scaler);
  return data;
}

double pair_disc_accuracy(ModelBundle& bundle, const std::vector<WindowedSample>& windows,
                          const std::vector<PairSample>& pairs) {
  if (!uses_pair_head(bundle.arch.variant)) {
    throw std::invalid_argument("pair_disc_accuracy: discriminator takes no pairs");
  }
  if (pairs.empty()) throw std::invalid_argument("pair_disc_accuracy: empty pair list");
  const nn::Tensor z = embed_windows(bundle.F.net, windows);
  const int d = z.dim(1);
  nn::Tensor cat({static_cast<int>(pairs.size()), 2 * d});
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    for (int j = 0; j < d; ++j) {
      cat.at2(static_cast<int>(i), j) = z.at2(pairs[i].index_a, j);
      cat.at2(static_cast<int>(i), d + j) = z.at2(pairs[i].index_b, j);
    }
  }
  const nn::Tensor p = bundle.D.net.forward(cat, nullptr);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if ((p.v[i] > 0.5 ? 1 : 0) == pairs[i].g) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(pairs.size());
}

namespace {

struct BundleSnapshot {
  std::vector<std::vector<double>> blocks;
};

BundleSnapshot capture(ModelBundle& bundle) {
  BundleSnapshot snap;
  for (Block* b : bundle.blocks()) snap.blocks.push_back(b->net.flat_params());
  return snap;
}

void restore(ModelBundle& bundle, const BundleSnapshot& snap) {
  auto blocks = bundle.blocks();
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    blocks[i]->net.set_flat_params(snap.blocks[i]);
  }
}

/// Supervised baseline: F and C trained with the classification loss alone
/// for the combined epoch budget; R and D never touched.
StepHistory run_supervised(ModelBundle& bundle, const std::vector<WindowedSample>& train,
                           const TrainConfig& config, std::uint64_t seed,
                           const EpochHook& hook) {
  if (train.empty()) throw std::invalid_argument("run_supervised: empty training set");
  Block& F = bundle.F;
  Block& C = bundle.C;
  F.frozen = C.frozen = false;
  F.opt = nn::Adam(config.lr_supervised);
  C.opt = nn::Adam(config.lr_supervised);
  bundle.R.frozen = bundle.D.frozen = true;
  bundle.R.take_snapshot();
  bundle.D.take_snapshot();

  const int epochs = config.epochs_step1 + config.epochs_step2 + config.epochs_step3;
  const std::uint64_t step_seed = mix_seed(seed, kStreamSupervised);
  StepHistory history{"supervised", {}};
  for (int epoch = 1; epoch <= epochs; ++epoch) {
    const auto t0 = Clock::now();
    Rng rng(mix_seed(step_seed, static_cast<std::uint64_t>(epoch)));
    const auto batches = window_batches(train.size(), config.batch_a_step23, rng);
    double cls_sum = 0.0;
    for (const auto& batch : batches) {
      const nn::Tensor x = pack_windows(train, batch);
      std::vector<int> y(batch.size());
      for (std::size_t k = 0; k < batch.size(); ++k) y[k] = train[batch[k]].y;
      nn::Sequential::Ctx fctx, cctx;
      const nn::Tensor z = F.net.forward(x, &fctx);
      const nn::Tensor logits = C.net.forward(z, &cctx);
      const LossResult cls = classification_loss(logits, y);
      cls_sum += cls.value;

      F.net.zero_grad();
      C.net.zero_grad();
      const nn::Tensor gz = C.net.backward(cctx, cls.grad, true);
      F.net.backward(fctx, gz, true);
      F.opt.step(F.net.params());
      C.opt.step(C.net.params());
    }
    verify_or_throw(bundle.R, "supervised");
    verify_or_throw(bundle.D, "supervised");

    EpochRecord rec;
    rec.epoch = epoch;
    rec.updates = static_cast<int>(batches.size());
    finalize_losses(rec, {{"classification", cls_sum}}, rec.updates);
    rec.seconds = seconds_since(t0);
    if (hook) hook(history.step, epoch, rec);
    history.epochs.push_back(std::move(rec));
  }
  bundle.R.frozen = bundle.D.frozen = false;
  return history;
}

}  // namespace

TrainResult train_fold(const FoldData& data, ModelArch arch, const TrainConfig& config,
                       TrainMode mode, std::uint64_t seed, bool measure_shift,
                       bool shift_per_activity) {
  config.validate();
  std::set<int> train_subjects;
  for (const auto& w : data.train) train_subjects.insert(w.s);
  arch.n_train_subjects = static_cast<int>(train_subjects.size());
  arch.validate();

  TrainResult result{ModelBundle::build(arch, mix_seed(seed, kStreamInit)), {}, {}, {},
                     false, false};
  ModelBundle& bundle = result.bundle;

  // Train and held-out pair sets; the held-out set scales the target by the
  // validation/train window ratio and is evaluation-only.
  PairSet train_pairs, val_pairs;
  bool have_val_pairs = false;
  if (mode != TrainMode::supervised_only) {
    const std::uint64_t pair_seed = mix_seed(seed, kStreamPairs);
    if (arch.variant == DiscriminatorVariant::pair_random) {
      train_pairs = build_pair_set_subject_only(data.train, config.per_class_target,
                                                pair_seed);
    } else {
      train_pairs = build_pair_set(data.train, config.per_class_target, pair_seed);
    }
    if (uses_pair_head(arch.variant)) {
      const int val_target = std::max(
          1, static_cast<int>(std::llround(config.per_class_target *
                                           static_cast<double>(data.val.size()) /
                                           static_cast<double>(data.train.size()))));
      try {
        val_pairs = arch.variant == DiscriminatorVariant::pair_random
                        ? build_pair_set_subject_only(data.val, val_target,
                                                      mix_seed(seed, kStreamValPairs))
                        : build_pair_set(data.val, val_target,
                                         mix_seed(seed, kStreamValPairs));
        have_val_pairs = true;
      } catch (const ConstructionError&) {
        have_val_pairs = false;  // validation subjects share no activity
      }
    }
  }

  BundleSnapshot best;
  bool have_best = false;
  TrainHistory& history = result.history;
  const EpochHook hook = [&](const std::string& step, int epoch, EpochRecord& rec) {
    const Metrics val = evaluate(bundle, data.val);
    rec.val_accuracy = val.accuracy;
    rec.val_macro_f1 = val.macro_f1;
    if (have_val_pairs && step != "step1") {
      rec.val_disc_accuracy = pair_disc_accuracy(bundle, data.val, val_pairs.pairs);
    }
    // Step 1 never trains the classifier, so its checkpoints are ineligible.
    if (step != "step1" && val.macro_f1 > history.best_val_macro_f1) {
      history.best_val_macro_f1 = val.macro_f1;
      history.best_step = step;
      history.best_epoch = epoch;
      best = capture(bundle);
      have_best = true;
    }
  };

  switch (mode) {
    case TrainMode::supervised_only:
      history.steps.push_back(run_supervised(bundle, data.train, config, seed, hook));
      break;
    case TrainMode::through_step2:
      history.steps.push_back(run_step1(bundle, data.train, config, seed, hook));
      history.steps.push_back(run_step2(bundle, data.train, train_pairs, config, seed, hook));
      if (measure_shift) {
        result.shift_step2 = latent_shift(bundle.F.net, data.train, data.test, arch.K,
                                          shift_per_activity);
        result.has_shift_step2 = true;
      }
      break;
    case TrainMode::full:
      history.steps.push_back(run_step1(bundle, data.train, config, seed, hook));
      history.steps.push_back(run_step2(bundle, data.train, train_pairs, config, seed, hook));
      if (measure_shift) {
        result.shift_step2 = latent_shift(bundle.F.net, data.train, data.test, arch.K,
                                          shift_per_activity);
        result.has_shift_step2 = true;
      }
      history.steps.push_back(run_step3(bundle, data.train, train_pairs, config, seed, hook));
      if (measure_shift) {
        result.shift_step3 = latent_shift(bundle.F.net, data.train, data.test, arch.K,
                                          shift_per_activity);
        result.has_shift_step3 = true;
      }
      break;
  }

  if (have_best) restore(bundle, best);
  for (Block* b : bundle.blocks()) b->take_snapshot();
  return result;
}

}  // namespace har
