#include "har/shift.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "har/evaluation.hpp"
#include "har/rng.hpp"

namespace har {

double wasserstein_1d(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("wasserstein_1d: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const std::int64_t n = static_cast<std::int64_t>(a.size());
  const std::int64_t m = static_cast<std::int64_t>(b.size());
  // Quantile breakpoints on the common grid of 1/(n*m) mass units: a's i-th
  // order statistic covers (i*m, (i+1)*m], b's j-th covers (j*n, (j+1)*n].
  double total = 0.0;
  std::int64_t ia = 0, ib = 0, cur = 0;
  const std::int64_t L = n * m;
  while (cur < L) {
    const std::int64_t next = std::min((ia + 1) * m, (ib + 1) * n);
    total += static_cast<double>(next - cur) * std::abs(a[ia] - b[ib]);
    if (next == (ia + 1) * m) ++ia;
    if (next == (ib + 1) * n) ++ib;
    cur = next;
  }
  return total / static_cast<double>(L);
}

double sliced_wasserstein(const nn::Tensor& a, const nn::Tensor& b, int n_projections,
                          std::uint64_t seed) {
  if (a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(1)) {
    throw std::invalid_argument("sliced_wasserstein: need (N, d) with matching d");
  }
  if (a.dim(0) == 0 || b.dim(0) == 0) {
    throw std::invalid_argument("sliced_wasserstein: empty sample");
  }
  if (n_projections < 1) {
    throw std::invalid_argument("sliced_wasserstein: need >= 1 projection");
  }
  const int d = a.dim(1);
  Rng rng(mix_seed(seed, 0x51cedULL));
  std::vector<double> dir(d), pa(a.dim(0)), pb(b.dim(0));
  double total = 0.0;
  for (int p = 0; p < n_projections; ++p) {
    double norm = 0.0;
    for (int j = 0; j < d; ++j) {
      dir[j] = rng.normal();
      norm += dir[j] * dir[j];
    }
    norm = std::sqrt(norm);
    if (norm == 0.0) continue;
    for (int j = 0; j < d; ++j) dir[j] /= norm;
    for (int i = 0; i < a.dim(0); ++i) {
      double s = 0.0;
      for (int j = 0; j < d; ++j) s += a.at2(i, j) * dir[j];
      pa[i] = s;
    }
    for (int i = 0; i < b.dim(0); ++i) {
      double s = 0.0;
      for (int j = 0; j < d; ++j) s += b.at2(i, j) * dir[j];
      pb[i] = s;
    }
    total += wasserstein_1d(pa, pb);
  }
  return total / n_projections;
}

namespace {

/// Mean over latent dimensions of per-dimension 1-D distances between the
/// selected rows of two embedding matrices.
double mean_dimwise_distance(const nn::Tensor& za, const std::vector<int>& rows_a,
                             const nn::Tensor& zb, const std::vector<int>& rows_b) {
  const int d = za.dim(1);
  std::vector<double> a(rows_a.size()), b(rows_b.size());
  double total = 0.0;
  for (int j = 0; j < d; ++j) {
    for (std::size_t i = 0; i < rows_a.size(); ++i) a[i] = za.at2(rows_a[i], j);
    for (std::size_t i = 0; i < rows_b.size(); ++i) b[i] = zb.at2(rows_b[i], j);
    total += wasserstein_1d(a, b);
  }
  return total / d;
}

std::vector<int> all_rows(int n) {
  std::vector<int> idx(n);
  for (int i = 0; i < n; ++i) idx[i] = i;
  return idx;
}

}  // namespace

LatentShift latent_shift(nn::Sequential& F, const std::vector<WindowedSample>& train_windows,
                         const std::vector<WindowedSample>& test_windows, int K,
                         bool per_activity) {
  if (train_windows.empty() || test_windows.empty()) {
    throw std::invalid_argument("latent_shift: empty window set");
  }
  const nn::Tensor z_train = embed_windows(F, train_windows);
  const nn::Tensor z_test = embed_windows(F, test_windows);

  LatentShift shift;
  shift.overall =
      mean_dimwise_distance(z_train, all_rows(z_train.dim(0)), z_test,
                            all_rows(z_test.dim(0)));
  if (!per_activity) return shift;

  for (int k = 0; k < K; ++k) {
    std::vector<int> rows_a, rows_b;
    for (int i = 0; i < static_cast<int>(train_windows.size()); ++i) {
      if (train_windows[i].y == k) rows_a.push_back(i);
    }
    for (int i = 0; i < static_cast<int>(test_windows.size()); ++i) {
      if (test_windows[i].y == k) rows_b.push_back(i);
    }
    ActivityShift row;
    row.activity = k;
    if (rows_a.empty() || rows_b.empty()) {
      row.skipped = true;
    } else {
      row.distance = mean_dimwise_distance(z_train, rows_a, z_test, rows_b);
    }
    shift.per_activity.push_back(row);
  }
  return shift;
}

ShiftReport shift_delta(const std::vector<LatentShift>& after_step2,
                        const std::vector<LatentShift>& after_step3) {
  if (after_step2.size() != after_step3.size() || after_step2.empty()) {
    throw std::invalid_argument("shift_delta: mismatched fold sets");
  }
  const std::size_t n_folds = after_step2.size();
  const std::size_t n_act = after_step2.front().per_activity.size();
  for (const auto& s : after_step2) {
    if (s.per_activity.size() != n_act) {
      throw std::invalid_argument("shift_delta: inconsistent activity sets");
    }
  }
  for (const auto& s : after_step3) {
    if (s.per_activity.size() != n_act) {
      throw std::invalid_argument("shift_delta: inconsistent activity sets");
    }
  }

  ShiftReport report;
  double o2 = 0.0, o3 = 0.0;
  for (std::size_t f = 0; f < n_folds; ++f) {
    o2 += after_step2[f].overall;
    o3 += after_step3[f].overall;
  }
  report.overall_step2 = o2 / static_cast<double>(n_folds);
  report.overall_step3 = o3 / static_cast<double>(n_folds);
  report.overall_pct_change =
      report.overall_step2 > 0.0
          ? (report.overall_step2 - report.overall_step3) / report.overall_step2 * 100.0
          : 0.0;

  for (std::size_t k = 0; k < n_act; ++k) {
    ShiftReport::Row row;
    row.activity = after_step2.front().per_activity[k].activity;
    double d2 = 0.0, d3 = 0.0;
    int n = 0;
    for (std::size_t f = 0; f < n_folds; ++f) {
      const ActivityShift& a2 = after_step2[f].per_activity[k];
      const ActivityShift& a3 = after_step3[f].per_activity[k];
      if (a2.skipped || a3.skipped) continue;
      d2 += a2.distance;
      d3 += a3.distance;
      ++n;
    }
    row.n_folds = n;
    if (n > 0) {
      row.d_step2 = d2 / n;
      row.d_step3 = d3 / n;
      if (row.d_step2 > 0.0) {
        row.pct_change = (row.d_step2 - row.d_step3) / row.d_step2 * 100.0;
        row.valid = true;
      }
    }
    report.per_activity.push_back(row);
  }
  return report;
}

}  // namespace har
