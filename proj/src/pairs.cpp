#include "har/pairs.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

#include "har/errors.hpp"
#include "har/rng.hpp"

namespace har {

namespace {

// window indices grouped as activity -> subject -> indices
using Groups = std::map<int, std::map<int, std::vector<int>>>;

Groups group_windows(const std::vector<int>& y, const std::vector<int>& s) {
  Groups groups;
  for (std::size_t i = 0; i < y.size(); ++i) {
    groups[y[i]][s[i]].push_back(static_cast<int>(i));
  }
  return groups;
}

struct Cell {
  int activity;
  std::vector<const std::vector<int>*> subject_windows;  // per eligible subject
  std::vector<int> subjects;
};

PairSample draw_same_subject(const Cell& cell, Rng& rng) {
  const std::size_t si = static_cast<std::size_t>(rng.uniform_int(cell.subjects.size()));
  const std::vector<int>& wins = *cell.subject_windows[si];
  const std::size_t a = static_cast<std::size_t>(rng.uniform_int(wins.size()));
  std::size_t b = static_cast<std::size_t>(rng.uniform_int(wins.size() - 1));
  if (b >= a) ++b;
  PairSample p;
  p.index_a = wins[a];
  p.index_b = wins[b];
  p.y = cell.activity;
  p.s_a = p.s_b = cell.subjects[si];
  p.g = 1;
  return p;
}

PairSample draw_cross_subject(const Cell& cell, Rng& rng) {
  const std::size_t sa = static_cast<std::size_t>(rng.uniform_int(cell.subjects.size()));
  std::size_t sb = static_cast<std::size_t>(rng.uniform_int(cell.subjects.size() - 1));
  if (sb >= sa) ++sb;
  const std::vector<int>& wa = *cell.subject_windows[sa];
  const std::vector<int>& wb = *cell.subject_windows[sb];
  PairSample p;
  p.index_a = wa[static_cast<std::size_t>(rng.uniform_int(wa.size()))];
  p.index_b = wb[static_cast<std::size_t>(rng.uniform_int(wb.size()))];
  p.y = cell.activity;
  p.s_a = cell.subjects[sa];
  p.s_b = cell.subjects[sb];
  p.g = 0;
  return p;
}

PairSet sample_pairs(const Groups& groups, int per_class_target, std::uint64_t seed) {
  if (per_class_target <= 0) {
    throw std::invalid_argument("build_pair_set: per_class_target must be > 0");
  }
  // An activity is feasible for g=1 when some subject has two windows of it,
  // and for g=0 when two subjects have windows of it.
  std::vector<Cell> same_cells, cross_cells;
  for (const auto& [activity, by_subject] : groups) {
    Cell same{activity, {}, {}}, cross{activity, {}, {}};
    for (const auto& [subject, wins] : by_subject) {
      cross.subject_windows.push_back(&wins);
      cross.subjects.push_back(subject);
      if (wins.size() >= 2) {
        same.subject_windows.push_back(&wins);
        same.subjects.push_back(subject);
      }
    }
    if (!same.subjects.empty()) same_cells.push_back(std::move(same));
    if (cross.subjects.size() >= 2) cross_cells.push_back(std::move(cross));
  }
  if (same_cells.empty()) {
    throw ConstructionError("build_pair_set: no feasible pair for class g=1 "
                            "(no subject has two windows of one activity)");
  }
  if (cross_cells.empty()) {
    throw ConstructionError("build_pair_set: no feasible pair for class g=0 "
                            "(no activity is shared by two subjects)");
  }

  PairSet set;
  set.per_class_target = per_class_target;
  set.seed = seed;
  set.pairs.reserve(static_cast<std::size_t>(per_class_target) * 2);
  Rng rng(mix_seed(seed, 0x9a12ULL));
  for (int i = 0; i < per_class_target; ++i) {
    const auto& cell =
        same_cells[static_cast<std::size_t>(rng.uniform_int(same_cells.size()))];
    set.pairs.push_back(draw_same_subject(cell, rng));
  }
  for (int i = 0; i < per_class_target; ++i) {
    const auto& cell =
        cross_cells[static_cast<std::size_t>(rng.uniform_int(cross_cells.size()))];
    set.pairs.push_back(draw_cross_subject(cell, rng));
  }
  return set;
}

}  // namespace

PairSet build_pair_set_from_labels(const std::vector<int>& y, const std::vector<int>& s,
                                   int per_class_target, std::uint64_t seed) {
  if (y.size() != s.size()) {
    throw std::invalid_argument("build_pair_set: label arrays differ in length");
  }
  return sample_pairs(group_windows(y, s), per_class_target, seed);
}

PairSet build_pair_set(const std::vector<WindowedSample>& windows, int per_class_target,
                       std::uint64_t seed) {
  std::vector<int> y(windows.size()), s(windows.size());
  for (std::size_t i = 0; i < windows.size(); ++i) {
    y[i] = windows[i].y;
    s[i] = windows[i].s;
  }
  return build_pair_set_from_labels(y, s, per_class_target, seed);
}

PairSet build_pair_set_subject_only(const std::vector<WindowedSample>& windows,
                                    int per_class_target, std::uint64_t seed) {
  // Collapse all activities into one bucket; emitted pairs carry y = -1.
  std::vector<int> y(windows.size(), -1), s(windows.size());
  for (std::size_t i = 0; i < windows.size(); ++i) s[i] = windows[i].s;
  return sample_pairs(group_windows(y, s), per_class_target, seed);
}

std::vector<std::vector<PairSample>> pair_batches(const PairSet& pair_set, int n_batches,
                                                  std::uint64_t seed) {
  if (n_batches < 1) throw std::invalid_argument("pair_batches: n_batches must be >= 1");
  const std::size_t n = pair_set.pairs.size();
  if (static_cast<std::size_t>(n_batches) > n) {
    throw std::invalid_argument("pair_batches: more batches than pairs");
  }
  std::vector<PairSample> shuffled = pair_set.pairs;
  Rng rng(mix_seed(seed, 0xba7cULL));
  rng.shuffle(shuffled);

  std::vector<std::vector<PairSample>> batches(n_batches);
  const std::size_t base = n / n_batches;
  const std::size_t extra = n % n_batches;
  std::size_t pos = 0;
  for (int b = 0; b < n_batches; ++b) {
    const std::size_t len = base + (static_cast<std::size_t>(b) < extra ? 1 : 0);
    batches[b].assign(shuffled.begin() + pos, shuffled.begin() + pos + len);
    pos += len;
  }
  return batches;
}

}  // namespace har
