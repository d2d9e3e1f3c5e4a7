#pragma once

#include <cstdint>
#include <vector>

#include "har/segmentation.hpp"

namespace har {

/// One window pair for the subject-discrimination task. Indices point into
/// the source window list; g = 1 iff both windows come from the same subject.
/// `y` is the shared activity class, or -1 for pairs built without the
/// same-activity constraint.
struct PairSample {
  int index_a = -1;
  int index_b = -1;
  int y = -1;
  int s_a = -1;
  int s_b = -1;
  int g = 0;
};

/// Class-balanced pair collection: exactly per_class_target pairs with g=0
/// and the same number with g=1.
struct PairSet {
  std::vector<PairSample> pairs;
  int per_class_target = 0;
  std::uint64_t seed = 0;
};

/// Core sampler over parallel (class, subject) label arrays.
/// Activity first, uniformly over feasible activities; then for g=1 one
/// subject and two distinct windows, for g=0 two distinct subjects and one
/// window of each. Duplicate unordered pairs are permitted. Throws
/// ConstructionError naming the infeasible g class.
PairSet build_pair_set_from_labels(const std::vector<int>& y, const std::vector<int>& s,
                                   int per_class_target, std::uint64_t seed);

PairSet build_pair_set(const std::vector<WindowedSample>& windows, int per_class_target,
                       std::uint64_t seed);

/// Variant without the same-activity constraint (pairs carry y = -1); used
/// by the random-pair discriminator baseline.
PairSet build_pair_set_subject_only(const std::vector<WindowedSample>& windows,
                                    int per_class_target, std::uint64_t seed);

/// Shuffles with a seeded generator and splits into exactly n_batches
/// contiguous batches whose sizes differ by at most one.
std::vector<std::vector<PairSample>> pair_batches(const PairSet& pair_set, int n_batches,
                                                  std::uint64_t seed);

}  // namespace har
