#include <vector>

#include <doctest.h>

#include "har/evaluation.hpp"
#include "har/rng.hpp"
#include "support/oracles.hpp"

using namespace har;

TEST_CASE("evaluation: frozen confusion example") {
  // truths (0,0,1,2) vs preds (0,1,1,2): one off-diagonal miss.
  auto m = metrics_from_predictions({0, 0, 1, 2}, {0, 1, 1, 2}, 3);
  CHECK(m.accuracy == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(m.macro_f1 == doctest::Approx(7.0 / 9.0).epsilon(1e-12));
  CHECK(m.n == 4);
  CHECK(m.at(0, 0) == 1);
  CHECK(m.at(0, 1) == 1);
  CHECK(m.at(1, 1) == 1);
  CHECK(m.at(2, 2) == 1);
  CHECK(m.at(1, 0) == 0);

  std::int64_t total = 0;
  for (auto v : m.confusion) total += v;
  CHECK(total == m.n);
}

TEST_CASE("evaluation: classes absent from truth and prediction score zero F1") {
  auto m = metrics_from_predictions({0, 0}, {0, 0}, 3);
  CHECK(m.accuracy == doctest::Approx(1.0));
  CHECK(m.per_class_f1[0] == doctest::Approx(1.0));
  CHECK(m.per_class_f1[1] == 0.0);
  CHECK(m.per_class_f1[2] == 0.0);
  CHECK(m.macro_f1 == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("evaluation: metrics agree with the direct counting oracle") {
  Rng rng(404);
  for (int trial = 0; trial < 100; ++trial) {
    const int K = 2 + static_cast<int>(rng.uniform_int(6));
    const int n = 1 + static_cast<int>(rng.uniform_int(200));
    std::vector<int> truths(n), preds(n);
    for (int i = 0; i < n; ++i) {
      truths[i] = static_cast<int>(rng.uniform_int(K));
      preds[i] = static_cast<int>(rng.uniform_int(K));
    }
    auto ours = metrics_from_predictions(truths, preds, K);
    auto oracle = test::metrics_oracle(truths, preds, K);
    CHECK(ours.accuracy == doctest::Approx(oracle.accuracy).epsilon(1e-12));
    CHECK(ours.macro_f1 == doctest::Approx(oracle.macro_f1).epsilon(1e-12));
  }
}

TEST_CASE("evaluation: argmax breaks ties toward the lowest class index") {
  nn::Tensor logits(std::vector<int>{2, 3});
  logits.at2(0, 0) = 1.0;
  logits.at2(0, 1) = 1.0;  // tie with class 0
  logits.at2(0, 2) = 0.0;
  logits.at2(1, 0) = -1.0;
  logits.at2(1, 1) = 0.5;
  logits.at2(1, 2) = 0.5;  // tie with class 1
  auto picks = argmax_rows(logits);
  CHECK(picks == std::vector<int>{0, 1});
}

TEST_CASE("evaluation: aggregate reports mean and sample deviation") {
  auto stats = aggregate({0.8, 0.9, 1.0}, {0.5, 0.5, 0.5});
  CHECK(stats.n_folds == 3);
  CHECK(stats.mean_accuracy == doctest::Approx(0.9).epsilon(1e-12));
  CHECK(stats.std_accuracy == doctest::Approx(0.1).epsilon(1e-9));  // sample, n-1
  CHECK(stats.mean_macro_f1 == doctest::Approx(0.5));
  CHECK(stats.std_macro_f1 == doctest::Approx(0.0));

  auto single = aggregate({0.8}, {0.5});
  CHECK(single.std_accuracy == 0.0);  // a lone fold has no spread
}

TEST_CASE("evaluation: prediction length mismatch is rejected") {
  CHECK_THROWS(metrics_from_predictions({0, 1}, {0}, 2));
  CHECK_THROWS(metrics_from_predictions({}, {}, 2));
  CHECK_THROWS(metrics_from_predictions({0, 2}, {0, 1}, 2));  // class out of range
}
