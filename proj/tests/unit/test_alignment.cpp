#include "fedae/alignment.hpp"
#include "fedae/error.hpp"
#include "support/oracles.hpp"

#include <doctest.h>

#include <random>

using namespace fedae;

TEST_SUITE("alignment") {

TEST_CASE("binary alignment") {
  auto r = align_binary({0, 0, 1, 1}, {1, 1, 0, 0});
  CHECK(r.corrected);
  CHECK(r.labels == Labels{0, 0, 1, 1});
  CHECK(r.accuracy == 1.0);

  r = align_binary({0, 1}, {0, 1});
  CHECK_FALSE(r.corrected);
  CHECK(r.accuracy == 1.0);

  r = align_binary({0, 0, 1, 1}, {0, 1, 0, 1});
  CHECK_FALSE(r.corrected);
  CHECK(r.labels == Labels{0, 1, 0, 1});
  CHECK(r.accuracy == 0.5);

  CHECK_THROWS_AS(align_binary({0, 1}, {0}), ShapeError);
  CHECK_THROWS_AS(align_binary({0, 1}, {0, 2}), InvalidArgument);
}

TEST_CASE("multi-class alignment examples") {
  const Labels y_true{0, 0, 1, 1, 2, 2};
  SUBCASE("full rotation") {
    const Labels pred{2, 2, 0, 0, 1, 1};
    const auto r = align_multiclass(y_true, pred, 3, 2);
    CHECK(r.corrected);
    CHECK(r.labels == y_true);
    CHECK(r.accuracy == 1.0);
    REQUIRE(r.mapping);
    CHECK(*r.mapping == std::vector<int>{1, 2, 0});  // cluster 2 -> 0, 0 -> 1, 1 -> 2
    CHECK(oracle::best_permutation_accuracy(y_true, pred, 3) == 1.0);
  }
  SUBCASE("identity") {
    const auto r = align_multiclass(y_true, y_true, 3, 2);
    CHECK_FALSE(r.corrected);
    CHECK(r.labels == y_true);
  }
  SUBCASE("conflict resolved by fallback") {
    const Labels pred{0, 0, 0, 0, 1, 1};
    const auto r = align_multiclass(y_true, pred, 3, 2);
    CHECK(r.corrected);
    CHECK(r.labels == Labels{0, 0, 0, 0, 2, 2});
    CHECK(r.accuracy == doctest::Approx(4.0 / 6.0));
    CHECK(oracle::best_permutation_accuracy(y_true, pred, 3) == doctest::Approx(4.0 / 6.0));
  }
  SUBCASE("second-choice cluster from the block histogram") {
    // Block 1 is dominated by cluster 0 (taken) but also holds cluster 2.
    const Labels truth = oracle::block_labels(3, 4);
    const Labels pred{0, 0, 0, 1, 0, 0, 2, 1, 1, 1, 1, 2};
    const auto mapping = block_frequency_mapping(pred, 3, 4);
    CHECK(mapping == std::vector<int>{0, 2, 1});
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(align_multiclass(y_true, {0, 1, 2, 0, 1}, 3, 2), ShapeError);
    CHECK_THROWS_AS(align_multiclass({0, 0, 1, 1, 2}, {0, 0, 1, 1, 2}, 3, 2), InvalidArgument);
    CHECK_THROWS_AS(align_multiclass(y_true, {0, 0, 1, 1, 2, 3}, 3, 2), InvalidArgument);
  }
}

TEST_CASE("never worse, bijective and idempotent on random inputs") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> noise(0.0, 1.0);
  for (std::size_t k : {2u, 3u, 4u, 5u, 11u}) {
    for (int t = 0; t < 200; ++t) {
      const std::size_t block = 1 + static_cast<std::size_t>(t % 9);
      const Labels truth = oracle::block_labels(k, block);
      const Labels pred = oracle::noisy_cluster_labels(truth, k, noise(rng), rng);
      const double before = oracle::accuracy(truth, pred);
      const auto r = align_multiclass(truth, pred, k, block);
      CHECK(r.accuracy >= before);
      CHECK(r.accuracy == doctest::Approx(oracle::accuracy(truth, r.labels)));
      if (r.corrected) CHECK(oracle::is_permutation_of_range(*r.mapping));
      if (!r.corrected) CHECK(r.labels == pred);
      const bool resolved = oracle::block_majorities_distinct(pred, k, block);
      if (resolved) {
        const auto again = align_multiclass(truth, r.labels, k, block);
        CHECK_FALSE(again.corrected);
        CHECK(again.labels == r.labels);
      }

      if (k == 2) {
        const auto b = align_binary(truth, pred);
        CHECK(b.accuracy >= before);
        CHECK(b.accuracy >= r.accuracy);
        CHECK(b.accuracy == doctest::Approx(oracle::best_permutation_accuracy(truth, pred, 2)));
        if (resolved) CHECK(b.accuracy == doctest::Approx(r.accuracy));
      }
    }
  }
}

TEST_CASE("shared block majority defeats the frequency heuristic") {
  // Both blocks are dominated by cluster 0, so step 1 keeps the identity and
  // step 2 hands block 1 the leftover cluster; the swap would score higher.
  const Labels truth{0, 0, 0, 0, 0, 1, 1, 1, 1, 1};
  const Labels pred{0, 0, 0, 1, 1, 0, 0, 0, 0, 1};
  const auto m = align_multiclass(truth, pred, 2, 5);
  CHECK_FALSE(m.corrected);
  CHECK(m.accuracy == doctest::Approx(0.4));
  CHECK(align_binary(truth, pred).accuracy == doctest::Approx(0.6));
}

TEST_CASE("frequency heuristic tracks the permutation optimum") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> noise(0.0, 0.6);
  int matched = 0;
  int trials = 0;
  for (std::size_t k : {3u, 4u, 5u}) {
    for (int t = 0; t < 200; ++t, ++trials) {
      const std::size_t block = 20;
      const Labels truth = oracle::block_labels(k, block);
      const Labels pred = oracle::noisy_cluster_labels(truth, k, noise(rng), rng);
      const auto r = align_multiclass(truth, pred, k, block);
      matched += r.accuracy == oracle::best_permutation_accuracy(truth, pred, k);
    }
  }
  MESSAGE("heuristic matched optimum on " << matched << "/" << trials);
  CHECK(matched >= 0.9 * trials);
}

}  // TEST_SUITE
