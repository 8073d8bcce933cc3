#include <cmath>
#include <stdexcept>

#include <doctest.h>

#include "support.hpp"
#include "weseg/rng.hpp"
#include "weseg/standardize.hpp"

using namespace weseg;

namespace {

Cohort cohort_of(std::vector<Matrix> features) {
  Cohort c;
  c.name = "t";
  int i = 0;
  for (auto& f : features) {
    SlideBag bag;
    bag.id = "s" + std::to_string(i++);
    bag.features = std::move(f);
    bag.percent = 50.0;
    c.slides.push_back(std::move(bag));
  }
  return c;
}

}  // namespace

TEST_SUITE("standardize") {

TEST_CASE("two-point dataset maps to minus one and plus one") {
  Matrix f(2, 1);
  f(0, 0) = 0.0;
  f(1, 0) = 2.0;
  const auto st = fit_standardizer(cohort_of({f}));
  CHECK(st.mean[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(st.std_dev[0] == doctest::Approx(1.0).epsilon(1e-15));  // population std
  auto g = st.applied(f);
  CHECK(g(0, 0) == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK(g(1, 0) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("fitting set becomes zero mean unit variance") {
  Rng rng(5);
  auto c = cohort_of({testutil::random_matrix(40, 6, rng, -3.0, 9.0),
                      testutil::random_matrix(25, 6, rng, 0.0, 2.0)});
  const auto st = fit_standardizer(c);
  for (auto& bag : c.slides) st.apply(bag.features);

  const std::size_t total = 65;
  for (std::size_t j = 0; j < 6; ++j) {
    double sum = 0.0, sq = 0.0;
    for (const auto& bag : c.slides) {
      for (std::size_t i = 0; i < bag.features.rows; ++i) {
        sum += bag.features(i, j);
        sq += bag.features(i, j) * bag.features(i, j);
      }
    }
    const double mean = sum / total;
    const double var = sq / total - mean * mean;
    CHECK(std::abs(mean) <= 1e-9);
    CHECK(var == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("constant dimensions pass through centered") {
  Matrix f(3, 2);
  for (int i = 0; i < 3; ++i) {
    f(i, 0) = 4.0;           // zero spread
    f(i, 1) = 1.0 * i;
  }
  const auto st = fit_standardizer(cohort_of({f}));
  CHECK(st.std_dev[0] == 1.0);
  const auto g = st.applied(f);
  for (int i = 0; i < 3; ++i) CHECK(g(i, 0) == 0.0);
}

TEST_CASE("held-out data uses the training statistics unchanged") {
  Rng rng(6);
  const auto train = cohort_of({testutil::random_matrix(30, 3, rng, 5.0, 6.0)});
  const auto st = fit_standardizer(train);
  Matrix held = testutil::random_matrix(4, 3, rng, 5.0, 6.0);
  const auto mapped = st.applied(held);
  for (std::size_t i = 0; i < held.rows; ++i) {
    for (std::size_t j = 0; j < 3; ++j) {
      CHECK(mapped(i, j) ==
            doctest::Approx((held(i, j) - st.mean[j]) / st.std_dev[j])
                .epsilon(1e-15));
    }
  }
}

TEST_CASE("needs at least two tiles") {
  CHECK_THROWS_AS(fit_standardizer(cohort_of({Matrix(1, 3)})), std::invalid_argument);
  CHECK_THROWS_AS(fit_standardizer(Cohort{}), std::invalid_argument);
}

}  // TEST_SUITE
