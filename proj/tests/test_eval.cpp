#include <doctest.h>

#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

#include "regvb/corpus.hpp"
#include "regvb/eval.hpp"

using namespace regvb;

namespace {

Matrix random_positive(std::size_t r, std::size_t c, Rng& rng) {
  Matrix m(r, c);
  for (double& v : m.data()) v = 0.01 + 10.0 * rng.uniform();
  return m;
}

Matrix random_topics(std::size_t K, std::size_t W, Rng& rng) {
  Matrix m(K, W);
  for (std::size_t k = 0; k < K; ++k) {
    const auto p = sample_dirichlet(W, 0.3, rng);
    std::copy(p.begin(), p.end(), m.row(k).begin());
  }
  return m;
}

}  // namespace

TEST_CASE("background distance") {
  SUBCASE("identical documents give zero") {
    Matrix g(6, 3);
    for (std::size_t d = 0; d < 6; ++d) g(d, 0) = 1.0, g(d, 1) = 2.0, g(d, 2) = 0.5;
    CHECK(background_distance(g) == doctest::Approx(0.0).epsilon(1e-15).scale(1.0));
  }
  SUBCASE("KL of a point mass with the floor") {
    const double f = kProbabilityFloor;
    const double p0 = 1 / (1 + f), p1 = f / (1 + f);
    const double expected = p0 * std::log(2 * p0) + p1 * std::log(2 * p1);
    CHECK(kl_to_uniform(std::vector<double>{1.0, 0.0}) == doctest::Approx(expected).epsilon(1e-14));
    CHECK(expected < std::log(2.0));
    CHECK(kl_to_uniform(std::vector<double>{0.25, 0.25, 0.25, 0.25}) == 0.0);
  }
  SUBCASE("topics owned by single documents") {
    Matrix g(2, 2);
    g(0, 0) = 5.0, g(0, 1) = 1e-200, g(1, 0) = 1e-200, g(1, 1) = 5.0;
    CHECK(background_distance(g) == doctest::Approx(std::log(2.0)).epsilon(1e-10));
  }
  SUBCASE("nonnegative and invariant to reordering") {
    Rng rng(1);
    for (int trial = 0; trial < 20; ++trial) {
      const Matrix g = random_positive(15, 4, rng);
      const double ms = background_distance(g);
      CHECK(ms >= 0.0);
      Matrix shuffled(15, 4);
      for (std::size_t d = 0; d < 15; ++d)
        for (std::size_t k = 0; k < 4; ++k) shuffled((d * 7) % 15, 3 - k) = g(d, k);
      CHECK(background_distance(shuffled) == doctest::Approx(ms).epsilon(1e-12));
    }
  }
  SUBCASE("topic-document columns are distributions") {
    Rng rng(2);
    const Matrix t = topic_document_distributions(random_positive(9, 3, rng));
    for (std::size_t k = 0; k < 3; ++k) {
      double s = 0.0;
      for (std::size_t d = 0; d < 9; ++d) s += t(d, k);
      CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("GRT") {
  Matrix a(1, 2), b(1, 2);
  a(0, 0) = 0.6, a(0, 1) = 0.4, b(0, 0) = 0.5, b(0, 1) = 0.5;
  CHECK(grt(a, b) == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(grt(a, a) == 0.0);
  CHECK_THROWS_AS(grt(a, Matrix(2, 1)), std::invalid_argument);

  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const Matrix x = random_topics(4, 10, rng), y = random_topics(4, 10, rng), z = random_topics(4, 10, rng);
    CHECK(grt(x, y) <= 2.0 * 4 + 1e-12);
    CHECK(grt(x, y) == grt(y, x));
    CHECK(grt(x, z) <= grt(x, y) + grt(y, z) + 1e-12);
  }
}

TEST_CASE("Dirichlet maximum likelihood") {
  SUBCASE("recovers known concentrations") {
    Rng rng(4);
    const std::vector<double> alpha{2.0, 5.0, 3.0};
    Matrix s(10000, 3);
    for (std::size_t n = 0; n < 10000; ++n) {
      double total = 0.0;
      for (std::size_t k = 0; k < 3; ++k) {
        std::gamma_distribution<double> g(alpha[k], 1.0);
        s(n, k) = g(rng);
        total += s(n, k);
      }
      for (std::size_t k = 0; k < 3; ++k) s(n, k) /= total;
    }
    const auto est = dirichlet_mle(s);
    CHECK(est.converged);
    for (std::size_t k = 0; k < 3; ++k) CHECK(std::abs(est.alpha[k] - alpha[k]) <= 0.1 * alpha[k]);
    CHECK(std::accumulate(est.expected.begin(), est.expected.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-14));
  }
  SUBCASE("near-uniform samples") {
    Rng rng(5);
    Matrix s(200, 4);
    for (std::size_t n = 0; n < 200; ++n)
      for (std::size_t k = 0; k < 4; ++k) s(n, k) = 0.25 + 1e-4 * (rng.uniform() - 0.5);
    const auto est = dirichlet_mle(normalize_rows(s));
    for (double e : est.expected) CHECK(std::abs(e - 0.25) < 1e-4);
  }
  SUBCASE("large concentration matches the empirical mean") {
    Rng rng(6);
    Matrix s(500, 3);
    const double alpha[] = {400.0, 250.0, 350.0};
    std::vector<double> mean(3, 0.0);
    for (std::size_t n = 0; n < 500; ++n) {
      double total = 0.0;
      for (std::size_t k = 0; k < 3; ++k) {
        std::gamma_distribution<double> g(alpha[k], 1.0);
        s(n, k) = g(rng);
        total += s(n, k);
      }
      for (std::size_t k = 0; k < 3; ++k) mean[k] += (s(n, k) /= total) / 500;
    }
    const auto est = dirichlet_mle(s);
    for (std::size_t k = 0; k < 3; ++k) CHECK(est.expected[k] == doctest::Approx(mean[k]).epsilon(1e-3));
  }
  SUBCASE("needs two samples") {
    CHECK_THROWS_AS(dirichlet_mle(Matrix(1, 3, 1.0 / 3)), std::invalid_argument);
  }
}

TEST_CASE("t distribution against Boost") {
  Rng rng(7);
  for (int i = 0; i < 300; ++i) {
    const double a = 0.1 + 20.0 * rng.uniform(), b = 0.1 + 20.0 * rng.uniform(), x = rng.uniform();
    REQUIRE(incomplete_beta(a, b, x) == doctest::Approx(boost::math::ibeta(a, b, x)).epsilon(1e-10));
  }
  CHECK(incomplete_beta(2, 3, 0.0) == 0.0);
  CHECK(incomplete_beta(2, 3, 1.0) == 1.0);
  for (int i = 0; i < 300; ++i) {
    const double dof = 1.0 + static_cast<double>(rng.below(60));
    const double t = 8.0 * (rng.uniform() - 0.5);
    const boost::math::students_t dist(dof);
    const double p = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
    REQUIRE(student_t_two_sided_p(t, dof) == doctest::Approx(p).epsilon(1e-10));
  }
}

TEST_CASE("paired t-test") {
  const std::vector<double> a{1.2, 0.8, 1.5, 1.1, 0.9}, b{1.0, 0.9, 1.1, 0.7, 0.8};
  SUBCASE("hand dataset against scipy") {
    const auto r = paired_t_test(a, b);  // tests/oracles/lda_toy.py, toy 3
    CHECK(r.t == doctest::Approx(2.1081851067789197).epsilon(1e-12));
    CHECK(r.p == doctest::Approx(0.1027004274955118).epsilon(1e-10));
    CHECK(r.dof == 4);
  }
  SUBCASE("identical groups") {
    const auto r = paired_t_test(a, a);
    CHECK(r.t == 0.0);
    CHECK(r.p == 1.0);
  }
  SUBCASE("constant shift") {
    const std::vector<double> x{1.0, 0.25, 2.5, 0.75}, y{1.5, 0.75, 3.0, 1.25};
    const auto r = paired_t_test(y, x);
    CHECK(std::isinf(r.t));
    CHECK(r.t > 0);
    CHECK(r.p == 0.0);
    // a shift that is constant only up to rounding still lands far below resolution
    std::vector<double> c = a;
    for (double& v : c) v += 0.1;
    CHECK(paired_t_test(c, a).p < 1e-15);
  }
  SUBCASE("size checks") {
    CHECK_THROWS_AS(paired_t_test(std::vector<double>{1.0}, std::vector<double>{2.0}), std::invalid_argument);
    CHECK_THROWS_AS(paired_t_test(a, std::vector<double>{1.0, 2.0}), std::invalid_argument);
  }
}

TEST_CASE("topic ratio test") {
  Matrix ga(4, 3), gb(4, 3);
  const double a[4][3] = {{0.2, 0.4, 0.4}, {0.3, 0.3, 0.4}, {0.1, 0.5, 0.4}, {0.25, 0.0, 0.75}};
  const double b[4][3] = {{0.1, 0.5, 0.4}, {0.2, 0.4, 0.4}, {0.1, 0.6, 0.3}, {0.3, 0.3, 0.4}};
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t k = 0; k < 3; ++k) ga(i, k) = a[i][k], gb(i, k) = b[i][k];
  const auto r = topic_ratio_test(ga, gb, 0, 1);
  CHECK(r.excluded == 1);
  CHECK(r.pairs == std::vector<std::size_t>{0, 1, 2});
  CHECK(r.ratios_a == std::vector<double>{0.5, 1.0, 0.2});
  CHECK(r.ratios_b[0] == 0.2);
  const auto direct = paired_t_test(r.ratios_a, r.ratios_b);
  CHECK(r.test.t == direct.t);
  CHECK(r.test.p == direct.p);
  CHECK_THROWS_AS(topic_ratio_test(ga, Matrix(3, 3, 0.3), 0, 1), std::invalid_argument);
}

TEST_CASE("assignment and topic alignment") {
  SUBCASE("Hungarian against brute force") {
    Rng rng(8);
    for (int trial = 0; trial < 40; ++trial) {
      const std::size_t n = 1 + rng.below(6);
      Matrix s(n, n);
      for (double& v : s.data()) v = rng.uniform() - 0.3;
      std::vector<std::size_t> perm(n);
      std::iota(perm.begin(), perm.end(), std::size_t{0});
      double best = -INFINITY;
      do {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) total += s(i, perm[i]);
        best = std::max(best, total);
      } while (std::next_permutation(perm.begin(), perm.end()));
      const auto got = max_weight_assignment(s);
      double total = 0.0;
      for (std::size_t i = 0; i < n; ++i) total += s(i, got[i]);
      REQUIRE(total == doctest::Approx(best).epsilon(1e-12));
    }
  }
  SUBCASE("row permutation is recovered") {
    Rng rng(9);
    for (std::size_t K : {5, 70}) {
      const Matrix truth = random_topics(K, 200, rng);
      std::vector<std::size_t> perm(K);
      std::iota(perm.begin(), perm.end(), std::size_t{0});
      std::shuffle(perm.begin(), perm.end(), rng);
      Matrix est(K, 200);
      for (std::size_t i = 0; i < K; ++i) std::copy(truth.row(perm[i]).begin(), truth.row(perm[i]).end(), est.row(i).begin());
      const auto al = align_topics(est, truth);
      CHECK(al.mean_similarity == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(al.permutation == perm);
      const auto self = align_topics(truth, truth);
      for (std::size_t i = 0; i < K; ++i) CHECK(self.permutation[i] == i);
    }
  }
  SUBCASE("indicator topics against uniform topics") {
    const std::size_t W = 16;
    Matrix ind(3, W, 0.0);
    for (std::size_t k = 0; k < 3; ++k) ind(k, k) = 1.0;
    const Matrix uni(3, W, 1.0 / W);
    CHECK(align_topics(ind, uni).mean_similarity == doctest::Approx(1.0 / std::sqrt(16.0)).epsilon(1e-14));
  }
  SUBCASE("shape mismatch") {
    CHECK_THROWS_AS(align_topics(Matrix(2, 5, 0.2), Matrix(3, 5, 0.2)), std::invalid_argument);
  }
}
