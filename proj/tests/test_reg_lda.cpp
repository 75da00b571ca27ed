#include <doctest.h>

#include <cmath>
#include <memory>
#include <numeric>
#include <stdexcept>

#include "regvb/reg_lda.hpp"

using namespace regvb;

namespace {

Matrix from_list(std::size_t rows, std::size_t cols, std::initializer_list<double> v) {
  Matrix m(rows, cols);
  std::copy(v.begin(), v.end(), m.data().begin());
  return m;
}

DependencyMatrix dense_C(std::size_t n, std::initializer_list<double> v) {
  std::vector<Triplet<double>> t;
  auto it = v.begin();
  for (std::uint32_t i = 0; i < n; ++i)
    for (std::uint32_t j = 0; j < n; ++j, ++it)
      if (*it != 0.0) t.push_back({i, j, *it});
  return DependencyMatrix(SparseMatrix::from_triplets(n, t));
}

// Sparse random row-stochastic matrix with a positive diagonal.
DependencyMatrix random_C(std::size_t W, Rng& rng, double density = 0.2) {
  std::vector<Triplet<double>> t;
  for (std::uint32_t i = 0; i < W; ++i) {
    std::vector<std::pair<std::uint32_t, double>> row{{i, 0.2 + rng.uniform()}};
    for (std::uint32_t j = 0; j < W; ++j)
      if (j != i && rng.uniform() < density) row.push_back({j, rng.uniform()});
    double s = 0.0;
    for (auto& e : row) s += e.second;
    for (auto& e : row) t.push_back({i, e.first, e.second / s});
  }
  auto m = SparseMatrix::from_triplets(W, t);
  // Exact row sums: fold rounding residue into the diagonal.
  for (std::size_t r = 0; r < W; ++r) {
    auto vals = m.row_values(r);
    auto cols = m.row_cols(r);
    double s = 0.0;
    for (double v : vals) s += v;
    for (std::size_t p = 0; p < cols.size(); ++p)
      if (cols[p] == r) vals[p] += 1.0 - s;
  }
  return DependencyMatrix(std::move(m));
}

Matrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng, double lo, double hi, double zero_prob = 0.0) {
  Matrix m(rows, cols);
  for (double& v : m.data()) v = rng.uniform() < zero_prob ? 0.0 : lo + (hi - lo) * rng.uniform();
  return m;
}

double row_total(const Matrix& m, std::size_t k) {
  auto r = m.row(k);
  return std::accumulate(r.begin(), r.end(), 0.0);
}

SyntheticCorpus small_synthetic(std::uint64_t seed, std::size_t D = 50) {
  Rng rng = Rng(seed).split(streams::kSynthetic);
  SyntheticSpec spec;
  spec.K = 3;
  spec.W = 30;
  spec.D = D;
  spec.doc_length = 25;
  return generate_synthetic(spec, rng);
}

}  // namespace

TEST_CASE("fixed point reductions") {
  const double eta = 0.01;
  Rng rng(1);
  const Matrix Phi = random_matrix(3, 8, rng, 0.0, 5.0, 0.3);
  const Matrix nu = random_matrix(3, 8, rng, 0.1, 4.0);
  const auto I = DependencyMatrix::identity(8);

  const Matrix next = fixed_point_nu(Phi, nu, I, eta);
  for (std::size_t i = 0; i < next.data().size(); ++i) CHECK(next.data()[i] == eta + Phi.data()[i]);
  CHECK(fixed_point_nu(Phi, random_matrix(3, 8, rng, 0.1, 4.0), I, eta) == next);

  const Matrix zero(3, 8, 0.0);
  const Matrix prior_only = fixed_point_nu(zero, nu, random_C(8, rng), eta);
  for (double v : prior_only.data()) CHECK(v == eta);

  const auto half = dense_C(2, {0.5, 0.5, 0.5, 0.5});
  const Matrix toy = fixed_point_nu(from_list(1, 2, {4.0, 0.0}), from_list(1, 2, {1.0, 1.0}), half, eta);
  CHECK(toy(0, 0) == doctest::Approx(eta + 2.0).epsilon(1e-15));
  CHECK(toy(0, 1) == doctest::Approx(eta + 2.0).epsilon(1e-15));
}

TEST_CASE("dense numpy oracle for the convolved prior") {
  // tests/oracles/lda_toy.py, toy 2
  const auto C = dense_C(3, {0.6, 0.3, 0.1, 0.2, 0.5, 0.3, 0.0, 0.25, 0.75});
  const Matrix nu = from_list(2, 3, {1.5, 0.7, 2.2, 0.4, 3.1, 1.0});
  const Matrix Phi = from_list(2, 3, {2.0, 0.0, 1.5, 0.5, 4.0, 1.0});
  const double eta = 0.3;

  const double nu_next[] = {1.7091831737561507, 0.5815834962740654, 2.1092333299697836,
                            0.36750538782132447, 4.857480693191725, 1.17501391898695};
  const double logw[] = {-1.4878841797863138, -1.5005808501083886, -1.0515436272948686,
                         -1.5085890696327566, -0.9889407975181772, -1.3165352465140974};
  const double beta[] = {0.22296878983326415, 0.2911234140078347, 0.48590779615890123,
                         0.17498334570586707, 0.4521241588450399, 0.3728924954490929};
  const Matrix a = fixed_point_nu(Phi, nu, C, eta);
  const Matrix b = convolved_log_weights(nu, C);
  const Matrix c = compute_beta(nu, C);
  for (std::size_t i = 0; i < 6; ++i) {
    CHECK(a.data()[i] == doctest::Approx(nu_next[i]).epsilon(1e-13));
    CHECK(b.data()[i] == doctest::Approx(logw[i]).epsilon(1e-13));
    CHECK(c.data()[i] == doctest::Approx(beta[i]).epsilon(1e-13));
  }
  CHECK(surrogate_bound(Phi, nu, C, eta) == doctest::Approx(-12.819653122926635).epsilon(1e-13));
}

TEST_CASE("fixed point conserves mass") {
  Rng rng(2);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t K = 1 + rng.below(5), W = 2 + rng.below(40);
    const auto C = random_C(W, rng);
    const Matrix Phi = random_matrix(K, W, rng, 0.0, 50.0, 0.5);
    const Matrix nu = random_matrix(K, W, rng, 0.01, 20.0);
    const double eta = 0.01 + rng.uniform();
    const Matrix next = fixed_point_nu(Phi, nu, C, eta);
    for (std::size_t k = 0; k < K; ++k) {
      const double phi = row_total(Phi, k);
      REQUIRE(std::abs(row_total(next, k) - W * eta - phi) <= 1e-9 * std::max(1.0, phi));
    }
  }
}

TEST_CASE("literal printed form is available and differs") {
  Rng rng(3);
  const auto C = random_C(10, rng, 0.5);
  const Matrix Phi = random_matrix(2, 10, rng, 0.5, 5.0);
  const Matrix nu = random_matrix(2, 10, rng, 0.2, 5.0);
  const Matrix target = fixed_point_nu(Phi, nu, C, 0.1, ResponsibilityForm::kTarget);
  const Matrix source = fixed_point_nu(Phi, nu, C, 0.1, ResponsibilityForm::kSource);
  CHECK(max_abs_diff(target, source) > 1e-6);
  const auto I = DependencyMatrix::identity(10);
  CHECK(fixed_point_nu(Phi, nu, I, 0.1, ResponsibilityForm::kSource) == fixed_point_nu(Phi, nu, I, 0.1));
}

TEST_CASE("compute_beta") {
  Rng rng(4);
  const Matrix nu = random_matrix(3, 12, rng, 0.05, 6.0);
  const Matrix a = compute_beta(nu, DependencyMatrix::identity(12));
  CHECK(max_abs_diff(a, geometric_topics(nu)) <= 1e-15);

  const Matrix uniform = compute_beta(Matrix(2, 5, 1.7), DependencyMatrix::identity(5));
  for (double v : uniform.data()) CHECK(v == doctest::Approx(0.2).epsilon(1e-15));

  const Matrix washed = compute_beta(from_list(1, 2, {2.0, 1.0}), dense_C(2, {0.5, 0.5, 0.5, 0.5}));
  CHECK(washed(0, 0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(washed(0, 1) == doctest::Approx(0.5).epsilon(1e-15));

  const auto C = random_C(12, rng);
  const Matrix b = compute_beta(nu, C);
  for (std::size_t k = 0; k < 3; ++k) CHECK(row_total(b, k) == doctest::Approx(1.0).epsilon(1e-12));
  for (double v : b.data()) CHECK(v > 0.0);

  const Matrix logw = convolved_log_weights(nu, DependencyMatrix::identity(12));
  CHECK(logw == expected_log_beta(nu));
}

TEST_CASE("M-step") {
  Rng rng(5);
  const Matrix Phi = random_matrix(3, 15, rng, 0.0, 10.0, 0.3);
  const double eta = 0.05;
  SUBCASE("C = I settles in one sweep, independent of the seed") {
    const auto I = DependencyMatrix::identity(15);
    MStepOptions o;
    o.reg_iter = 1;
    const Matrix a = reg_m_step(Phi, I, eta, Rng(1), o);
    o.reg_iter = 10;
    const Matrix b = reg_m_step(Phi, I, eta, Rng(2), o);
    CHECK(a == b);
    for (std::size_t i = 0; i < a.data().size(); ++i) CHECK(a.data()[i] == eta + Phi.data()[i]);
  }
  SUBCASE("surrogate bound never decreases across sweeps") {
    for (int trial = 0; trial < 20; ++trial) {
      const auto C = random_C(15, rng, 0.4);
      double prev = -INFINITY;
      MStepOptions o;
      o.reg_iter = 15;
      o.on_sweep = [&](std::size_t, const Matrix& nu) {
        const double s = surrogate_bound(Phi, nu, C, eta);
        REQUIRE(s >= prev - 1e-9 * std::abs(prev));
        prev = s;
      };
      reg_m_step(Phi, C, eta, rng.split(trial), o);
    }
  }
  SUBCASE("surrogate bound equals the standard topic bound for C = I") {
    Matrix nu = Phi;
    for (double& v : nu.data()) v += eta;
    const auto I = DependencyMatrix::identity(15);
    CHECK(surrogate_bound(Phi, nu, I, eta) == doctest::Approx(topic_bound(Phi, nu, eta)).epsilon(1e-13));
  }
}

TEST_CASE("identity C reproduces standard VB") {
  const auto syn = small_synthetic(8);
  const Hyperparameters hyper{3, 0.1, 0.05};
  auto I = std::make_shared<const DependencyMatrix>(DependencyMatrix::identity(syn.corpus.vocab_size()));

  SUBCASE("batch") {
    BatchOptions b;
    b.max_epochs = 6;
    b.tol = 0.0;
    b.seed = 3;
    const auto s = batch_vb_fit(syn.corpus, hyper, b);
    RegBatchOptions r;
    r.max_epochs = 6;
    r.tol = 0.0;
    r.seed = 3;
    const auto g = reg_batch_fit(syn.corpus, I, hyper, r);
    CHECK(max_abs_diff(g.model.nu, s.model.lambda) <= 1e-10);
    CHECK(max_abs_diff(g.model.beta(), s.model.beta()) <= 1e-12);
  }
  SUBCASE("online") {
    OnlineOptions o;
    o.batch_size = 8;
    o.rate = {16.0, 0.6};
    o.seed = 5;
    const auto s = online_vb_fit(syn.corpus, hyper, o);
    RegOnlineOptions r;
    r.batch_size = 8;
    r.rate = {16.0, 0.6};
    r.seed = 5;
    const auto g = reg_online_fit(syn.corpus, I, hyper, r);
    REQUIRE(g.trace.size() == s.trace.size());
    CHECK(max_abs_diff(g.model.nu, s.model.lambda) <= 1e-10);
  }
}

TEST_CASE("regularized online with S = D and kappa = 0 is batch") {
  const auto syn = small_synthetic(9, 40);
  Rng rng(6);
  auto C = std::make_shared<const DependencyMatrix>(random_C(syn.corpus.vocab_size(), rng));
  const Hyperparameters hyper{3, 0.1, 0.05};
  std::vector<Matrix> batch, online;
  RegBatchOptions b;
  b.max_epochs = 4;
  b.tol = 0.0;
  b.seed = 2;
  b.on_update = [&](const UpdateView& v) { batch.push_back(v.params); };
  reg_batch_fit(syn.corpus, C, hyper, b);
  RegOnlineOptions o;
  o.batch_size = 40;
  o.rate = {0.0, 0.0};
  o.max_updates = 4;
  o.seed = 2;
  o.on_update = [&](const UpdateView& v) { online.push_back(v.params); };
  reg_online_fit(syn.corpus, C, hyper, o);
  REQUIRE(batch.size() == online.size());
  for (std::size_t e = 0; e < batch.size(); ++e) CHECK(max_abs_diff(batch[e], online[e]) <= 1e-10);
}

TEST_CASE("K = 1 regularized fit depends only on counts and C") {
  const auto syn = small_synthetic(10, 20);
  Rng rng(7);
  auto C = std::make_shared<const DependencyMatrix>(random_C(syn.corpus.vocab_size(), rng));
  RegBatchOptions o;
  o.max_epochs = 1;
  o.seed = 1;
  const auto a = reg_batch_fit(syn.corpus, C, {1, 0.1, 0.05}, o);
  const auto freqs = syn.corpus.word_frequencies();
  Matrix Phi(1, freqs.size());
  std::copy(freqs.begin(), freqs.end(), Phi.data().begin());
  const Matrix expected = reg_m_step(Phi, *C, 0.05, Rng(1).split(streams::kMStepInit).split(0));
  CHECK(max_abs_diff(a.model.nu, expected) <= 1e-12);
}

TEST_CASE("block-diagonal C keeps topics inside their blocks") {
  // Two vocabulary blocks; each document uses a single block.
  const std::size_t W = 20, half = 10;
  Matrix beta_true(2, W, 0.0);
  for (std::size_t w = 0; w < half; ++w) beta_true(0, w) = beta_true(1, w + half) = 1.0 / half;
  Rng rng(11);
  std::vector<SparseDocument> docs;
  for (std::size_t d = 0; d < 200; ++d) {
    std::vector<std::uint32_t> counts(W, 0);
    const std::size_t block = d % 2;
    for (int i = 0; i < 20; ++i) ++counts[block * half + rng.below(half)];
    std::vector<WordCount> e;
    for (WordId w = 0; w < W; ++w)
      if (counts[w]) e.push_back({w, counts[w]});
    docs.emplace_back(std::move(e));
  }
  const Corpus corpus(std::move(docs), Vocabulary::indexed(W));
  std::vector<Triplet<double>> t;
  for (std::uint32_t i = 0; i < W; ++i)
    for (std::uint32_t j = 0; j < W; ++j)
      if (i / half == j / half) t.push_back({i, j, i == j ? 0.5 : 0.5 / (half - 1)});
  auto C = std::make_shared<const DependencyMatrix>(SparseMatrix::from_triplets(W, t));
  RegBatchOptions o;
  o.max_epochs = 30;
  o.seed = 4;
  const auto fit = reg_batch_fit(corpus, C, {2, 0.1, 0.01}, o);
  const Matrix beta = fit.model.beta();
  for (std::size_t k = 0; k < 2; ++k) {
    double first = 0.0;
    for (std::size_t w = 0; w < half; ++w) first += beta(k, w);
    CHECK(std::max(first, 1.0 - first) >= 0.9);
  }
}

TEST_CASE("argument checks") {
  const auto syn = small_synthetic(12, 10);
  auto wrong = std::make_shared<const DependencyMatrix>(DependencyMatrix::identity(5));
  CHECK_THROWS_AS(reg_batch_fit(syn.corpus, wrong, {2, 0.1, 0.1}), std::invalid_argument);
  auto I = std::make_shared<const DependencyMatrix>(DependencyMatrix::identity(syn.corpus.vocab_size()));
  RegOnlineOptions o;
  o.batch_size = 11;
  CHECK_THROWS_AS(reg_online_fit(syn.corpus, I, {2, 0.1, 0.1}, o), std::invalid_argument);
  MStepOptions m;
  m.reg_iter = 0;
  CHECK_THROWS_AS(reg_m_step(Matrix(2, 5, 1.0), DependencyMatrix::identity(5), 0.1, Rng(1), m),
                  std::invalid_argument);
}
