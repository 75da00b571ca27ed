#include <doctest.h>

#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "regvb/depmat.hpp"
#include "regvb/sparse.hpp"
#include "test_util.hpp"

using namespace regvb;

namespace {

CooccurrenceCounts from_dense(const std::vector<std::vector<std::uint64_t>>& dense) {
  std::vector<Triplet<std::uint64_t>> t;
  for (std::uint32_t i = 0; i < dense.size(); ++i)
    for (std::uint32_t j = 0; j < dense.size(); ++j)
      if (dense[i][j]) t.push_back({i, j, dense[i][j]});
  return CooccurrenceCounts::from_counts(CountMatrix::from_triplets(dense.size(), t));
}

double row_sum(const SparseMatrix& m, std::size_t r) {
  auto v = m.row_values(r);
  return std::accumulate(v.begin(), v.end(), 0.0);
}

}  // namespace

TEST_CASE("window counting") {
  const std::vector<std::vector<WordId>> seq{{0, 1, 0}};
  const auto c = count_cooccurrences(seq, 2, SymmetricWindow{1});
  CHECK(c.counts.at(0, 1) == 2);
  CHECK(c.counts.at(1, 0) == 2);
  CHECK(c.counts.at(0, 0) == 0);
  CHECK(c.total == 4);

  const auto wide = count_cooccurrences(seq, 2, SymmetricWindow{2});
  CHECK(wide.counts.at(0, 0) == 2);  // positions 0 and 2, both directions

  const std::vector<std::vector<WordId>> single{{1}};
  CHECK(count_cooccurrences(single, 3, SymmetricWindow{1}).total == 0);
  CHECK_THROWS_AS(count_cooccurrences(seq, 2, SymmetricWindow{0}), std::invalid_argument);

  const std::vector<std::vector<WordId>> empty;
  CHECK(count_cooccurrences(empty, 3, SymmetricWindow{1}).total == 0);
}

TEST_CASE("counts are symmetric and sharded counting merges exactly") {
  Rng rng(21);
  std::vector<std::vector<WordId>> seqs(30);
  for (auto& s : seqs) {
    s.resize(1 + rng.below(40));
    for (auto& w : s) w = static_cast<WordId>(rng.below(12));
  }
  const auto full = count_cooccurrences(seqs, 12, SymmetricWindow{2});
  for (std::size_t i = 0; i < 12; ++i) {
    for (std::size_t j = 0; j < 12; ++j) REQUIRE(full.counts.at(i, j) == full.counts.at(j, i));
  }
  const std::span<const std::vector<WordId>> all(seqs);
  const auto left = count_cooccurrences(all.subspan(0, 13), 12, SymmetricWindow{2});
  const auto right = count_cooccurrences(all.subspan(13), 12, SymmetricWindow{2});
  CooccurrenceAccumulator a(12), b(12);
  for (const auto& [r, c, v] : left.counts.triplets()) if (c >= r) a.add_event(r, c, c == r ? v / 2 : v);
  for (const auto& [r, c, v] : right.counts.triplets()) if (c >= r) b.add_event(r, c, c == r ? v / 2 : v);
  a.merge(b);
  const auto merged = a.finish();
  CHECK(merged.counts == full.counts);
  CHECK(merged.marginals == full.marginals);
  CHECK(merged.total == full.total);
}

TEST_CASE("corpus counting reads documents in word-id order") {
  const Corpus c({SparseDocument({{0, 2}, {2, 1}})}, Vocabulary::indexed(3));
  // token sequence 0 0 2
  const auto counts = count_cooccurrences(c, SymmetricWindow{1});
  CHECK(counts.counts.at(0, 0) == 2);
  CHECK(counts.counts.at(0, 2) == 1);
  CHECK(counts.counts.at(2, 0) == 1);
}

TEST_CASE("positive PMI") {
  SUBCASE("always co-occurring pair") {
    const auto c = from_dense({{0, 4}, {4, 0}});  // four (0,1) events
    const auto p = pmi(c);
    CHECK(p.at(0, 1) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
    CHECK(p.at(1, 0) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  }
  SUBCASE("independent at expected frequency") {
    const auto p = pmi(from_dense({{1, 1}, {1, 1}}));
    for (const auto& t : p.triplets()) CHECK(t.value == 0.0);
  }
  SUBCASE("anti-correlated pair is clipped") {
    const auto p = pmi(from_dense({{3, 1}, {1, 3}}));
    CHECK(p.at(0, 1) == 0.0);
    CHECK(p.at(0, 0) == doctest::Approx(std::log(1.5)).epsilon(1e-15));
    for (const auto& t : p.triplets()) CHECK(t.value >= 0.0);
  }
  SUBCASE("zero total") {
    CHECK_THROWS_AS(pmi(from_dense({{0, 0}, {0, 0}})), std::domain_error);
  }
  SUBCASE("independent tokens give small PMI") {
    Rng rng(5);
    std::vector<std::vector<WordId>> seqs(1);
    seqs[0].resize(200000);
    for (auto& w : seqs[0]) w = static_cast<WordId>(rng.below(5));
    const auto counts = count_cooccurrences(seqs, 5, SymmetricWindow{1});
    const auto p = pmi(counts);
    for (const auto& [r, c, v] : p.triplets()) {
      CAPTURE(r);
      CAPTURE(c);
      CHECK(v <= 3.0 / std::sqrt(static_cast<double>(counts.counts.at(r, c))));
    }
  }
}

TEST_CASE("dependency matrix construction") {
  SUBCASE("zero PMI gives the identity") {
    const std::vector<double> f{3, 2, 1, 0};
    const auto C = build_dependency_matrix(SparseMatrix(4), 4, f);
    CHECK(C.is_identity());
    CHECK(C.matrix() == identity_matrix(4));
  }
  SUBCASE("one unit edge splits the row in half") {
    const auto p = SparseMatrix::from_triplets(3, {{0, 1, 1.0}, {1, 0, 1.0}});
    const std::vector<double> f{5, 5, 5};
    const auto C = build_dependency_matrix(p, 3, f);
    CHECK(C.matrix().at(0, 0) == 0.5);
    CHECK(C.matrix().at(0, 1) == 0.5);
    CHECK(C.matrix().at(0, 2) == 0.0);
    CHECK(C.matrix().at(2, 2) == 1.0);
    CHECK_FALSE(C.is_identity());
  }
  SUBCASE("only the top_n most frequent words keep edges, ties to the lower id") {
    const auto p = SparseMatrix::from_triplets(3, {{0, 1, 1.0}, {1, 0, 1.0}, {1, 2, 2.0}, {2, 1, 2.0}});
    const std::vector<double> f{4, 4, 4};
    const auto C = build_dependency_matrix(p, 2, f);  // words 0 and 1 survive
    CHECK(C.matrix().at(0, 1) == 0.5);
    CHECK(C.matrix().at(1, 2) == 0.0);
    CHECK(C.matrix().at(2, 2) == 1.0);
    CHECK_THROWS_AS(build_dependency_matrix(p, 0, f), std::invalid_argument);
  }
  SUBCASE("rows sum to one for random input") {
    Rng rng(17);
    const std::size_t W = 60;
    std::vector<Triplet<double>> t;
    for (int i = 0; i < 800; ++i) {
      const auto r = static_cast<std::uint32_t>(rng.below(W)), c = static_cast<std::uint32_t>(rng.below(W));
      t.push_back({r, c, 5.0 * rng.uniform()});
    }
    std::vector<double> f(W);
    for (double& x : f) x = static_cast<double>(rng.below(100));
    const auto C = build_dependency_matrix(SparseMatrix::from_triplets(W, t), 30, f);
    for (std::size_t r = 0; r < W; ++r) {
      CHECK(row_sum(C.matrix(), r) == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(C.matrix().at(r, r) > 0.0);
    }
    CHECK(C.transposed() == C.matrix().transpose());
  }
  SUBCASE("unnormalized rows") {
    const auto p = SparseMatrix::from_triplets(2, {{0, 1, 3.0}, {1, 0, 3.0}});
    const std::vector<double> f{1, 1};
    const auto C = build_dependency_matrix(p, 2, f, DependencyOptions{false});
    CHECK(C.matrix().at(0, 0) == 1.0);
    CHECK(C.matrix().at(0, 1) == 3.0);
  }
}

TEST_CASE("dependency matrix validation") {
  CHECK_THROWS_AS(DependencyMatrix(SparseMatrix::from_triplets(2, {{0, 0, 1.0}, {1, 0, 1.0}})), std::invalid_argument);
  CHECK_THROWS_AS(DependencyMatrix(SparseMatrix::from_triplets(2, {{0, 0, 0.5}, {1, 1, 1.0}})), std::invalid_argument);
  CHECK_THROWS_AS(DependencyMatrix(SparseMatrix::from_triplets(2, {{0, 0, 1.5}, {0, 1, -0.5}, {1, 1, 1.0}})),
                  std::invalid_argument);
  CHECK(DependencyMatrix::identity(5).is_identity());
}

TEST_CASE("sparse text format") {
  TempDir dir;
  const auto m = SparseMatrix::from_triplets(3, {{2, 0, 0.1}, {0, 1, 1.0 / 3.0}, {0, 1, 0.25}, {1, 1, 2.0}});
  CHECK(m.at(0, 1) == 1.0 / 3.0 + 0.25);
  save_sparse(m, dir / "m.txt");
  CHECK(load_sparse(dir / "m.txt") == m);

  std::ostringstream out;
  write_sparse(out, SparseMatrix::from_triplets(2, {{1, 0, 0.5}}));
  CHECK(out.str() == "2 1\n1 0 0.5\n");

  std::istringstream bad("2 1\n0 2 1.0\n");
  CHECK_THROWS_AS(read_sparse(bad), ParseError);
  std::istringstream unsorted("2 2\n1 0 1\n0 0 1\n");
  CHECK_THROWS_AS(read_sparse(unsorted), ParseError);

  const auto counts = CountMatrix::from_triplets(2, {{0, 1, 7}, {1, 0, 7}});
  save_counts(counts, dir / "c.txt");
  CHECK(load_counts(dir / "c.txt") == counts);
}
