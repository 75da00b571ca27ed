#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include "regvb/corpus.hpp"
#include "regvb/sparse.hpp"

namespace regvb {

/// Symmetric co-occurrence counts over ordered position pairs: one event
/// between words i and j adds 1 to (i, j) and 1 to (j, i), so a same-word
/// event adds 2 to the diagonal.
struct CooccurrenceCounts {
  CountMatrix counts;
  std::vector<std::uint64_t> marginals;  ///< row sums of counts
  std::uint64_t total = 0;               ///< sum of marginals

  std::size_t size() const noexcept { return counts.size(); }

  /// Rebuild marginals and total from a count matrix (e.g. read from file).
  static CooccurrenceCounts from_counts(CountMatrix counts);
};

/// Incremental builder; partial builders over shards combine with `merge`.
class CooccurrenceAccumulator {
 public:
  explicit CooccurrenceAccumulator(std::size_t vocab_size);

  void add_event(WordId a, WordId b, std::uint64_t times = 1);
  void merge(const CooccurrenceAccumulator& other);
  CooccurrenceCounts finish() const;

  std::size_t size() const noexcept { return rows_.size(); }

 private:
  std::vector<std::unordered_map<WordId, std::uint64_t>> rows_;
};

struct SymmetricWindow {
  std::size_t radius = 1;
};

/// Every pair of positions at distance 1..radius in a token sequence is one event.
CooccurrenceCounts count_cooccurrences(std::span<const std::vector<WordId>> sequences, std::size_t vocab_size,
                                       SymmetricWindow window);

/// Documents are read as token sequences in ascending word-id order, each id
/// repeated by its count.
CooccurrenceCounts count_cooccurrences(const Corpus& corpus, SymmetricWindow window);

/// Positive pointwise mutual information: max(0, log(c_ij * total / (m_i m_j)))
/// for stored c_ij > 0. Zero entries are not stored.
SparseMatrix pmi(const CooccurrenceCounts& counts);

/// Row-stochastic W x W matrix with strictly positive diagonal, wrapping the
/// sparse storage together with its transpose.
class DependencyMatrix {
 public:
  /// Validates nonnegativity and a positive diagonal; with
  /// `require_row_stochastic`, also that every row sums to 1 within 1e-12.
  explicit DependencyMatrix(SparseMatrix m, bool require_row_stochastic = true);

  static DependencyMatrix identity(std::size_t n) { return DependencyMatrix(identity_matrix(n)); }

  std::size_t size() const noexcept { return m_.size(); }
  const SparseMatrix& matrix() const noexcept { return m_; }
  const SparseMatrix& transposed() const noexcept { return t_; }
  bool is_identity() const noexcept { return is_identity_; }

 private:
  SparseMatrix m_;
  SparseMatrix t_;
  bool is_identity_ = false;
};

struct DependencyOptions {
  bool normalize_rows = true;
};

/// Keep off-diagonal PMI mass among the `top_n` most frequent words (ties to
/// the lower id), add a unit diagonal to every row, then row-normalize.
DependencyMatrix build_dependency_matrix(const SparseMatrix& pmi_matrix, std::size_t top_n,
                                         std::span<const double> word_frequencies,
                                         const DependencyOptions& options = {});

}  // namespace regvb
