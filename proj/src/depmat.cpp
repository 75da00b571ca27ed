#include "regvb/depmat.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace regvb {

CooccurrenceCounts CooccurrenceCounts::from_counts(CountMatrix counts) {
  CooccurrenceCounts out;
  out.marginals.assign(counts.size(), 0);
  for (std::size_t r = 0; r < counts.size(); ++r) {
    for (auto v : counts.row_values(r)) out.marginals[r] += v;
    out.total += out.marginals[r];
  }
  out.counts = std::move(counts);
  return out;
}

CooccurrenceAccumulator::CooccurrenceAccumulator(std::size_t vocab_size) : rows_(vocab_size) {}

void CooccurrenceAccumulator::add_event(WordId a, WordId b, std::uint64_t times) {
  if (a >= rows_.size() || b >= rows_.size()) throw std::out_of_range("CooccurrenceAccumulator: word id");
  rows_[a][b] += times;
  rows_[b][a] += times;
}

void CooccurrenceAccumulator::merge(const CooccurrenceAccumulator& other) {
  if (other.rows_.size() != rows_.size()) throw std::invalid_argument("CooccurrenceAccumulator: size mismatch");
  for (std::size_t r = 0; r < rows_.size(); ++r) {
    for (const auto& [c, v] : other.rows_[r]) rows_[r][c] += v;
  }
}

CooccurrenceCounts CooccurrenceAccumulator::finish() const {
  std::vector<Triplet<std::uint64_t>> t;
  for (std::size_t r = 0; r < rows_.size(); ++r) {
    for (const auto& [c, v] : rows_[r]) t.push_back({static_cast<std::uint32_t>(r), c, v});
  }
  return CooccurrenceCounts::from_counts(CountMatrix::from_triplets(rows_.size(), std::move(t)));
}

CooccurrenceCounts count_cooccurrences(std::span<const std::vector<WordId>> sequences, std::size_t vocab_size,
                                       SymmetricWindow window) {
  if (window.radius == 0) throw std::invalid_argument("count_cooccurrences: window radius must be >= 1");
  CooccurrenceAccumulator acc(vocab_size);
  for (const auto& seq : sequences) {
    for (std::size_t p = 0; p < seq.size(); ++p) {
      const std::size_t end = std::min(seq.size(), p + window.radius + 1);
      for (std::size_t q = p + 1; q < end; ++q) acc.add_event(seq[p], seq[q]);
    }
  }
  return acc.finish();
}

CooccurrenceCounts count_cooccurrences(const Corpus& corpus, SymmetricWindow window) {
  std::vector<std::vector<WordId>> seqs;
  seqs.reserve(corpus.num_docs());
  for (const auto& doc : corpus.docs()) {
    auto& s = seqs.emplace_back();
    s.reserve(doc.total());
    for (const auto& e : doc.entries()) s.insert(s.end(), e.count, e.id);
  }
  return count_cooccurrences(seqs, corpus.vocab_size(), window);
}

SparseMatrix pmi(const CooccurrenceCounts& counts) {
  if (counts.total == 0) throw std::domain_error("pmi: co-occurrence total is zero");
  const double log_total = std::log(static_cast<double>(counts.total));
  std::vector<Triplet<double>> out;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    auto cols = counts.counts.row_cols(i);
    auto vals = counts.counts.row_values(i);
    for (std::size_t p = 0; p < cols.size(); ++p) {
      if (vals[p] == 0) continue;
      const double v = std::log(static_cast<double>(vals[p])) + log_total -
                       std::log(static_cast<double>(counts.marginals[i])) -
                       std::log(static_cast<double>(counts.marginals[cols[p]]));
      if (v > 0.0) out.push_back({static_cast<std::uint32_t>(i), cols[p], v});
    }
  }
  return SparseMatrix::from_triplets(counts.size(), std::move(out));
}

DependencyMatrix::DependencyMatrix(SparseMatrix m, bool require_row_stochastic) : m_(std::move(m)) {
  is_identity_ = m_.nnz() == m_.size();
  for (std::size_t r = 0; r < m_.size(); ++r) {
    auto cols = m_.row_cols(r);
    auto vals = m_.row_values(r);
    double sum = 0.0;
    bool diag = false;
    for (std::size_t p = 0; p < cols.size(); ++p) {
      if (!(vals[p] >= 0.0) || !std::isfinite(vals[p])) {
        throw std::invalid_argument("DependencyMatrix: entries must be finite and nonnegative");
      }
      if (cols[p] == r && vals[p] > 0.0) diag = true;
      if (cols[p] != r || vals[p] != 1.0) is_identity_ = false;
      sum += vals[p];
    }
    if (!diag) throw std::invalid_argument("DependencyMatrix: row " + std::to_string(r) + " has no positive diagonal");
    if (require_row_stochastic && std::abs(sum - 1.0) > 1e-12) {
      throw std::invalid_argument("DependencyMatrix: row " + std::to_string(r) + " does not sum to 1");
    }
  }
  t_ = m_.transpose();
}

DependencyMatrix build_dependency_matrix(const SparseMatrix& pmi_matrix, std::size_t top_n,
                                         std::span<const double> word_frequencies,
                                         const DependencyOptions& options) {
  const std::size_t W = pmi_matrix.size();
  if (top_n == 0) throw std::invalid_argument("build_dependency_matrix: top_n must be positive");
  if (top_n > W) throw std::invalid_argument("build_dependency_matrix: top_n exceeds vocabulary size");
  if (word_frequencies.size() != W) throw std::invalid_argument("build_dependency_matrix: frequency vector size");

  std::vector<std::size_t> order(W);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return word_frequencies[a] > word_frequencies[b]; });
  std::vector<char> kept(W, 0);
  for (std::size_t i = 0; i < top_n; ++i) kept[order[i]] = 1;

  std::vector<Triplet<double>> t;
  t.reserve(pmi_matrix.nnz() + W);
  for (std::size_t r = 0; r < W; ++r) {
    auto cols = pmi_matrix.row_cols(r);
    auto vals = pmi_matrix.row_values(r);
    double sum = 1.0;
    std::size_t first = t.size();
    t.push_back({static_cast<std::uint32_t>(r), static_cast<std::uint32_t>(r), 1.0});
    if (kept[r]) {
      for (std::size_t p = 0; p < cols.size(); ++p) {
        if (cols[p] == r || !kept[cols[p]] || !(vals[p] > 0.0)) continue;
        t.push_back({static_cast<std::uint32_t>(r), cols[p], vals[p]});
        sum += vals[p];
      }
    }
    if (options.normalize_rows) {
      for (std::size_t i = first; i < t.size(); ++i) t[i].value /= sum;
    }
  }
  return DependencyMatrix(SparseMatrix::from_triplets(W, std::move(t)), options.normalize_rows);
}

}  // namespace regvb
