#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "regvb/matrix.hpp"
#include "regvb/rng.hpp"

namespace regvb {

using WordId = std::uint32_t;

/// Thrown by file readers; carries the 1-based line number of the offending line
/// (0 when the problem is not tied to a line).
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class Vocabulary {
 public:
  Vocabulary() = default;
  explicit Vocabulary(std::vector<std::string> terms);

  /// Vocabulary of size W with terms "w0", "w1", ...
  static Vocabulary indexed(std::size_t size);

  std::size_t size() const noexcept { return terms_.size(); }
  const std::string& term(WordId id) const { return terms_.at(id); }
  std::optional<WordId> id_of(const std::string& term) const;
  const std::vector<std::string>& terms() const noexcept { return terms_; }

 private:
  std::vector<std::string> terms_;
  std::unordered_map<std::string, WordId> index_;
};

struct WordCount {
  WordId id;
  std::uint32_t count;
  friend bool operator==(const WordCount&, const WordCount&) = default;
};

/// Bag of words: strictly increasing ids, positive counts, at least one token.
class SparseDocument {
 public:
  explicit SparseDocument(std::vector<WordCount> entries);

  std::span<const WordCount> entries() const noexcept { return entries_; }
  std::size_t distinct() const noexcept { return entries_.size(); }
  std::uint64_t total() const noexcept { return total_; }

  friend bool operator==(const SparseDocument&, const SparseDocument&) = default;

 private:
  std::vector<WordCount> entries_;
  std::uint64_t total_ = 0;
};

class Corpus {
 public:
  Corpus(std::vector<SparseDocument> documents, Vocabulary vocab);

  std::size_t num_docs() const noexcept { return docs_.size(); }
  std::size_t vocab_size() const noexcept { return vocab_.size(); }
  const SparseDocument& doc(std::size_t d) const { return docs_.at(d); }
  const std::vector<SparseDocument>& docs() const noexcept { return docs_; }
  const Vocabulary& vocab() const noexcept { return vocab_; }
  std::uint64_t total_tokens() const noexcept;

  /// Total count of each word across the corpus.
  std::vector<double> word_frequencies() const;

 private:
  std::vector<SparseDocument> docs_;
  Vocabulary vocab_;
};

// Bag-of-words text format: "D", "W", "NNZ" header lines, then
// "doc_id word_id count" triplets sorted by (doc_id, word_id).
Corpus read_bow(std::istream& in, std::optional<Vocabulary> vocab = std::nullopt);
Corpus load_bow(const std::filesystem::path& path);
Corpus load_bow(const std::filesystem::path& path, const std::filesystem::path& vocab_path);
void write_bow(std::ostream& out, const Corpus& corpus);
void save_bow(const Corpus& corpus, const std::filesystem::path& path);

Vocabulary read_vocabulary(std::istream& in);
Vocabulary load_vocabulary(const std::filesystem::path& path);
void save_vocabulary(const Vocabulary& vocab, const std::filesystem::path& path);

struct MiniBatch {
  std::vector<std::size_t> doc_indices;
  std::size_t size() const noexcept { return doc_indices.size(); }
};

/// S distinct documents drawn uniformly (Floyd's algorithm). Throws
/// std::invalid_argument unless 1 <= S <= D.
MiniBatch sample_minibatch(const Corpus& corpus, std::size_t batch_size, Rng& rng);

enum class SamplingMode {
  kIndependent,   ///< every batch is a fresh uniform draw without replacement
  kEpochShuffle,  ///< shuffle once per epoch and cut consecutive chunks
};

/// Stateful batch source for online fitting.
class MinibatchSampler {
 public:
  MinibatchSampler(const Corpus& corpus, std::size_t batch_size, Rng rng,
                   SamplingMode mode = SamplingMode::kIndependent);

  MiniBatch next();

 private:
  const Corpus* corpus_;
  std::size_t batch_size_;
  Rng rng_;
  SamplingMode mode_;
  std::vector<std::size_t> order_;
  std::size_t cursor_ = 0;
};

struct SyntheticSpec {
  std::size_t K = 5;
  std::size_t W = 100;
  std::size_t D = 100;
  std::size_t doc_length = 50;
  double alpha = 0.1;
  double eta = 0.1;
  /// Topic k only uses words in the k-th contiguous block of W/K words.
  bool disjoint_topics = false;
};

struct SyntheticCorpus {
  Corpus corpus;
  Matrix beta;   ///< K x W, rows are distributions
  Matrix theta;  ///< D x K, rows are distributions
};

/// Sample a corpus from the LDA generative process.
SyntheticCorpus generate_synthetic(const SyntheticSpec& spec, Rng& rng);

/// Sample documents from given topics. Every document has exactly doc_length tokens.
SyntheticCorpus generate_from_topics(const Matrix& beta, std::size_t D, std::size_t doc_length,
                                     double alpha, Rng& rng);

/// D = W documents, document d holds word d once.
Corpus identity_corpus(std::size_t W);

/// Symmetric Dirichlet draw through normalized gamma variates.
std::vector<double> sample_dirichlet(std::size_t dim, double concentration, Rng& rng);

}  // namespace regvb
