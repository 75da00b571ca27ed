#include "regvb/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>
#include <unordered_set>

namespace regvb {

Vocabulary::Vocabulary(std::vector<std::string> terms) : terms_(std::move(terms)) {
  index_.reserve(terms_.size());
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    if (!index_.emplace(terms_[i], static_cast<WordId>(i)).second) {
      throw std::invalid_argument("Vocabulary: duplicate term '" + terms_[i] + "'");
    }
  }
}

Vocabulary Vocabulary::indexed(std::size_t size) {
  std::vector<std::string> terms;
  terms.reserve(size);
  for (std::size_t i = 0; i < size; ++i) terms.push_back("w" + std::to_string(i));
  return Vocabulary(std::move(terms));
}

std::optional<WordId> Vocabulary::id_of(const std::string& term) const {
  auto it = index_.find(term);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

SparseDocument::SparseDocument(std::vector<WordCount> entries) : entries_(std::move(entries)) {
  if (entries_.empty()) throw std::invalid_argument("SparseDocument: no words");
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].count == 0) throw std::invalid_argument("SparseDocument: zero count");
    if (i > 0 && entries_[i].id <= entries_[i - 1].id) {
      throw std::invalid_argument("SparseDocument: word ids must be strictly increasing");
    }
    total_ += entries_[i].count;
  }
}

Corpus::Corpus(std::vector<SparseDocument> documents, Vocabulary vocab)
    : docs_(std::move(documents)), vocab_(std::move(vocab)) {
  for (std::size_t d = 0; d < docs_.size(); ++d) {
    if (docs_[d].entries().back().id >= vocab_.size()) {
      throw std::invalid_argument("Corpus: document " + std::to_string(d) +
                                  " uses a word id outside the vocabulary");
    }
  }
}

std::uint64_t Corpus::total_tokens() const noexcept {
  std::uint64_t n = 0;
  for (const auto& d : docs_) n += d.total();
  return n;
}

std::vector<double> Corpus::word_frequencies() const {
  std::vector<double> freq(vocab_size(), 0.0);
  for (const auto& d : docs_) {
    for (const auto& e : d.entries()) freq[e.id] += e.count;
  }
  return freq;
}

namespace {

bool next_content_line(std::istream& in, std::string& line, std::size_t& lineno) {
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") != std::string::npos) return true;
  }
  return false;
}

std::uint64_t parse_header_value(std::istream& in, std::size_t& lineno, const char* name) {
  std::string line;
  if (!next_content_line(in, line, lineno)) {
    throw ParseError(std::string("missing header value ") + name, lineno);
  }
  std::istringstream ss(line);
  long long v = -1;
  std::string rest;
  if (!(ss >> v) || (ss >> rest) || v < 0) {
    throw ParseError(std::string("malformed header value ") + name, lineno);
  }
  return static_cast<std::uint64_t>(v);
}

}  // namespace

Corpus read_bow(std::istream& in, std::optional<Vocabulary> vocab) {
  std::size_t lineno = 0;
  const auto D = parse_header_value(in, lineno, "D");
  const auto W = parse_header_value(in, lineno, "W");
  const auto nnz = parse_header_value(in, lineno, "NNZ");
  if (D == 0) throw ParseError("empty corpus (D = 0)", lineno);
  if (vocab && vocab->size() != W) {
    throw ParseError("vocabulary has " + std::to_string(vocab->size()) + " terms but header says W = " +
                         std::to_string(W),
                     0);
  }

  std::vector<std::vector<WordCount>> entries(D);
  std::string line;
  long long prev_doc = -1, prev_word = -1;
  std::uint64_t seen = 0;
  while (next_content_line(in, line, lineno)) {
    std::istringstream ss(line);
    long long d, w, c;
    std::string rest;
    if (!(ss >> d >> w >> c) || (ss >> rest)) throw ParseError("expected 'doc_id word_id count'", lineno);
    if (d < 0 || static_cast<std::uint64_t>(d) >= D) throw ParseError("doc_id out of range", lineno);
    if (w < 0 || static_cast<std::uint64_t>(w) >= W) throw ParseError("word_id out of range", lineno);
    if (c <= 0 || c > std::numeric_limits<std::uint32_t>::max()) throw ParseError("count must be positive", lineno);
    if (d < prev_doc || (d == prev_doc && w <= prev_word)) {
      throw ParseError("entries must be sorted by (doc_id, word_id) without duplicates", lineno);
    }
    prev_doc = d;
    prev_word = w;
    entries[d].push_back({static_cast<WordId>(w), static_cast<std::uint32_t>(c)});
    ++seen;
  }
  if (seen != nnz) {
    throw ParseError("header NNZ = " + std::to_string(nnz) + " but found " + std::to_string(seen) + " entries",
                     lineno);
  }
  std::vector<SparseDocument> docs;
  docs.reserve(D);
  for (std::size_t d = 0; d < D; ++d) {
    if (entries[d].empty()) throw ParseError("document " + std::to_string(d) + " has no words", 0);
    docs.emplace_back(std::move(entries[d]));
  }
  return Corpus(std::move(docs), vocab ? std::move(*vocab) : Vocabulary::indexed(W));
}

Corpus load_bow(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open corpus file " + path.string());
  return read_bow(in);
}

Corpus load_bow(const std::filesystem::path& path, const std::filesystem::path& vocab_path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open corpus file " + path.string());
  return read_bow(in, load_vocabulary(vocab_path));
}

void write_bow(std::ostream& out, const Corpus& corpus) {
  std::size_t nnz = 0;
  for (const auto& d : corpus.docs()) nnz += d.distinct();
  out << corpus.num_docs() << '\n' << corpus.vocab_size() << '\n' << nnz << '\n';
  for (std::size_t d = 0; d < corpus.num_docs(); ++d) {
    for (const auto& e : corpus.doc(d).entries()) out << d << ' ' << e.id << ' ' << e.count << '\n';
  }
}

void save_bow(const Corpus& corpus, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write corpus file " + path.string());
  write_bow(out, corpus);
}

Vocabulary read_vocabulary(std::istream& in) {
  std::vector<std::string> terms;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    terms.push_back(line);
  }
  return Vocabulary(std::move(terms));
}

Vocabulary load_vocabulary(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open vocabulary file " + path.string());
  return read_vocabulary(in);
}

void save_vocabulary(const Vocabulary& vocab, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write vocabulary file " + path.string());
  for (const auto& t : vocab.terms()) out << t << '\n';
}

MiniBatch sample_minibatch(const Corpus& corpus, std::size_t batch_size, Rng& rng) {
  const std::size_t D = corpus.num_docs();
  if (batch_size == 0 || batch_size > D) {
    throw std::invalid_argument("sample_minibatch: need 1 <= S <= D (S = " + std::to_string(batch_size) +
                                ", D = " + std::to_string(D) + ")");
  }
  MiniBatch batch;
  batch.doc_indices.reserve(batch_size);
  std::unordered_set<std::size_t> chosen;
  chosen.reserve(batch_size * 2);
  for (std::size_t j = D - batch_size; j < D; ++j) {
    const std::size_t t = rng.below(j + 1);
    const std::size_t pick = chosen.insert(t).second ? t : j;
    if (pick == j) chosen.insert(j);
    batch.doc_indices.push_back(pick);
  }
  return batch;
}

MinibatchSampler::MinibatchSampler(const Corpus& corpus, std::size_t batch_size, Rng rng, SamplingMode mode)
    : corpus_(&corpus), batch_size_(batch_size), rng_(rng), mode_(mode) {
  if (batch_size == 0 || batch_size > corpus.num_docs()) {
    throw std::invalid_argument("MinibatchSampler: need 1 <= S <= D");
  }
}

MiniBatch MinibatchSampler::next() {
  if (mode_ == SamplingMode::kIndependent) return sample_minibatch(*corpus_, batch_size_, rng_);
  if (cursor_ == order_.size()) {
    order_.resize(corpus_->num_docs());
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    std::shuffle(order_.begin(), order_.end(), rng_);
    cursor_ = 0;
  }
  const std::size_t end = std::min(order_.size(), cursor_ + batch_size_);
  MiniBatch batch{{order_.begin() + cursor_, order_.begin() + end}};
  cursor_ = end;
  return batch;
}

std::vector<double> sample_dirichlet(std::size_t dim, double concentration, Rng& rng) {
  if (!(concentration > 0.0)) throw std::invalid_argument("sample_dirichlet: concentration must be positive");
  // Gamma(a) = Gamma(a + 1) * U^(1/a); working in logs keeps tiny shapes from underflowing.
  std::gamma_distribution<double> gamma(concentration + 1.0, 1.0);
  std::vector<double> logs(dim);
  for (auto& l : logs) l = std::log(gamma(rng)) + std::log(1.0 - rng.uniform()) / concentration;
  const double m = *std::max_element(logs.begin(), logs.end());
  double s = 0.0;
  for (auto& l : logs) s += (l = std::exp(l - m));
  for (auto& l : logs) l /= s;
  return logs;
}

namespace {

std::size_t draw_categorical(std::span<const double> cumulative, Rng& rng) {
  const double u = rng.uniform() * cumulative.back();
  auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
  return std::min<std::size_t>(it - cumulative.begin(), cumulative.size() - 1);
}

}  // namespace

SyntheticCorpus generate_from_topics(const Matrix& beta, std::size_t D, std::size_t doc_length, double alpha,
                                     Rng& rng) {
  const std::size_t K = beta.rows(), W = beta.cols();
  if (K == 0 || W == 0 || D == 0 || doc_length == 0) {
    throw std::invalid_argument("generate_from_topics: sizes must be positive");
  }
  if (!(alpha > 0.0)) throw std::invalid_argument("generate_from_topics: alpha must be positive");

  std::vector<std::vector<double>> word_cdf(K, std::vector<double>(W));
  for (std::size_t k = 0; k < K; ++k) {
    std::partial_sum(beta.row(k).begin(), beta.row(k).end(), word_cdf[k].begin());
  }

  Matrix theta(D, K);
  std::vector<SparseDocument> docs;
  docs.reserve(D);
  std::vector<std::uint32_t> counts(W);
  std::vector<double> topic_cdf(K);
  for (std::size_t d = 0; d < D; ++d) {
    auto th = K == 1 ? std::vector<double>{1.0} : sample_dirichlet(K, alpha, rng);
    std::copy(th.begin(), th.end(), theta.row(d).begin());
    std::partial_sum(th.begin(), th.end(), topic_cdf.begin());
    std::fill(counts.begin(), counts.end(), 0u);
    for (std::size_t n = 0; n < doc_length; ++n) {
      const std::size_t z = draw_categorical(topic_cdf, rng);
      ++counts[draw_categorical(word_cdf[z], rng)];
    }
    std::vector<WordCount> entries;
    for (std::size_t w = 0; w < W; ++w) {
      if (counts[w]) entries.push_back({static_cast<WordId>(w), counts[w]});
    }
    docs.emplace_back(std::move(entries));
  }
  return {Corpus(std::move(docs), Vocabulary::indexed(W)), beta, std::move(theta)};
}

SyntheticCorpus generate_synthetic(const SyntheticSpec& spec, Rng& rng) {
  if (spec.K == 0 || spec.W == 0 || spec.D == 0 || spec.doc_length == 0) {
    throw std::invalid_argument("generate_synthetic: sizes must be positive");
  }
  if (!(spec.alpha > 0.0) || !(spec.eta > 0.0)) {
    throw std::invalid_argument("generate_synthetic: alpha and eta must be positive");
  }
  if (spec.disjoint_topics && spec.W < spec.K) {
    throw std::invalid_argument("generate_synthetic: disjoint topics need W >= K");
  }
  Matrix beta(spec.K, spec.W);
  for (std::size_t k = 0; k < spec.K; ++k) {
    std::size_t lo = 0, hi = spec.W;
    if (spec.disjoint_topics) {
      lo = k * spec.W / spec.K;
      hi = (k + 1) * spec.W / spec.K;
    }
    auto b = sample_dirichlet(hi - lo, spec.eta, rng);
    std::copy(b.begin(), b.end(), beta.row(k).begin() + lo);
  }
  return generate_from_topics(beta, spec.D, spec.doc_length, spec.alpha, rng);
}

Corpus identity_corpus(std::size_t W) {
  std::vector<SparseDocument> docs;
  docs.reserve(W);
  for (std::size_t w = 0; w < W; ++w) docs.emplace_back(std::vector<WordCount>{{static_cast<WordId>(w), 1}});
  return Corpus(std::move(docs), Vocabulary::indexed(W));
}

}  // namespace regvb
