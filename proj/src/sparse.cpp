#include "regvb/sparse.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "regvb/corpus.hpp"

namespace regvb {

template <typename T>
BasicSparse<T> BasicSparse<T>::from_triplets(std::size_t n, std::vector<Triplet<T>> triplets) {
  for (const auto& t : triplets) {
    if (t.row >= n || t.col >= n) throw std::out_of_range("BasicSparse: triplet index out of range");
  }
  std::sort(triplets.begin(), triplets.end(),
            [](const auto& a, const auto& b) { return a.row != b.row ? a.row < b.row : a.col < b.col; });
  BasicSparse m(n);
  for (std::size_t i = 0; i < triplets.size(); ++i) {
    const auto& t = triplets[i];
    if (i > 0 && t.row == triplets[i - 1].row && t.col == triplets[i - 1].col) {
      m.values_.back() += t.value;
      continue;
    }
    m.cols_.push_back(t.col);
    m.values_.push_back(t.value);
    ++m.row_ptr_[t.row + 1];
  }
  for (std::size_t r = 0; r < n; ++r) m.row_ptr_[r + 1] += m.row_ptr_[r];
  return m;
}

template <typename T>
T BasicSparse<T>::at(std::size_t r, std::size_t c) const noexcept {
  auto cols = row_cols(r);
  auto it = std::lower_bound(cols.begin(), cols.end(), static_cast<std::uint32_t>(c));
  if (it == cols.end() || *it != c) return T{};
  return row_values(r)[it - cols.begin()];
}

template <typename T>
BasicSparse<T> BasicSparse<T>::transpose() const {
  BasicSparse t(n_);
  t.cols_.resize(nnz());
  t.values_.resize(nnz());
  for (auto c : cols_) ++t.row_ptr_[c + 1];
  for (std::size_t r = 0; r < n_; ++r) t.row_ptr_[r + 1] += t.row_ptr_[r];
  std::vector<std::size_t> fill(t.row_ptr_.begin(), t.row_ptr_.end() - 1);
  for (std::size_t r = 0; r < n_; ++r) {
    for (std::size_t p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p) {
      const std::size_t q = fill[cols_[p]]++;
      t.cols_[q] = static_cast<std::uint32_t>(r);
      t.values_[q] = values_[p];
    }
  }
  return t;
}

template <typename T>
std::vector<Triplet<T>> BasicSparse<T>::triplets() const {
  std::vector<Triplet<T>> out;
  out.reserve(nnz());
  for (std::size_t r = 0; r < n_; ++r) {
    for (std::size_t p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p) {
      out.push_back({static_cast<std::uint32_t>(r), cols_[p], values_[p]});
    }
  }
  return out;
}

template class BasicSparse<double>;
template class BasicSparse<std::uint64_t>;

SparseMatrix identity_matrix(std::size_t n) {
  std::vector<Triplet<double>> t;
  t.reserve(n);
  for (std::size_t i = 0; i < n; ++i) t.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(i), 1.0});
  return SparseMatrix::from_triplets(n, std::move(t));
}

namespace {

template <typename T>
BasicSparse<T> read_matrix(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  auto next = [&]() {
    while (std::getline(in, line)) {
      ++lineno;
      if (line.find_first_not_of(" \t\r") != std::string::npos) return true;
    }
    return false;
  };
  if (!next()) throw ParseError("missing 'W NNZ' header", lineno);
  long long n = -1, nnz = -1;
  {
    std::istringstream ss(line);
    std::string rest;
    if (!(ss >> n >> nnz) || (ss >> rest) || n < 0 || nnz < 0) throw ParseError("malformed 'W NNZ' header", lineno);
  }
  std::vector<Triplet<T>> triplets;
  triplets.reserve(nnz);
  long long prev_r = -1, prev_c = -1;
  while (next()) {
    std::istringstream ss(line);
    long long r, c;
    T v;
    std::string rest;
    if (!(ss >> r >> c >> v) || (ss >> rest)) throw ParseError("expected 'row col value'", lineno);
    if (r < 0 || r >= n || c < 0 || c >= n) throw ParseError("index out of range", lineno);
    if (r < prev_r || (r == prev_r && c <= prev_c)) throw ParseError("entries must be row-major sorted", lineno);
    prev_r = r;
    prev_c = c;
    triplets.push_back({static_cast<std::uint32_t>(r), static_cast<std::uint32_t>(c), v});
  }
  if (static_cast<long long>(triplets.size()) != nnz) {
    throw ParseError("header NNZ does not match entry count", lineno);
  }
  return BasicSparse<T>::from_triplets(n, std::move(triplets));
}

}  // namespace

SparseMatrix read_sparse(std::istream& in) { return read_matrix<double>(in); }
CountMatrix read_counts(std::istream& in) { return read_matrix<std::uint64_t>(in); }

SparseMatrix load_sparse(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open matrix file " + path.string());
  return read_sparse(in);
}

CountMatrix load_counts(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open matrix file " + path.string());
  return read_counts(in);
}

void write_sparse(std::ostream& out, const SparseMatrix& m) {
  out << m.size() << ' ' << m.nnz() << '\n';
  char buf[64];
  for (const auto& t : m.triplets()) {
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, t.value);
    out << t.row << ' ' << t.col << ' ' << std::string_view(buf, end - buf) << '\n';
  }
}

void write_counts(std::ostream& out, const CountMatrix& m) {
  out << m.size() << ' ' << m.nnz() << '\n';
  for (const auto& t : m.triplets()) out << t.row << ' ' << t.col << ' ' << t.value << '\n';
}

void save_sparse(const SparseMatrix& m, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write matrix file " + path.string());
  write_sparse(out, m);
}

void save_counts(const CountMatrix& m, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write matrix file " + path.string());
  write_counts(out, m);
}

}  // namespace regvb
