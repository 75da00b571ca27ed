#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

namespace regvb {

template <typename T>
struct Triplet {
  std::uint32_t row;
  std::uint32_t col;
  T value;
};

/// Square compressed-sparse-row matrix. Column indices within a row are
/// strictly increasing.
template <typename T>
class BasicSparse {
 public:
  BasicSparse() = default;
  explicit BasicSparse(std::size_t n) : n_(n), row_ptr_(n + 1, 0) {}

  /// Duplicates are summed; explicit zeros are kept.
  static BasicSparse from_triplets(std::size_t n, std::vector<Triplet<T>> triplets);

  std::size_t size() const noexcept { return n_; }
  std::size_t nnz() const noexcept { return cols_.size(); }

  std::span<const std::uint32_t> row_cols(std::size_t r) const noexcept {
    return {cols_.data() + row_ptr_[r], row_ptr_[r + 1] - row_ptr_[r]};
  }
  std::span<const T> row_values(std::size_t r) const noexcept {
    return {values_.data() + row_ptr_[r], row_ptr_[r + 1] - row_ptr_[r]};
  }
  std::span<T> row_values(std::size_t r) noexcept {
    return {values_.data() + row_ptr_[r], row_ptr_[r + 1] - row_ptr_[r]};
  }

  /// Value at (r, c), zero when not stored.
  T at(std::size_t r, std::size_t c) const noexcept;

  BasicSparse transpose() const;

  std::vector<Triplet<T>> triplets() const;

  friend bool operator==(const BasicSparse&, const BasicSparse&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<std::size_t> row_ptr_{0};
  std::vector<std::uint32_t> cols_;
  std::vector<T> values_;
};

using SparseMatrix = BasicSparse<double>;
using CountMatrix = BasicSparse<std::uint64_t>;

SparseMatrix identity_matrix(std::size_t n);

// Text format: "W NNZ" header, then "row col value" lines, row-major sorted.
SparseMatrix read_sparse(std::istream& in);
SparseMatrix load_sparse(const std::filesystem::path& path);
void write_sparse(std::ostream& out, const SparseMatrix& m);
void save_sparse(const SparseMatrix& m, const std::filesystem::path& path);

CountMatrix read_counts(std::istream& in);
CountMatrix load_counts(const std::filesystem::path& path);
void write_counts(std::ostream& out, const CountMatrix& m);
void save_counts(const CountMatrix& m, const std::filesystem::path& path);

}  // namespace regvb
