#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "regvb/corpus.hpp"
#include "regvb/depmat.hpp"
#include "regvb/lda.hpp"
#include "regvb/matrix.hpp"

// Hot loops of both inference routines. The top-level functions run under
// OpenMP; `serial::` holds the single-threaded reference versions used by the
// tests and the benchmark. Both produce bit-identical results: parallel work
// is split per document or per topic and merged in a fixed order.
namespace regvb::kernels {

/// Which word's expectation enters the numerator of the fixed-point responsibilities.
enum class ResponsibilityForm {
  kTarget,  ///< C_iw exp(E[log b_wk]) / sum_j C_ij exp(E[log b_jk]); conserves mass
  kSource,  ///< C_iw exp(E[log b_ik]) / sum_j C_ij exp(E[log b_jk]); as literally printed
};

struct EStepResult {
  std::vector<DocumentPosterior> posteriors;  ///< parallel to the requested docs (empty unless kept)
  Matrix stats;                               ///< K x W, sum_d n_dw phi_dwk
};

/// E-step over `docs`. Sufficient statistics are reduced in ascending
/// document index order regardless of the order of `docs`.
EStepResult estep(const Corpus& corpus, std::span<const std::size_t> docs, const Matrix& log_word_weights,
                  double alpha, const EStepOptions& options, bool keep_posteriors, int threads);

/// One fixed-point sweep of the regularized M-step (all topics).
Matrix fixed_point_sweep(const Matrix& Phi, const Matrix& nu, const DependencyMatrix& C, double eta,
                         ResponsibilityForm form, int threads);

/// L_kw = log sum_j C_wj exp(E[log b_jk]): the per-word term of the convolved bound.
Matrix convolved_log_weights(const Matrix& nu, const DependencyMatrix& C, int threads);

/// beta_wk proportional to sum_i C_iw exp(E[log b_ik]), normalized per topic.
Matrix convolved_beta(const Matrix& nu, const DependencyMatrix& C, int threads);

namespace serial {
EStepResult estep(const Corpus& corpus, std::span<const std::size_t> docs, const Matrix& log_word_weights,
                  double alpha, const EStepOptions& options, bool keep_posteriors);
Matrix fixed_point_sweep(const Matrix& Phi, const Matrix& nu, const DependencyMatrix& C, double eta,
                         ResponsibilityForm form);
Matrix convolved_log_weights(const Matrix& nu, const DependencyMatrix& C);
Matrix convolved_beta(const Matrix& nu, const DependencyMatrix& C);
}  // namespace serial

// Per-topic bodies shared by both variants.
namespace detail {
void fixed_point_topic(const Matrix& Phi, const Matrix& nu, const DependencyMatrix& C, double eta,
                       ResponsibilityForm form, std::size_t k, Matrix& out);
void convolved_log_weights_topic(const Matrix& nu, const DependencyMatrix& C, std::size_t k, Matrix& out);
void convolved_beta_topic(const Matrix& nu, const DependencyMatrix& C, std::size_t k, Matrix& out);
void accumulate_stats(const Corpus& corpus, std::span<const std::size_t> docs,
                      std::span<const DocumentPosterior> posteriors, Matrix& stats);
}  // namespace detail

}  // namespace regvb::kernels
