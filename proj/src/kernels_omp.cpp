#include <omp.h>

#include <exception>

#include "regvb/kernels.hpp"

namespace regvb::kernels {
namespace {

int resolve_threads(int threads) { return threads > 0 ? threads : omp_get_max_threads(); }

// Exceptions may not escape an OpenMP region; the first one is rethrown after it.
class ExceptionSlot {
 public:
  template <typename F>
  void run(F&& f) noexcept {
    try {
      f();
    } catch (...) {
#pragma omp critical(regvb_exception_slot)
      if (!error_) error_ = std::current_exception();
    }
  }
  void rethrow() const {
    if (error_) std::rethrow_exception(error_);
  }

 private:
  std::exception_ptr error_;
};

}  // namespace

EStepResult estep(const Corpus& corpus, std::span<const std::size_t> docs, const Matrix& log_word_weights,
                  double alpha, const EStepOptions& options, bool keep_posteriors, int threads) {
  EStepResult result;
  result.posteriors.resize(docs.size());
  ExceptionSlot slot;
  const auto n = static_cast<std::ptrdiff_t>(docs.size());
#pragma omp parallel for schedule(dynamic, 8) num_threads(resolve_threads(threads))
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    slot.run([&] { result.posteriors[i] = e_step(corpus.doc(docs[i]), log_word_weights, alpha, options); });
  }
  slot.rethrow();
  result.stats = Matrix(log_word_weights.rows(), log_word_weights.cols());
  detail::accumulate_stats(corpus, docs, result.posteriors, result.stats);
  if (!keep_posteriors) result.posteriors.clear();
  return result;
}

Matrix fixed_point_sweep(const Matrix& Phi, const Matrix& nu, const DependencyMatrix& C, double eta,
                         ResponsibilityForm form, int threads) {
  Matrix out(nu.rows(), nu.cols());
  ExceptionSlot slot;
  const auto K = static_cast<std::ptrdiff_t>(nu.rows());
#pragma omp parallel for schedule(static) num_threads(resolve_threads(threads))
  for (std::ptrdiff_t k = 0; k < K; ++k) {
    slot.run([&] { detail::fixed_point_topic(Phi, nu, C, eta, form, k, out); });
  }
  slot.rethrow();
  return out;
}

Matrix convolved_log_weights(const Matrix& nu, const DependencyMatrix& C, int threads) {
  Matrix out(nu.rows(), nu.cols());
  ExceptionSlot slot;
  const auto K = static_cast<std::ptrdiff_t>(nu.rows());
#pragma omp parallel for schedule(static) num_threads(resolve_threads(threads))
  for (std::ptrdiff_t k = 0; k < K; ++k) {
    slot.run([&] { detail::convolved_log_weights_topic(nu, C, k, out); });
  }
  slot.rethrow();
  return out;
}

Matrix convolved_beta(const Matrix& nu, const DependencyMatrix& C, int threads) {
  Matrix out(nu.rows(), nu.cols());
  ExceptionSlot slot;
  const auto K = static_cast<std::ptrdiff_t>(nu.rows());
#pragma omp parallel for schedule(static) num_threads(resolve_threads(threads))
  for (std::ptrdiff_t k = 0; k < K; ++k) {
    slot.run([&] { detail::convolved_beta_topic(nu, C, k, out); });
  }
  slot.rethrow();
  return out;
}

}  // namespace regvb::kernels
