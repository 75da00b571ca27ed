#include "regvb/kernels.hpp"

namespace regvb::kernels::serial {

EStepResult estep(const Corpus& corpus, std::span<const std::size_t> docs, const Matrix& log_word_weights,
                  double alpha, const EStepOptions& options, bool keep_posteriors) {
  EStepResult result;
  result.posteriors.reserve(docs.size());
  for (std::size_t d : docs) result.posteriors.push_back(e_step(corpus.doc(d), log_word_weights, alpha, options));
  result.stats = Matrix(log_word_weights.rows(), log_word_weights.cols());
  detail::accumulate_stats(corpus, docs, result.posteriors, result.stats);
  if (!keep_posteriors) result.posteriors.clear();
  return result;
}

Matrix fixed_point_sweep(const Matrix& Phi, const Matrix& nu, const DependencyMatrix& C, double eta,
                         ResponsibilityForm form) {
  Matrix out(nu.rows(), nu.cols());
  for (std::size_t k = 0; k < nu.rows(); ++k) detail::fixed_point_topic(Phi, nu, C, eta, form, k, out);
  return out;
}

Matrix convolved_log_weights(const Matrix& nu, const DependencyMatrix& C) {
  Matrix out(nu.rows(), nu.cols());
  for (std::size_t k = 0; k < nu.rows(); ++k) detail::convolved_log_weights_topic(nu, C, k, out);
  return out;
}

Matrix convolved_beta(const Matrix& nu, const DependencyMatrix& C) {
  Matrix out(nu.rows(), nu.cols());
  for (std::size_t k = 0; k < nu.rows(); ++k) detail::convolved_beta_topic(nu, C, k, out);
  return out;
}

}  // namespace regvb::kernels::serial
