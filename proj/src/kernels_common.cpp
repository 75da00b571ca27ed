#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "regvb/kernels.hpp"
#include "regvb/math.hpp"

namespace regvb::kernels::detail {

void fixed_point_topic(const Matrix& Phi, const Matrix& nu, const DependencyMatrix& C, double eta,
                       ResponsibilityForm form, std::size_t k, Matrix& out) {
  const std::size_t W = nu.cols();
  std::vector<double> elog(W);
  dirichlet_log_expectation(nu.row(k), elog);
  auto dst = out.row(k);
  std::fill(dst.begin(), dst.end(), eta);
  std::vector<double> logits;
  const auto& m = C.matrix();
  for (std::size_t i = 0; i < W; ++i) {
    const double mass = Phi(k, i);
    if (mass == 0.0) continue;
    auto cols = m.row_cols(i);
    auto vals = m.row_values(i);
    logits.resize(cols.size());
    for (std::size_t p = 0; p < cols.size(); ++p) logits[p] = std::log(vals[p]) + elog[cols[p]];
    const double denom = log_sum_exp(logits);
    for (std::size_t p = 0; p < cols.size(); ++p) {
      const double num = form == ResponsibilityForm::kTarget ? logits[p] : std::log(vals[p]) + elog[i];
      dst[cols[p]] += mass * std::exp(num - denom);
    }
  }
}

void convolved_log_weights_topic(const Matrix& nu, const DependencyMatrix& C, std::size_t k, Matrix& out) {
  const std::size_t W = nu.cols();
  std::vector<double> elog(W);
  dirichlet_log_expectation(nu.row(k), elog);
  std::vector<double> logits;
  const auto& m = C.matrix();
  for (std::size_t w = 0; w < W; ++w) {
    auto cols = m.row_cols(w);
    auto vals = m.row_values(w);
    logits.resize(cols.size());
    for (std::size_t p = 0; p < cols.size(); ++p) logits[p] = std::log(vals[p]) + elog[cols[p]];
    out(k, w) = log_sum_exp(logits);
  }
}

void convolved_beta_topic(const Matrix& nu, const DependencyMatrix& C, std::size_t k, Matrix& out) {
  const std::size_t W = nu.cols();
  std::vector<double> elog(W);
  dirichlet_log_expectation(nu.row(k), elog);
  std::vector<double> logits, log_beta(W);
  const auto& t = C.transposed();
  for (std::size_t w = 0; w < W; ++w) {
    auto src = t.row_cols(w);
    auto vals = t.row_values(w);
    logits.resize(src.size());
    for (std::size_t p = 0; p < src.size(); ++p) logits[p] = std::log(vals[p]) + elog[src[p]];
    log_beta[w] = logits.empty() ? -std::numeric_limits<double>::infinity() : log_sum_exp(logits);
  }
  const double z = log_sum_exp(log_beta);
  for (std::size_t w = 0; w < W; ++w) out(k, w) = std::exp(log_beta[w] - z);
}

void accumulate_stats(const Corpus& corpus, std::span<const std::size_t> docs,
                      std::span<const DocumentPosterior> posteriors, Matrix& stats) {
  std::vector<std::size_t> order(docs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return docs[a] < docs[b]; });
  const std::size_t K = stats.rows();
  for (std::size_t pos : order) {
    const auto& doc = corpus.doc(docs[pos]);
    const auto& phi = posteriors[pos].phi;
    auto entries = doc.entries();
    for (std::size_t j = 0; j < entries.size(); ++j) {
      const double n = entries[j].count;
      for (std::size_t k = 0; k < K; ++k) stats(k, entries[j].id) += n * phi(j, k);
    }
  }
}

}  // namespace regvb::kernels::detail
