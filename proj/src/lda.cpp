#include "regvb/lda.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>

#include "regvb/kernels.hpp"
#include "regvb/math.hpp"

namespace regvb {

void Hyperparameters::validate() const {
  if (K == 0) throw std::invalid_argument("Hyperparameters: K must be >= 1");
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw std::invalid_argument("Hyperparameters: alpha must be > 0");
  if (!(eta > 0.0) || !std::isfinite(eta)) throw std::invalid_argument("Hyperparameters: eta must be > 0");
}

double LearningRate::rho(std::uint64_t t) const {
  if (kappa == 0.0) return 1.0;
  return std::min(1.0, std::pow(tau0 + static_cast<double>(t), -kappa));
}

void LearningRate::validate() const {
  if (!(tau0 >= 0.0)) throw std::invalid_argument("LearningRate: tau0 must be >= 0");
  if (!(kappa >= 0.0 && kappa <= 1.0)) throw std::invalid_argument("LearningRate: kappa must lie in [0, 1]");
}

DocumentPosterior e_step(const SparseDocument& doc, const Matrix& log_word_weights, double alpha,
                         const EStepOptions& options) {
  const std::size_t K = log_word_weights.rows();
  auto entries = doc.entries();
  if (entries.back().id >= log_word_weights.cols()) throw std::invalid_argument("e_step: word id outside topics");
  for (const auto& e : entries) {
    for (std::size_t k = 0; k < K; ++k) {
      if (!std::isfinite(log_word_weights(k, e.id))) {
        throw std::invalid_argument("e_step: non-finite topic log weight");
      }
    }
  }

  DocumentPosterior post;
  post.gamma.assign(K, alpha + static_cast<double>(doc.total()) / static_cast<double>(K));
  post.phi = Matrix(entries.size(), K);
  std::vector<double> elog_theta(K), logp(K), next(K);
  for (int iter = 1; iter <= options.max_iter; ++iter) {
    dirichlet_log_expectation(post.gamma, elog_theta);
    std::fill(next.begin(), next.end(), alpha);
    for (std::size_t j = 0; j < entries.size(); ++j) {
      for (std::size_t k = 0; k < K; ++k) logp[k] = elog_theta[k] + log_word_weights(k, entries[j].id);
      const double z = log_sum_exp(logp);
      auto phi = post.phi.row(j);
      const double n = entries[j].count;
      for (std::size_t k = 0; k < K; ++k) {
        phi[k] = std::exp(logp[k] - z);
        next[k] += n * phi[k];
      }
    }
    double change = 0.0;
    for (std::size_t k = 0; k < K; ++k) change += std::abs(next[k] - post.gamma[k]);
    post.gamma.swap(next);
    post.iterations = iter;
    if (change / static_cast<double>(K) < options.tol) break;
  }
  return post;
}

Matrix expected_log_beta(const Matrix& lambda) {
  Matrix out(lambda.rows(), lambda.cols());
  for (std::size_t k = 0; k < lambda.rows(); ++k) dirichlet_log_expectation(lambda.row(k), out.row(k));
  return out;
}

Matrix init_topics(std::size_t K, std::size_t W, Rng rng) {
  Matrix m(K, W);
  std::gamma_distribution<double> gamma(100.0, 1.0 / 100.0);
  for (double& v : m.data()) v = gamma(rng);
  return m;
}

Matrix geometric_topics(const Matrix& lambda) {
  Matrix out = expected_log_beta(lambda);
  for (std::size_t k = 0; k < out.rows(); ++k) {
    auto row = out.row(k);
    const double z = log_sum_exp(row);
    for (double& v : row) v = std::exp(v - z);
  }
  return out;
}

std::size_t planned_updates(std::size_t num_docs, const OnlineOptions& options) {
  if (options.max_updates) return *options.max_updates;
  if (options.batch_size == 0) throw std::invalid_argument("planned_updates: batch size must be positive");
  return (options.passes * num_docs + options.batch_size - 1) / options.batch_size;
}

double document_bound(const SparseDocument& doc, const DocumentPosterior& post, const Matrix& log_word_weights,
                      double alpha) {
  const std::size_t K = post.gamma.size();
  auto elog_theta = dirichlet_log_expectation(post.gamma);
  auto entries = doc.entries();
  double bound = 0.0;
  for (std::size_t j = 0; j < entries.size(); ++j) {
    double s = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
      const double p = post.phi(j, k);
      if (p > 0.0) s += p * (elog_theta[k] + log_word_weights(k, entries[j].id) - std::log(p));
    }
    bound += entries[j].count * s;
  }
  double gamma_sum = 0.0;
  bound += std::lgamma(K * alpha) - K * std::lgamma(alpha);
  for (std::size_t k = 0; k < K; ++k) {
    bound += (alpha - post.gamma[k]) * elog_theta[k] + std::lgamma(post.gamma[k]);
    gamma_sum += post.gamma[k];
  }
  bound -= std::lgamma(gamma_sum);
  return bound;
}

double topic_dirichlet_terms(const Matrix& params, double eta) {
  const std::size_t W = params.cols();
  const double prior_norm = std::lgamma(W * eta) - W * std::lgamma(eta);
  std::vector<double> elog(W);
  double total = 0.0;
  for (std::size_t k = 0; k < params.rows(); ++k) {
    auto row = params.row(k);
    dirichlet_log_expectation(row, elog);
    double row_sum = 0.0;
    double t = prior_norm;
    for (std::size_t w = 0; w < W; ++w) {
      t += (eta - row[w]) * elog[w] + std::lgamma(row[w]);
      row_sum += row[w];
    }
    total += t - std::lgamma(row_sum);
  }
  return total;
}

double topic_bound(const Matrix& Phi, const Matrix& lambda, double eta) {
  if (!Phi.same_shape(lambda)) throw std::invalid_argument("topic_bound: shape mismatch");
  const Matrix elog = expected_log_beta(lambda);
  double s = 0.0;
  for (std::size_t i = 0; i < Phi.data().size(); ++i) s += Phi.data()[i] * elog.data()[i];
  return s + topic_dirichlet_terms(lambda, eta);
}

double elbo(const Corpus& corpus, const StandardModel& model, std::span<const DocumentPosterior> posteriors) {
  if (posteriors.size() != corpus.num_docs()) throw std::invalid_argument("elbo: one posterior per document");
  if (model.lambda.cols() != corpus.vocab_size() || model.lambda.rows() != model.hyper.K) {
    throw std::invalid_argument("elbo: model shape does not match corpus");
  }
  const Matrix elog = expected_log_beta(model.lambda);
  double bound = 0.0;
  for (std::size_t d = 0; d < corpus.num_docs(); ++d) {
    const auto& post = posteriors[d];
    if (post.gamma.size() != model.hyper.K || post.phi.rows() != corpus.doc(d).distinct()) {
      throw std::invalid_argument("elbo: posterior " + std::to_string(d) + " has the wrong shape");
    }
    bound += document_bound(corpus.doc(d), post, elog, model.hyper.alpha);
  }
  return bound + topic_dirichlet_terms(model.lambda, model.hyper.eta);
}

namespace {

Matrix starting_topics(const std::optional<Matrix>& init, std::size_t K, std::size_t W, std::uint64_t seed) {
  if (!init) return init_topics(K, W, Rng(seed).split(streams::kTopicInit));
  if (init->rows() != K || init->cols() != W) throw std::invalid_argument("fit: initial parameters have the wrong shape");
  for (double v : init->data()) {
    if (!(v > 0.0)) throw std::invalid_argument("fit: initial parameters must be positive");
  }
  return *init;
}

}  // namespace

StandardFit batch_vb_fit(const Corpus& corpus, const Hyperparameters& hyper, const BatchOptions& options) {
  hyper.validate();
  if (corpus.num_docs() == 0) throw std::invalid_argument("batch_vb_fit: empty corpus");
  const std::size_t W = corpus.vocab_size();
  StandardFit fit{{starting_topics(options.init, hyper.K, W, options.seed), hyper}, {}, false};
  Matrix beta = fit.model.beta();

  std::vector<std::size_t> all(corpus.num_docs());
  std::iota(all.begin(), all.end(), std::size_t{0});
  double previous = 0.0;
  for (std::size_t epoch = 0; epoch < options.max_epochs; ++epoch) {
    const Matrix elog = expected_log_beta(fit.model.lambda);
    auto res = kernels::estep(corpus, all, elog, hyper.alpha, options.estep, true, options.threads);
    for (std::size_t i = 0; i < res.stats.data().size(); ++i) {
      fit.model.lambda.data()[i] = hyper.eta + res.stats.data()[i];
    }
    Matrix next_beta = fit.model.beta();
    UpdateRecord rec{epoch, 1.0, corpus.num_docs(), elbo(corpus, fit.model, res.posteriors),
                     l1_distance(next_beta, beta)};
    beta = std::move(next_beta);
    fit.trace.push_back(rec);
    if (options.on_update) options.on_update({rec, fit.model.lambda, beta});
    if (epoch > 0 && std::abs(rec.bound - previous) <= options.tol * std::abs(previous)) {
      fit.converged = true;
      break;
    }
    previous = rec.bound;
  }
  return fit;
}

StandardFit online_vb_fit(const Corpus& corpus, const Hyperparameters& hyper, const OnlineOptions& options) {
  hyper.validate();
  options.rate.validate();
  const std::size_t D = corpus.num_docs();
  if (options.batch_size == 0 || options.batch_size > D) {
    throw std::invalid_argument("online_vb_fit: need 1 <= S <= D (S = " + std::to_string(options.batch_size) +
                                ", D = " + std::to_string(D) + ")");
  }
  const std::size_t W = corpus.vocab_size();
  StandardFit fit{{starting_topics(options.init, hyper.K, W, options.seed), hyper}, {}, false};
  Matrix beta = fit.model.beta();
  MinibatchSampler sampler(corpus, options.batch_size, Rng(options.seed).split(streams::kMinibatch),
                           options.sampling);

  const std::size_t updates = planned_updates(D, options);
  auto& lambda = fit.model.lambda;
  for (std::size_t t = 0; t < updates; ++t) {
    const MiniBatch batch = sampler.next();
    const Matrix elog = expected_log_beta(lambda);
    auto res = kernels::estep(corpus, batch.doc_indices, elog, hyper.alpha, options.estep, false, options.threads);
    const double scale = static_cast<double>(D) / static_cast<double>(batch.size());
    const double rho = options.rate.rho(t);
    for (std::size_t i = 0; i < res.stats.data().size(); ++i) {
      double& phi = res.stats.data()[i];
      phi *= scale;
      const double target = hyper.eta + phi;
      lambda.data()[i] = (1.0 - rho) * lambda.data()[i] + rho * target;
    }
    Matrix next_beta = fit.model.beta();
    UpdateRecord rec{t, rho, batch.size(), topic_bound(res.stats, lambda, hyper.eta), l1_distance(next_beta, beta)};
    beta = std::move(next_beta);
    fit.trace.push_back(rec);
    if (options.on_update) options.on_update({rec, lambda, beta});
  }
  fit.converged = true;
  return fit;
}

}  // namespace regvb
