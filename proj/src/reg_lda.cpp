#include "regvb/reg_lda.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "regvb/math.hpp"

namespace regvb {

Matrix RegularizedModel::beta() const {
  if (!C) throw std::logic_error("RegularizedModel: no dependency matrix");
  return compute_beta(nu, *C);
}

namespace {

void check_params(const Matrix& nu, const DependencyMatrix& C, const char* who) {
  if (nu.cols() != C.size()) {
    throw std::invalid_argument(std::string(who) + ": nu has " + std::to_string(nu.cols()) +
                                " words but C is " + std::to_string(C.size()) + " x " + std::to_string(C.size()));
  }
  for (double v : nu.data()) {
    if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument(std::string(who) + ": nu must be positive");
  }
}

}  // namespace

Matrix compute_beta(const Matrix& nu, const DependencyMatrix& C) {
  check_params(nu, C, "compute_beta");
  return kernels::convolved_beta(nu, C, 1);
}

Matrix convolved_log_weights(const Matrix& nu, const DependencyMatrix& C) {
  check_params(nu, C, "convolved_log_weights");
  return kernels::convolved_log_weights(nu, C, 1);
}

Matrix fixed_point_nu(const Matrix& Phi, const Matrix& nu_current, const DependencyMatrix& C, double eta,
                      ResponsibilityForm form) {
  check_params(nu_current, C, "fixed_point_nu");
  if (!Phi.same_shape(nu_current)) throw std::invalid_argument("fixed_point_nu: Phi and nu shapes differ");
  if (!(eta > 0.0)) throw std::invalid_argument("fixed_point_nu: eta must be positive");
  return kernels::fixed_point_sweep(Phi, nu_current, C, eta, form, 1);
}

Matrix reg_m_step(const Matrix& Phi, const DependencyMatrix& C, double eta, Rng rng, const MStepOptions& options) {
  if (options.reg_iter == 0) throw std::invalid_argument("reg_m_step: reg_iter must be >= 1");
  if (Phi.cols() != C.size()) throw std::invalid_argument("reg_m_step: Phi and C sizes differ");
  Matrix nu = init_topics(Phi.rows(), Phi.cols(), rng);
  for (std::size_t sweep = 1; sweep <= options.reg_iter; ++sweep) {
    nu = kernels::fixed_point_sweep(Phi, nu, C, eta, options.form, options.threads);
    if (options.on_sweep) options.on_sweep(sweep, nu);
  }
  return nu;
}

double surrogate_bound(const Matrix& Phi, const Matrix& nu, const DependencyMatrix& C, double eta) {
  check_params(nu, C, "surrogate_bound");
  if (!Phi.same_shape(nu)) throw std::invalid_argument("surrogate_bound: Phi and nu shapes differ");
  const Matrix log_w = kernels::convolved_log_weights(nu, C, 1);
  double s = 0.0;
  for (std::size_t i = 0; i < Phi.data().size(); ++i) {
    if (Phi.data()[i] != 0.0) s += Phi.data()[i] * log_w.data()[i];
  }
  return s + topic_dirichlet_terms(nu, eta);
}

namespace {

Matrix starting_nu(const RegOptions& options, std::size_t K, std::size_t W) {
  if (!options.init) return init_topics(K, W, Rng(options.seed).split(streams::kTopicInit));
  if (options.init->rows() != K || options.init->cols() != W) {
    throw std::invalid_argument("regularized fit: initial nu has the wrong shape");
  }
  return *options.init;
}

// M-step noise for update t comes from its own sub-stream, so batch and
// online schedules that reach the same update index draw the same noise.
Rng mstep_rng(std::uint64_t seed, std::size_t t) { return Rng(seed).split(streams::kMStepInit).split(t); }

Matrix run_m_step(const Matrix& Phi, const DependencyMatrix& C, const Hyperparameters& hyper,
                  const RegOptions& options, std::size_t t) {
  MStepOptions m{options.reg_iter, options.form, options.threads, {}};
  if (options.on_sweep) {
    m.on_sweep = [&](std::size_t sweep, const Matrix& nu) { options.on_sweep(t, Phi, sweep, nu); };
  }
  return reg_m_step(Phi, C, hyper.eta, mstep_rng(options.seed, t), m);
}

void validate_common(const Corpus& corpus, const std::shared_ptr<const DependencyMatrix>& C,
                     const Hyperparameters& hyper, const RegOptions& options) {
  hyper.validate();
  if (!C) throw std::invalid_argument("regularized fit: missing dependency matrix");
  if (C->size() != corpus.vocab_size()) {
    throw std::invalid_argument("regularized fit: C is " + std::to_string(C->size()) + " x " +
                                std::to_string(C->size()) + " but the vocabulary has " +
                                std::to_string(corpus.vocab_size()) + " words");
  }
  if (options.reg_iter == 0) throw std::invalid_argument("regularized fit: reg_iter must be >= 1");
}

}  // namespace

RegularizedFit reg_batch_fit(const Corpus& corpus, std::shared_ptr<const DependencyMatrix> C,
                             const Hyperparameters& hyper, const RegBatchOptions& options) {
  validate_common(corpus, C, hyper, options);
  if (corpus.num_docs() == 0) throw std::invalid_argument("reg_batch_fit: empty corpus");
  RegularizedFit fit{{starting_nu(options, hyper.K, corpus.vocab_size()), C, hyper, options.reg_iter}, {}, false};
  auto& nu = fit.model.nu;
  Matrix beta = kernels::convolved_beta(nu, *C, options.threads);

  std::vector<std::size_t> all(corpus.num_docs());
  std::iota(all.begin(), all.end(), std::size_t{0});
  double previous = 0.0;
  for (std::size_t epoch = 0; epoch < options.max_epochs; ++epoch) {
    const Matrix log_w = kernels::convolved_log_weights(nu, *C, options.threads);
    auto res = kernels::estep(corpus, all, log_w, hyper.alpha, options.estep, false, options.threads);
    nu = run_m_step(res.stats, *C, hyper, options, epoch);
    Matrix next_beta = kernels::convolved_beta(nu, *C, options.threads);
    UpdateRecord rec{epoch, 1.0, corpus.num_docs(), surrogate_bound(res.stats, nu, *C, hyper.eta),
                     l1_distance(next_beta, beta)};
    beta = std::move(next_beta);
    fit.trace.push_back(rec);
    if (options.on_update) options.on_update({rec, nu, beta});
    if (epoch > 0 && std::abs(rec.bound - previous) <= options.tol * std::abs(previous)) {
      fit.converged = true;
      break;
    }
    previous = rec.bound;
  }
  return fit;
}

RegularizedFit reg_online_fit(const Corpus& corpus, std::shared_ptr<const DependencyMatrix> C,
                              const Hyperparameters& hyper, const RegOnlineOptions& options) {
  validate_common(corpus, C, hyper, options);
  options.rate.validate();
  const std::size_t D = corpus.num_docs();
  if (options.batch_size == 0 || options.batch_size > D) {
    throw std::invalid_argument("reg_online_fit: need 1 <= S <= D (S = " + std::to_string(options.batch_size) +
                                ", D = " + std::to_string(D) + ")");
  }
  RegularizedFit fit{{starting_nu(options, hyper.K, corpus.vocab_size()), C, hyper, options.reg_iter}, {}, false};
  auto& nu = fit.model.nu;
  Matrix beta = kernels::convolved_beta(nu, *C, options.threads);
  MinibatchSampler sampler(corpus, options.batch_size, Rng(options.seed).split(streams::kMinibatch),
                           options.sampling);

  OnlineOptions plan;
  plan.batch_size = options.batch_size;
  plan.passes = options.passes;
  plan.max_updates = options.max_updates;
  const std::size_t updates = planned_updates(D, plan);
  for (std::size_t t = 0; t < updates; ++t) {
    const MiniBatch batch = sampler.next();
    const Matrix log_w = kernels::convolved_log_weights(nu, *C, options.threads);
    auto res = kernels::estep(corpus, batch.doc_indices, log_w, hyper.alpha, options.estep, false, options.threads);
    const double scale = static_cast<double>(D) / static_cast<double>(batch.size());
    for (double& v : res.stats.data()) v *= scale;
    const Matrix target = run_m_step(res.stats, *C, hyper, options, t);
    const double rho = options.rate.rho(t);
    for (std::size_t i = 0; i < nu.data().size(); ++i) {
      nu.data()[i] = (1.0 - rho) * nu.data()[i] + rho * target.data()[i];
    }
    Matrix next_beta = kernels::convolved_beta(nu, *C, options.threads);
    UpdateRecord rec{t, rho, batch.size(), surrogate_bound(res.stats, nu, *C, hyper.eta),
                     l1_distance(next_beta, beta)};
    beta = std::move(next_beta);
    fit.trace.push_back(rec);
    if (options.on_update) options.on_update({rec, nu, beta});
  }
  fit.converged = true;
  return fit;
}

}  // namespace regvb
