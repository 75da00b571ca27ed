#pragma once

// Variational Bayes for LDA under a convolved Dirichlet prior: each topic's
// word distribution is a mixture C b_k of base probabilities b_k ~ Dir(eta)
// through a word-pair dependency matrix C. The variational posterior is
// q(b_k) = Dir(nu_k). With C = I every routine here reduces to its
// counterpart in lda.hpp.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>

#include "regvb/corpus.hpp"
#include "regvb/depmat.hpp"
#include "regvb/kernels.hpp"
#include "regvb/lda.hpp"
#include "regvb/matrix.hpp"
#include "regvb/rng.hpp"

namespace regvb {

using kernels::ResponsibilityForm;

struct RegularizedModel {
  Matrix nu;  ///< K x W
  std::shared_ptr<const DependencyMatrix> C;
  Hyperparameters hyper;
  std::size_t reg_iter = 10;

  Matrix beta() const;
};

/// Topic-word probabilities beta_wk proportional to sum_i C_iw exp(E[log b_ik]).
Matrix compute_beta(const Matrix& nu, const DependencyMatrix& C);

/// Per-word log weights used by the E-step: log sum_j C_wj exp(E[log b_jk]).
/// For C = I this is exactly E[log b_wk].
Matrix convolved_log_weights(const Matrix& nu, const DependencyMatrix& C);

/// One fixed-point update of nu given expected topic-word counts Phi (K x W):
///   nu_wk = eta + sum_i Phi_ik C_iw exp(E[log b_wk]) / sum_j C_ij exp(E[log b_jk])
/// with the expectations taken under nu_current.
Matrix fixed_point_nu(const Matrix& Phi, const Matrix& nu_current, const DependencyMatrix& C, double eta,
                      ResponsibilityForm form = ResponsibilityForm::kTarget);

/// Called after each fixed-point sweep with the 1-based sweep index and the new nu.
using SweepObserver = std::function<void(std::size_t sweep, const Matrix& nu)>;

struct MStepOptions {
  std::size_t reg_iter = 10;
  ResponsibilityForm form = ResponsibilityForm::kTarget;
  int threads = 1;
  SweepObserver on_sweep;
};

/// Start from Gamma(100, 1/100) noise drawn from `rng`, then apply reg_iter fixed-point sweeps.
Matrix reg_m_step(const Matrix& Phi, const DependencyMatrix& C, double eta, Rng rng,
                  const MStepOptions& options = {});

/// The part of the bound that depends on nu, with the log-sum-exp Jensen
/// substitution for the word likelihood:
///   sum_k [ sum_i Phi_ik log sum_j C_ij exp(E[log b_jk]) + E[log p(b_k|eta)] - E[log q(b_k)] ].
double surrogate_bound(const Matrix& Phi, const Matrix& nu, const DependencyMatrix& C, double eta);

struct RegOptions {
  std::size_t reg_iter = 10;
  ResponsibilityForm form = ResponsibilityForm::kTarget;
  std::uint64_t seed = 0;
  int threads = 1;
  EStepOptions estep{};
  std::optional<Matrix> init;
  UpdateObserver on_update;
  /// Receives (update index, Phi used by the M-step, sweep, nu) for every sweep.
  std::function<void(std::size_t, const Matrix&, std::size_t, const Matrix&)> on_sweep;
};

struct RegBatchOptions : RegOptions {
  std::size_t max_epochs = 100;
  double tol = 1e-6;  ///< relative change of the surrogate bound
};

struct RegOnlineOptions : RegOptions {
  std::size_t batch_size = 1024;
  LearningRate rate{};
  std::size_t passes = 1;
  std::optional<std::size_t> max_updates;
  SamplingMode sampling = SamplingMode::kIndependent;
};

struct RegularizedFit {
  RegularizedModel model;
  std::vector<UpdateRecord> trace;
  bool converged = false;
};

RegularizedFit reg_batch_fit(const Corpus& corpus, std::shared_ptr<const DependencyMatrix> C,
                             const Hyperparameters& hyper, const RegBatchOptions& options = {});

RegularizedFit reg_online_fit(const Corpus& corpus, std::shared_ptr<const DependencyMatrix> C,
                              const Hyperparameters& hyper, const RegOnlineOptions& options = {});

}  // namespace regvb
