#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "regvb/corpus.hpp"
#include "regvb/matrix.hpp"
#include "regvb/rng.hpp"

namespace regvb {

struct Hyperparameters {
  std::size_t K = 15;
  double alpha = 0.01;  ///< symmetric document-topic prior
  double eta = 0.01;    ///< symmetric topic-word prior

  void validate() const;
};

/// Step size rho_t = (tau0 + t)^-kappa, capped at 1. kappa = 0 gives rho = 1
/// for every t (batch updates).
struct LearningRate {
  double tau0 = 1024.0;
  double kappa = 0.51;

  double rho(std::uint64_t t) const;
  void validate() const;
};

struct EStepOptions {
  int max_iter = 100;
  double tol = 1e-5;  ///< on mean absolute change of gamma over topics
};

struct DocumentPosterior {
  std::vector<double> gamma;  ///< length K
  Matrix phi;                 ///< distinct words x K, rows sum to one
  int iterations = 0;
};

/// Per-document coordinate ascent on (phi, gamma). `log_word_weights` is
/// K x W and plays the role of E[log beta]; phi is normalized in log space.
DocumentPosterior e_step(const SparseDocument& doc, const Matrix& log_word_weights, double alpha,
                         const EStepOptions& options = {});

/// Row-wise Dirichlet log expectation of a K x W parameter matrix.
Matrix expected_log_beta(const Matrix& lambda);

/// K x W matrix of Gamma(100, 1/100) draws.
Matrix init_topics(std::size_t K, std::size_t W, Rng rng);

/// Per-topic word distribution exp(E[log beta_kw]) renormalized over words.
Matrix geometric_topics(const Matrix& lambda);

struct StandardModel {
  Matrix lambda;  ///< K x W variational Dirichlet parameters
  Hyperparameters hyper;

  Matrix beta() const { return geometric_topics(lambda); }
};

struct UpdateRecord {
  std::size_t t = 0;       ///< 0-based update (or epoch) index
  double rho = 1.0;
  std::size_t batch_size = 0;
  double bound = 0.0;      ///< ELBO for batch fits, topic-level bound for online fits
  double grt = 0.0;        ///< L1 change of beta across the update
};

struct UpdateView {
  const UpdateRecord& record;
  const Matrix& params;  ///< lambda or nu after the update
  const Matrix& beta;
};
using UpdateObserver = std::function<void(const UpdateView&)>;

struct BatchOptions {
  std::size_t max_epochs = 100;
  double tol = 1e-6;  ///< relative bound change
  std::uint64_t seed = 0;
  int threads = 1;
  EStepOptions estep{};
  std::optional<Matrix> init;  ///< starting parameters; random when absent
  UpdateObserver on_update;
};

struct OnlineOptions {
  std::size_t batch_size = 1024;
  LearningRate rate{};
  std::size_t passes = 1;                 ///< updates = ceil(passes * D / S)
  std::optional<std::size_t> max_updates; ///< overrides `passes`
  SamplingMode sampling = SamplingMode::kIndependent;
  std::uint64_t seed = 0;
  int threads = 1;
  EStepOptions estep{};
  std::optional<Matrix> init;
  UpdateObserver on_update;
};

/// Number of updates an online fit performs under the pass budget.
std::size_t planned_updates(std::size_t num_docs, const OnlineOptions& options);

struct StandardFit {
  StandardModel model;
  std::vector<UpdateRecord> trace;
  bool converged = false;
};

StandardFit batch_vb_fit(const Corpus& corpus, const Hyperparameters& hyper, const BatchOptions& options = {});
StandardFit online_vb_fit(const Corpus& corpus, const Hyperparameters& hyper, const OnlineOptions& options = {});

/// Document contribution to the bound: word, topic-assignment and theta terms.
double document_bound(const SparseDocument& doc, const DocumentPosterior& post, const Matrix& log_word_weights,
                      double alpha);

/// E[log p(b | eta)] - E[log q(b)] summed over topics.
double topic_dirichlet_terms(const Matrix& params, double eta);

/// sum_kw Phi_kw E[log beta_kw] + topic_dirichlet_terms(lambda).
double topic_bound(const Matrix& Phi, const Matrix& lambda, double eta);

/// Full LDA evidence lower bound. `posteriors[d]` belongs to corpus.doc(d).
double elbo(const Corpus& corpus, const StandardModel& model, std::span<const DocumentPosterior> posteriors);

}  // namespace regvb
