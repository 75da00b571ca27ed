#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "regvb/matrix.hpp"

namespace regvb {

inline constexpr double kProbabilityFloor = 1e-12;

/// D x K matrix whose column k is the distribution theta_k over documents:
/// gammas are normalized per document, floored, then normalized per topic.
Matrix topic_document_distributions(const Matrix& gammas);

/// KL(p || uniform) after flooring p at kProbabilityFloor and renormalizing.
double kl_to_uniform(std::span<const double> p);

/// Mean over topics of KL(theta_k || uniform over documents).
double background_distance(const Matrix& gammas);

/// Total absolute change sum_kw |beta_t - beta_prev|.
double grt(const Matrix& beta_t, const Matrix& beta_prev);

struct DirichletEstimate {
  std::vector<double> alpha;
  std::vector<double> expected;  ///< alpha_k / sum(alpha)
  int iterations = 0;
  bool converged = false;
};

/// Maximum-likelihood Dirichlet concentration from N >= 2 probability rows
/// (Minka's fixed-point iteration on the digamma equation).
DirichletEstimate dirichlet_mle(const Matrix& samples, double tol = 1e-8, int max_iter = 1000);

/// Regularized incomplete beta I_x(a, b) by continued fraction.
double incomplete_beta(double a, double b, double x);

/// Two-sided p-value of a Student t statistic.
double student_t_two_sided_p(double t, double dof);

struct TTestResult {
  double t = 0.0;
  double p = 1.0;
  std::size_t dof = 0;
};

/// Paired t-test on a - b. Zero variance gives t = 0, p = 1 when the mean
/// difference is zero and t = +-inf, p = 0 otherwise.
TTestResult paired_t_test(std::span<const double> a, std::span<const double> b);

struct RatioTestResult {
  std::vector<double> ratios_a;
  std::vector<double> ratios_b;
  std::vector<std::size_t> pairs;  ///< indices of the image pairs that entered the test
  std::size_t excluded = 0;        ///< pairs dropped for a zero denominator
  TTestResult test;
};

/// Per-image ratio topic_num / topic_den in two paired groups (rows = images,
/// columns = topics), followed by a paired t-test between the groups.
RatioTestResult topic_ratio_test(const Matrix& group_a, const Matrix& group_b, std::size_t topic_num,
                                 std::size_t topic_den);

/// Maximum-weight perfect matching on a square score matrix; result[i] is the
/// column assigned to row i.
std::vector<std::size_t> max_weight_assignment(const Matrix& score);

struct TopicAlignment {
  std::vector<std::size_t> permutation;  ///< permutation[i] = true topic matched to estimated topic i
  double mean_similarity = 0.0;          ///< mean cosine over matched pairs
};

/// Optimal cosine matching for K <= 64, greedy above.
TopicAlignment align_topics(const Matrix& beta_est, const Matrix& beta_true);

}  // namespace regvb
