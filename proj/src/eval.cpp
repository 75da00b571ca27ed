#include "regvb/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "regvb/math.hpp"

namespace regvb {

Matrix topic_document_distributions(const Matrix& gammas) {
  const std::size_t D = gammas.rows(), K = gammas.cols();
  if (D == 0 || K == 0) throw std::invalid_argument("topic_document_distributions: empty input");
  Matrix theta(D, K);
  for (std::size_t d = 0; d < D; ++d) {
    double s = 0.0;
    for (double g : gammas.row(d)) {
      if (!(g > 0.0)) throw std::invalid_argument("topic_document_distributions: gammas must be positive");
      s += g;
    }
    for (std::size_t k = 0; k < K; ++k) theta(d, k) = std::max(gammas(d, k) / s, kProbabilityFloor);
  }
  for (std::size_t k = 0; k < K; ++k) {
    double s = 0.0;
    for (std::size_t d = 0; d < D; ++d) s += theta(d, k);
    for (std::size_t d = 0; d < D; ++d) theta(d, k) /= s;
  }
  return theta;
}

double kl_to_uniform(std::span<const double> p) {
  if (p.empty()) throw std::invalid_argument("kl_to_uniform: empty distribution");
  double s = 0.0;
  for (double v : p) s += std::max(v, kProbabilityFloor);
  const double n = static_cast<double>(p.size());
  double kl = 0.0;
  for (double v : p) {
    const double q = std::max(v, kProbabilityFloor) / s;
    kl += q * std::log(q * n);
  }
  return std::max(kl, 0.0);
}

double background_distance(const Matrix& gammas) {
  const Matrix theta = topic_document_distributions(gammas);
  const std::size_t D = theta.rows(), K = theta.cols();
  double total = 0.0;
  std::vector<double> column(D);
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t d = 0; d < D; ++d) column[d] = theta(d, k);
    total += kl_to_uniform(column);
  }
  return total / static_cast<double>(K);
}

double grt(const Matrix& beta_t, const Matrix& beta_prev) {
  if (!beta_t.same_shape(beta_prev)) throw std::invalid_argument("grt: shape mismatch");
  return l1_distance(beta_t, beta_prev);
}

DirichletEstimate dirichlet_mle(const Matrix& samples, double tol, int max_iter) {
  const std::size_t N = samples.rows(), K = samples.cols();
  if (N < 2) throw std::invalid_argument("dirichlet_mle: need at least two samples");
  if (K == 0) throw std::invalid_argument("dirichlet_mle: empty rows");

  std::vector<double> mean_log(K, 0.0), mean(K, 0.0), sq(K, 0.0);
  for (std::size_t n = 0; n < N; ++n) {
    for (std::size_t k = 0; k < K; ++k) {
      const double p = std::max(samples(n, k), kProbabilityFloor);
      mean_log[k] += std::log(p);
      mean[k] += p;
      sq[k] += p * p;
    }
  }
  for (std::size_t k = 0; k < K; ++k) {
    mean_log[k] /= N;
    mean[k] /= N;
    sq[k] /= N;
  }

  // Moment-matching start: precision from the first component's variance.
  double precision = static_cast<double>(K);
  const double var = sq[0] - mean[0] * mean[0];
  if (var > 0.0) {
    const double s = mean[0] * (1.0 - mean[0]) / var - 1.0;
    if (s > 0.0 && std::isfinite(s)) precision = s;
  }
  DirichletEstimate est;
  est.alpha.resize(K);
  const double mean_sum = std::accumulate(mean.begin(), mean.end(), 0.0);
  for (std::size_t k = 0; k < K; ++k) est.alpha[k] = std::max(precision * mean[k] / mean_sum, 1e-6);

  for (int iter = 1; iter <= max_iter; ++iter) {
    const double psi_total = digamma(std::accumulate(est.alpha.begin(), est.alpha.end(), 0.0));
    double change = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
      const double next = inverse_digamma(psi_total + mean_log[k]);
      change = std::max(change, std::abs(next - est.alpha[k]));
      est.alpha[k] = next;
    }
    est.iterations = iter;
    if (change < tol) {
      est.converged = true;
      break;
    }
  }
  const double total = std::accumulate(est.alpha.begin(), est.alpha.end(), 0.0);
  est.expected.resize(K);
  for (std::size_t k = 0; k < K; ++k) est.expected[k] = est.alpha[k] / total;
  return est;
}

namespace {

// Modified Lentz evaluation of the incomplete beta continued fraction.
double beta_continued_fraction(double a, double b, double x) {
  constexpr double kTiny = 1e-300;
  constexpr double kEps = 1e-16;
  double c = 1.0;
  double d = 1.0 - (a + b) * x / (a + 1.0);
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 10000; ++m) {
    const double m2 = 2.0 * m;
    double num = m * (b - m) * x / ((a + m2 - 1.0) * (a + m2));
    d = 1.0 + num * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + num / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    num = -(a + m) * (a + b + m) * x / ((a + m2) * (a + m2 + 1.0));
    d = 1.0 + num * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + num / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kEps) break;
  }
  return h;
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) throw std::domain_error("incomplete_beta: a and b must be positive");
  if (x < 0.0 || x > 1.0) throw std::domain_error("incomplete_beta: x must lie in [0, 1]");
  if (x == 0.0 || x == 1.0) return x;
  const double log_front =
      std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
  if (x < (a + 1.0) / (a + b + 2.0)) return std::exp(log_front) * beta_continued_fraction(a, b, x) / a;
  return 1.0 - std::exp(log_front) * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double student_t_two_sided_p(double t, double dof) {
  if (!(dof > 0.0)) throw std::domain_error("student_t_two_sided_p: dof must be positive");
  if (std::isnan(t)) throw std::domain_error("student_t_two_sided_p: t is NaN");
  if (std::isinf(t)) return 0.0;
  return incomplete_beta(0.5 * dof, 0.5, dof / (dof + t * t));
}

TTestResult paired_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("paired_t_test: groups differ in length");
  const std::size_t n = a.size();
  if (n < 2) throw std::invalid_argument("paired_t_test: need at least two pairs");
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) mean += a[i] - b[i];
  mean /= n;
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dev = a[i] - b[i] - mean;
    ss += dev * dev;
  }
  TTestResult r;
  r.dof = n - 1;
  const double se = std::sqrt(ss / (n - 1) / n);
  if (se == 0.0) {
    if (mean == 0.0) return r;
    r.t = mean > 0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
    r.p = 0.0;
    return r;
  }
  r.t = mean / se;
  r.p = student_t_two_sided_p(r.t, static_cast<double>(r.dof));
  return r;
}

RatioTestResult topic_ratio_test(const Matrix& group_a, const Matrix& group_b, std::size_t topic_num,
                                 std::size_t topic_den) {
  if (!group_a.same_shape(group_b)) throw std::invalid_argument("topic_ratio_test: groups must be paired");
  if (topic_num >= group_a.cols() || topic_den >= group_a.cols()) {
    throw std::invalid_argument("topic_ratio_test: topic index out of range");
  }
  RatioTestResult r;
  for (std::size_t i = 0; i < group_a.rows(); ++i) {
    const double da = group_a(i, topic_den), db = group_b(i, topic_den);
    if (!(da > 0.0) || !(db > 0.0)) {
      ++r.excluded;
      continue;
    }
    r.pairs.push_back(i);
    r.ratios_a.push_back(group_a(i, topic_num) / da);
    r.ratios_b.push_back(group_b(i, topic_num) / db);
  }
  r.test = paired_t_test(r.ratios_a, r.ratios_b);
  return r;
}

std::vector<std::size_t> max_weight_assignment(const Matrix& score) {
  const std::size_t n = score.rows();
  if (score.cols() != n) throw std::invalid_argument("max_weight_assignment: score must be square");
  // Shortest augmenting path Hungarian method on cost = -score, 1-based potentials.
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> match(n + 1, 0), way(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    match[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(n + 1, kInf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = match[j0];
      double delta = kInf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = -score(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::size_t> result(n);
  for (std::size_t j = 1; j <= n; ++j) result[match[j] - 1] = j - 1;
  return result;
}

TopicAlignment align_topics(const Matrix& beta_est, const Matrix& beta_true) {
  if (beta_est.rows() != beta_true.rows()) throw std::invalid_argument("align_topics: topic counts differ");
  if (beta_est.cols() != beta_true.cols()) throw std::invalid_argument("align_topics: vocabulary sizes differ");
  const std::size_t K = beta_est.rows();
  Matrix cosine(K, K);
  auto norm = [](std::span<const double> r) {
    double s = 0.0;
    for (double v : r) s += v * v;
    return std::sqrt(s);
  };
  for (std::size_t i = 0; i < K; ++i) {
    const double ni = norm(beta_est.row(i));
    for (std::size_t j = 0; j < K; ++j) {
      const double denom = ni * norm(beta_true.row(j));
      double dot = 0.0;
      for (std::size_t w = 0; w < beta_est.cols(); ++w) dot += beta_est(i, w) * beta_true(j, w);
      cosine(i, j) = denom > 0.0 ? dot / denom : 0.0;
    }
  }

  TopicAlignment out;
  if (K <= 64) {
    out.permutation = max_weight_assignment(cosine);
  } else {
    out.permutation.assign(K, K);
    std::vector<std::size_t> pairs(K * K);
    std::iota(pairs.begin(), pairs.end(), std::size_t{0});
    std::stable_sort(pairs.begin(), pairs.end(),
                     [&](std::size_t a, std::size_t b) { return cosine.data()[a] > cosine.data()[b]; });
    std::vector<char> taken(K, 0);
    for (std::size_t p : pairs) {
      const std::size_t i = p / K, j = p % K;
      if (out.permutation[i] != K || taken[j]) continue;
      out.permutation[i] = j;
      taken[j] = 1;
    }
  }
  for (std::size_t i = 0; i < K; ++i) out.mean_similarity += cosine(i, out.permutation[i]);
  out.mean_similarity /= static_cast<double>(K);
  return out;
}

}  // namespace regvb
