#include "regvb/math.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace regvb {
namespace {

constexpr double kAsymptoticThreshold = 10.0;

void check_argument(double x, const char* name) {
  if (!std::isfinite(x) || x <= 0.0) {
    throw std::domain_error(std::string(name) + ": argument must be positive and finite, got " +
                            std::to_string(x));
  }
}

}  // namespace

double digamma(double x) {
  check_argument(x, "digamma");
  double shift = 0.0;
  while (x < kAsymptoticThreshold) {
    shift -= 1.0 / x;
    x += 1.0;
  }
  // ln x - 1/2x - sum B_2n / (2n x^2n)
  const double r = 1.0 / x;
  const double r2 = r * r;
  const double series =
      r2 * (1.0 / 12 -
            r2 * (1.0 / 120 -
                  r2 * (1.0 / 252 -
                        r2 * (1.0 / 240 -
                              r2 * (1.0 / 132 -
                                    r2 * (691.0 / 32760 -
                                          r2 * (1.0 / 12 - r2 * 3617.0 / 8160)))))));
  return shift + std::log(x) - 0.5 * r - series;
}

double trigamma(double x) {
  check_argument(x, "trigamma");
  double shift = 0.0;
  while (x < kAsymptoticThreshold) {
    shift += 1.0 / (x * x);
    x += 1.0;
  }
  // 1/x + 1/2x^2 + sum B_2n / x^(2n+1)
  const double r = 1.0 / x;
  const double r2 = r * r;
  const double series =
      r * r2 *
      (1.0 / 6 -
       r2 * (1.0 / 30 -
             r2 * (1.0 / 42 -
                   r2 * (1.0 / 30 -
                         r2 * (5.0 / 66 - r2 * (691.0 / 2730 - r2 * (7.0 / 6 - r2 * 3617.0 / 510)))))));
  return shift + r + 0.5 * r2 + series;
}

double inverse_digamma(double y) {
  if (!std::isfinite(y)) {
    throw std::domain_error("inverse_digamma: argument must be finite");
  }
  // Starting point from Minka's note on Dirichlet estimation.
  double x = y >= -2.22 ? std::exp(y) + 0.5 : -1.0 / (y - digamma(1.0));
  for (int i = 0; i < 50; ++i) {
    const double step = (digamma(x) - y) / trigamma(x);
    double next = x - step;
    if (next <= 0.0) next = x * 0.5;
    if (std::abs(next - x) <= 1e-15 * x) {
      x = next;
      break;
    }
    x = next;
  }
  return x;
}

void dirichlet_log_expectation(std::span<const double> v, std::span<double> out) {
  if (v.size() != out.size()) {
    throw std::invalid_argument("dirichlet_log_expectation: output size mismatch");
  }
  double total = 0.0;
  for (double x : v) {
    if (!(x > 0.0) || !std::isfinite(x)) {
      throw std::domain_error("dirichlet_log_expectation: components must be positive");
    }
    total += x;
  }
  const double psi_total = digamma(total);
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = digamma(v[i]) - psi_total;
}

std::vector<double> dirichlet_log_expectation(std::span<const double> v) {
  std::vector<double> out(v.size());
  dirichlet_log_expectation(v, out);
  return out;
}

double log_sum_exp(std::span<const double> v) {
  if (v.empty()) throw std::domain_error("log_sum_exp: empty input");
  const double m = *std::max_element(v.begin(), v.end());
  if (m == -std::numeric_limits<double>::infinity()) return m;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

}  // namespace regvb
