#pragma once

#include <span>
#include <vector>

namespace regvb {

/// Digamma function. Throws std::domain_error for x <= 0 or non-finite x.
double digamma(double x);

/// Trigamma function, the derivative of digamma. Same domain as digamma.
double trigamma(double x);

/// Inverse of digamma on the positive reals (Newton iteration).
double inverse_digamma(double y);

/// E[log p_i] under Dir(v): digamma(v_i) - digamma(sum_j v_j).
std::vector<double> dirichlet_log_expectation(std::span<const double> v);

/// In-place variant writing into `out` (same length as `v`).
void dirichlet_log_expectation(std::span<const double> v, std::span<double> out);

/// log(sum_i exp(v_i)), shifted by the maximum so large inputs do not overflow.
double log_sum_exp(std::span<const double> v);

}  // namespace regvb
