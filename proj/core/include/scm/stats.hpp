#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace scm {

/// Empirical quantile with linear interpolation between order statistics:
/// for sorted x[0..n-1], q_p = x[floor(h)] + (h - floor(h)) (x[floor(h)+1] - x[floor(h)])
/// with h = (n - 1) p.
double quantile(std::span<const double> draws, double p);
double quantile_sorted(std::span<const double> sorted, double p);

double mean(std::span<const double> values);

/// Sample standard deviation (n - 1 denominator).
double sample_sd(std::span<const double> values);

double gamma_log_pdf(double x, double shape, double rate);

/// Log density, with respect to tau, of a precision whose standard deviation
/// 1/sqrt(tau) is uniform on (0, upper). -inf outside the support.
double uniform_sd_log_pdf(double tau, double upper);

/// Effective sample size from the initial positive sequence estimator.
double effective_sample_size(std::span<const double> chain);

std::vector<double> to_double(std::span<const std::int64_t> values);

}  // namespace scm
