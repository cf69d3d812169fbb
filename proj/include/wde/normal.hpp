#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace wde {

/// Standard normal distribution function.
double normal_cdf(double x);

/// Standard normal quantile; u must lie in (0, 1).
double normal_quantile(double u);

/// Standard normal density.
double normal_pdf(double x);

/// Kolmogorov-Smirnov distance between the empirical distribution of
/// `values` and the standard normal.
double ks_statistic_normal(std::span<const double> values);

/// Asymptotic critical value of the one-sample KS statistic at level
/// `alpha` (supported: 0.10, 0.05, 0.01) for a sample of size n.
double ks_critical_value(std::size_t n, double alpha);

/// Pearson correlation of two equally long sequences.
double correlation(std::span<const double> a, std::span<const double> b);

/// splitmix64 finalizer; used to derive independent per-replication seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace wde
