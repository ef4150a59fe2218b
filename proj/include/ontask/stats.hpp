#pragma once

#include <optional>
#include <span>
#include <vector>

namespace ontask::stats {

double mean(std::span<const double> v);

// Unbiased (n-1) standard deviation; 0 for fewer than two values.
double sample_std(std::span<const double> v);

// Linear-interpolation quantile on a sorted sample (h = (n-1)q between order
// statistics), q in [0, 1].
double quantile_sorted(std::span<const double> sorted, double q);

// Pearson correlation; empty when either side has zero variance or n < 2.
std::optional<double> pearson(std::span<const double> a, std::span<const double> b);

// Standard normal CDF.
double normal_cdf(double z);

double log_sum_exp(std::span<const double> v);

// Empirical CDF evaluated at each sample point: rank_i / n with average ranks
// on ties. Order matches the input order.
std::vector<double> ecdf_at_points(std::span<const double> x);

}  // namespace ontask::stats
