#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ontask/events.hpp"
#include "ontask/rng.hpp"

namespace ontask::mixture {

struct EmConfig {
    int max_iterations = 1000;
    double rel_tolerance = 1e-8;   // relative log-likelihood change
    double sigma_floor = 1e-3;     // log-seconds
    int restarts = 3;
    std::uint64_t seed = 0;
    std::vector<int> k_range = {3, 4, 5};
    int min_points = 10;

    void validate() const;
};

// Gaussian mixture over log-intervals: weights a_k, means and standard
// deviations in log-seconds.
struct MixtureParams {
    std::vector<double> weights;
    std::vector<double> means;
    std::vector<double> stds;

    int k() const { return static_cast<int>(weights.size()); }
};

// N x K responsibilities, row-major; each row sums to 1.
struct MembershipMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> p;

    double operator()(std::size_t i, std::size_t k) const { return p[i * cols + k]; }
    double& at(std::size_t i, std::size_t k) { return p[i * cols + k]; }
    double column_sum(std::size_t k) const;
};

struct MixtureFit {
    MixtureParams params;
    MembershipMatrix memberships;
    std::vector<double> direct_means;   // m_k in seconds, membership-weighted
    std::vector<bool> component_empty;  // column responsibility mass below 1e-12
    double log_likelihood = 0.0;
    double bic = 0.0;
    int iterations = 0;
    bool converged = false;
    std::optional<double> gof;
    std::vector<double> ll_trace;  // per-iteration log-likelihood, for diagnostics
};

// Natural logarithms of the intervals; throws on non-positive values, which
// the ingest filters are supposed to have removed.
std::vector<double> log_transform(std::span<const double> deltas);
std::vector<double> log_transform(const IntervalSeries& series);

// Quantile-spread initialization: means at the (k - 1/2)/K quantiles, stds at
// sample std / K (floored), equal weights. When a jitter source is given
// (restarts beyond the first), means are perturbed uniformly within one
// pooled standard deviation.
MixtureParams init_params(std::span<const double> x, int k, double sigma_floor = 1e-3,
                          Rng* jitter = nullptr);

// EM for a K-component Gaussian mixture on log-intervals. Responsibilities are
// normalized in the log domain. Returns the best of cfg.restarts runs by final
// log-likelihood; components are not yet ordered and no goodness-of-fit is set.
MixtureFit fit_em(std::span<const double> x, int k, const EmConfig& cfg);

struct DirectMeans {
    std::vector<double> m;
    std::vector<bool> empty;
};

// m_k = sum_i delta_i p_ik / sum_i p_ik; a component with responsibility mass
// below 1e-12 gets m_k = 0 and an empty flag.
DirectMeans direct_component_means(std::span<const double> deltas, const MembershipMatrix& memberships);

// exp(mu_k + sigma_k^2 / 2): the closed-form log-normal means. Diagnostic
// only; the direct means above are what estimation uses.
std::vector<double> lognormal_theoretical_means(const MixtureParams& params);

// Reorders components so direct means are non-decreasing (ties by mean, then
// std), permuting weights, means, stds, direct means and membership columns
// together.
void order_components(MixtureFit& fit);

// Index of the minimal-BIC entry; ties go to the smaller K. Entries are
// (K, BIC) pairs.
std::size_t pick_min_bic(const std::vector<std::pair<int, double>>& candidates);

// Fits every feasible K in cfg.k_range, selects the converged fit with minimal
// BIC (parameter count 3K - 1), and attaches direct means. If no K converges,
// the best-BIC fit is returned with converged = false so callers can drop the
// user.
MixtureFit select_model(std::span<const double> x, std::span<const double> deltas,
                        const EmConfig& cfg);

// Pearson correlation between the empirical CDF (average ranks on ties) and
// the mixture CDF, both evaluated at the observed points. Empty when either
// side has zero variance.
std::optional<double> goodness_of_fit(std::span<const double> x, const MixtureFit& fit);

// Number of distinguishable components: non-empty and, after ordering,
// separated from their neighbor in mean or std by more than a 1e-9 relative
// tolerance. Collapsed fits (all intervals identical) count as one.
int effective_component_count(const MixtureFit& fit);

// Fit digest serialization (params, direct means, BIC, convergence, g.o.f.)
// used for caching between pipeline stages. Memberships are not carried.
std::string fit_to_json(const MixtureFit& fit, std::size_t n);
MixtureFit fit_from_json(const std::string& text, std::size_t* n_out = nullptr);

}  // namespace ontask::mixture
