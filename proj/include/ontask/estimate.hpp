#pragma once

#include <optional>
#include <string>

#include "ontask/events.hpp"
#include "ontask/mixture.hpp"

namespace ontask::estimate {

// Per-user time-on-task quantities derived from an ordered mixture fit.
struct TimeOnTaskEstimate {
    std::string user_id;
    double t = 0.0;                           // seconds
    std::optional<double> t_excluding_fast;   // seconds, K >= 3 only
    double net_time = 0.0;                    // seconds
    double on_task_ratio = 0.0;               // t / net_time
    double m_on = 0.0;                        // mean entirely-on-task interval, seconds
    int k_used = 0;
    std::optional<double> gof;
};

struct OnTaskSplit {
    double t = 0.0;
    double m_on = 0.0;
};

// T = n * M_on where M_on is the weight-averaged direct mean of every
// component except the top one. Requires an ordered, converged fit with at
// least two distinguishable components; throws "cannot_split_on_off" or
// "degenerate_weights" otherwise.
OnTaskSplit time_on_task(const mixture::MixtureFit& fit, std::size_t n);

struct ExcludingFast {
    double t = 0.0;            // weight-normalized middle-component mean times N'
    double t_unnormalized = 0.0;  // same with the raw weighted sum, for diagnostics
};

// Variant that removes the fastest component: N' = n - sum_i p_{i,1}, averaged
// over components 2..K-1. Requires K >= 3. Fits restored from a cache carry no
// memberships; the fast-column mass then falls back to n * a_1, which the
// M-step makes exact at convergence.
ExcludingFast time_on_task_excluding_fast(const mixture::MixtureFit& fit, std::size_t n);

// Assembles the full per-user record from an ordered fit. Throws like
// time_on_task when the fit cannot be split into on- and off-task parts.
TimeOnTaskEstimate make_estimate(const std::string& user_id, const mixture::MixtureFit& fit,
                                 std::size_t n, double net_time);

double net_time(const IntervalSeries& series);

}  // namespace ontask::estimate
