#include "ontask/estimate.hpp"

namespace ontask::estimate {

namespace {
constexpr double kDegenerateWeight = 1e-12;
}

OnTaskSplit time_on_task(const mixture::MixtureFit& fit, std::size_t n) {
    const int k = fit.params.k();
    if (k < 2 || mixture::effective_component_count(fit) < 2)
        raise(ErrorCode::degenerate, "cannot_split_on_off");

    double weight = 0.0, weighted_mean = 0.0;
    for (int j = 0; j < k - 1; ++j) {
        weight += fit.params.weights[j];
        weighted_mean += fit.params.weights[j] * fit.direct_means[j];
    }
    if (weight < kDegenerateWeight) raise(ErrorCode::degenerate, "degenerate_weights");

    OnTaskSplit split;
    split.m_on = weighted_mean / weight;
    split.t = static_cast<double>(n) * split.m_on;
    return split;
}

ExcludingFast time_on_task_excluding_fast(const mixture::MixtureFit& fit, std::size_t n) {
    const int k = fit.params.k();
    if (k < 3) raise(ErrorCode::degenerate, "no_middle_components");
    if (fit.memberships.rows != 0 && fit.memberships.rows != n)
        raise(ErrorCode::internal, "membership rows do not match the interval count");

    const double fast_mass = fit.memberships.rows == n
                                 ? fit.memberships.column_sum(0)
                                 : static_cast<double>(n) * fit.params.weights[0];
    const double effective_n = static_cast<double>(n) - fast_mass;

    double weight = 0.0, weighted_sum = 0.0;
    for (int j = 1; j < k - 1; ++j) {
        weight += fit.params.weights[j];
        weighted_sum += fit.params.weights[j] * fit.direct_means[j];
    }
    if (weight < kDegenerateWeight) raise(ErrorCode::degenerate, "degenerate_weights");

    ExcludingFast out;
    out.t = effective_n * (weighted_sum / weight);
    out.t_unnormalized = effective_n * weighted_sum;
    return out;
}

TimeOnTaskEstimate make_estimate(const std::string& user_id, const mixture::MixtureFit& fit,
                                 std::size_t n, double net_time) {
    TimeOnTaskEstimate est;
    est.user_id = user_id;
    est.net_time = net_time;
    est.k_used = fit.params.k();
    est.gof = fit.gof;

    const OnTaskSplit split = time_on_task(fit, n);
    est.t = split.t;
    est.m_on = split.m_on;
    est.on_task_ratio = net_time > 0.0 ? split.t / net_time : 0.0;
    if (fit.params.k() >= 3) est.t_excluding_fast = time_on_task_excluding_fast(fit, n).t;
    return est;
}

double net_time(const IntervalSeries& series) {
    double s = 0.0;
    for (double d : series.deltas) s += d;
    return s;
}

}  // namespace ontask::estimate
