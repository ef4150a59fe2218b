#include "ontask/threshold.hpp"

#include <algorithm>
#include <cmath>

#include "ontask/error.hpp"

namespace ontask::threshold {

std::optional<double> thresholded_estimate(std::span<const double> deltas, double tau) {
    if (deltas.empty()) raise(ErrorCode::invalid_argument, "thresholded_estimate requires intervals");
    if (!(tau > 0.0)) raise(ErrorCode::invalid_argument, "tau must be positive");

    double sum = 0.0;
    std::size_t count = 0;
    for (double d : deltas) {
        if (d < tau) {
            sum += d;
            ++count;
        }
    }
    if (count == 0) return std::nullopt;  // below_support
    return static_cast<double>(deltas.size()) * (sum / static_cast<double>(count));
}

ThresholdSolution effective_threshold(std::span<const double> deltas, double t) {
    if (deltas.empty()) raise(ErrorCode::invalid_argument, "effective_threshold requires intervals");

    std::vector<double> sorted(deltas.begin(), deltas.end());
    std::sort(sorted.begin(), sorted.end());
    const double net = [&] {
        double s = 0.0;
        for (double d : sorted) s += d;
        return s;
    }();
    if (t < 0.0 || t > net * (1.0 + 1e-9) + 1e-9)
        raise(ErrorCode::invalid_argument, "target time must lie within [0, net time]");

    // Shelf j covers tau in (u_j, u_{j+1}]; with the strict cutoff, T' there
    // selects every interval <= u_j. Prefix sums over the sorted values give
    // the shelf values directly.
    std::vector<double> uniques;
    std::vector<double> shelf_t_prime;  // T' on the shelf starting at uniques[j]
    {
        const double n = static_cast<double>(sorted.size());
        double prefix = 0.0;
        std::size_t i = 0;
        while (i < sorted.size()) {
            std::size_t j = i;
            while (j + 1 < sorted.size() && sorted[j + 1] == sorted[i]) ++j;
            for (std::size_t c = i; c <= j; ++c) prefix += sorted[c];
            uniques.push_back(sorted[i]);
            shelf_t_prime.push_back(n * (prefix / static_cast<double>(j + 1)));
            i = j + 1;
        }
    }
    const std::size_t shelf_count = uniques.size();  // shelf j: (uniques[j], next]
    const double atol = 1e-9 * std::max(1.0, t);

    ThresholdSolution solution;

    // zero shelves first, scanning upward
    for (std::size_t j = 0; j < shelf_count; ++j) {
        const double f = shelf_t_prime[j] - t;
        if (std::abs(f) <= atol) {
            const double lo = uniques[j];
            const double hi = (j + 1 < shelf_count) ? uniques[j + 1] : uniques.back();
            solution.kind = ThresholdCase::zero_shelf;
            solution.tau = 0.5 * (lo + hi);
            solution.shelf_bounds = std::make_pair(lo, hi);
            solution.f_left = f;
            solution.f_right = f;
            return solution;
        }
    }

    // then a discontinuity jump from negative to positive
    for (std::size_t j = 0; j + 1 < shelf_count; ++j) {
        const double f_lo = shelf_t_prime[j] - t;
        const double f_hi = shelf_t_prime[j + 1] - t;
        if (f_lo < 0.0 && f_hi > 0.0) {
            solution.kind = ThresholdCase::jump;
            solution.tau = uniques[j + 1];
            solution.f_left = f_lo;
            solution.f_right = f_hi;
            return solution;
        }
    }

    solution.kind = ThresholdCase::none;
    return solution;
}

std::map<std::string, CohortThreshold> aggregate_thresholds(
    const std::vector<ThresholdSolution>& solutions, const CohortSpec& cohorts) {
    std::map<std::string, CohortThreshold> out;
    std::map<std::string, double> sums;
    for (const auto& s : solutions) {
        const std::string label = cohorts.label_for(s.user_id);
        auto& bucket = out[label];
        if (s.kind == ThresholdCase::none || !s.tau) {
            ++bucket.n_excluded;
            continue;
        }
        ++bucket.n_users;
        sums[label] += *s.tau;
    }
    for (auto& [label, bucket] : out) {
        if (bucket.n_users > 0)
            bucket.mean_tau = sums[label] / static_cast<double>(bucket.n_users);
    }
    return out;
}

}  // namespace ontask::threshold
