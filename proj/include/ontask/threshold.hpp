#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace ontask::threshold {

enum class ThresholdCase { none, jump, zero_shelf };

inline const char* to_string(ThresholdCase c) {
    switch (c) {
        case ThresholdCase::none: return "none";
        case ThresholdCase::jump: return "jump";
        case ThresholdCase::zero_shelf: return "zero_shelf";
    }
    return "none";
}

// Result of solving F(tau) = T'(tau) - T on the shelves of T'.
//   jump:       F crosses zero at a discontinuity; tau is the separating
//               observed interval value, f_left < 0 < f_right.
//   zero_shelf: some shelf has |F| <= atol; tau is its midpoint and
//               shelf_bounds the shelf itself (the open-ended top shelf is
//               closed at the largest interval).
//   none:       F never crosses or touches zero on the search domain.
struct ThresholdSolution {
    std::string user_id;
    ThresholdCase kind = ThresholdCase::none;
    std::optional<double> tau;  // seconds
    double f_left = 0.0;
    double f_right = 0.0;
    std::optional<std::pair<double, double>> shelf_bounds;
};

// T'(tau) = N * mean(delta | delta < tau) with a strict cutoff. Empty when no
// interval lies below tau (below-support marker).
std::optional<double> thresholded_estimate(std::span<const double> deltas, double tau);

// Solves T'(tau) = T over the shelves induced by the sorted unique interval
// values. Zero shelves (|F| <= 1e-9 * max(1, T)) take precedence over jumps;
// shelves below the smallest interval are outside the search domain.
ThresholdSolution effective_threshold(std::span<const double> deltas, double t);

// Optional user -> cohort labeling; unlisted users fall back to the default
// label ("all" when no mapping was given at all, "unassigned" otherwise).
struct CohortSpec {
    std::unordered_map<std::string, std::string> labels;

    std::string label_for(const std::string& user_id) const {
        if (labels.empty()) return "all";
        auto it = labels.find(user_id);
        return it != labels.end() ? it->second : "unassigned";
    }
};

struct CohortThreshold {
    std::optional<double> mean_tau;  // seconds; empty when every user was excluded
    std::size_t n_users = 0;         // users contributing a tau
    std::size_t n_excluded = 0;      // users whose solution had no tau
};

std::map<std::string, CohortThreshold> aggregate_thresholds(
    const std::vector<ThresholdSolution>& solutions, const CohortSpec& cohorts);

}  // namespace ontask::threshold
