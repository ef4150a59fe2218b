#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ontask/estimate.hpp"
#include "ontask/events.hpp"
#include "ontask/ingest.hpp"
#include "ontask/mixture.hpp"
#include "ontask/threshold.hpp"

namespace ontask::report {

struct PipelineConfig {
    FilterConfig filter;
    mixture::EmConfig em;
    char delimiter = ',';
    int jobs = 0;  // 0 = hardware concurrency; per-user work only, output order is fixed
    bool per_resource = false;
    std::optional<std::string> grades_path;
    std::optional<std::string> completion_path;
    std::optional<std::string> cohort_path;
    std::optional<std::string> fits_cache_path;  // reuse cached fits instead of refitting
};

// One resource category's fit digest for a single user.
struct CategoryResult {
    std::string category;
    std::size_t n = 0;
    bool fitted = false;
    bool converged = false;
    std::optional<double> gof;
    std::optional<double> t;
    std::optional<threshold::ThresholdSolution> solution;
    std::string skip_reason;  // set when not fitted or the estimate is undefined
};

struct UserRow {
    std::string user_id;
    std::size_t n_intervals = 0;
    double net_time = 0.0;
    std::optional<mixture::MixtureFit> fit;  // pooled fit, ordered
    int k = 0;
    int k_effective = 0;
    bool converged = false;
    std::optional<double> gof;
    // missing when the fit cannot be split on/off; estimate_error says why
    std::optional<estimate::TimeOnTaskEstimate> estimate;
    std::optional<double> t_excluding_fast_unnormalized;
    std::optional<std::string> estimate_error;  // "cannot_split_on_off", ...
    std::optional<threshold::ThresholdSolution> solution;
    std::vector<CategoryResult> categories;
};

struct PerCategorySummary {
    std::string category;
    std::size_t n_users_attempted = 0;
    std::size_t n_users_fit = 0;      // fitted and converged
    std::size_t n_users_skipped = 0;  // below the fitting floor or non-converged
    std::optional<double> aggregate_gof;
    std::map<std::string, threshold::CohortThreshold> cohort_thresholds;
};

struct CourseReport {
    std::size_t n_users_input = 0;
    std::size_t n_users_fit = 0;
    std::size_t n_users_dropped = 0;
    std::vector<std::pair<std::string, DropReason>> drops;
    std::vector<UserRow> users;  // sorted by user_id
    std::optional<double> aggregate_gof;
    std::optional<double> mean_on_task_ratio;
    std::map<std::string, threshold::CohortThreshold> cohort_thresholds;
    std::vector<PerCategorySummary> per_resource;
    std::optional<double> grade_correlation;
    std::size_t grade_pairs = 0;
    std::size_t grade_excluded = 0;
    std::optional<double> completer_ratio;
    std::optional<double> completer_log_gap;
};

// mean(gof) - sample standard deviation(gof); empty below two values.
std::optional<double> aggregate_gof(std::span<const double> gofs);

struct GradeCorrelation {
    std::optional<double> rho;
    std::size_t n_pairs = 0;
    std::size_t n_excluded = 0;
};

// Pearson correlation of (ln T, grade) over the inner join; users with
// missing T, T <= 0, or no grade are excluded and counted.
GradeCorrelation grade_correlation(const std::map<std::string, double>& t_by_user,
                                   const std::map<std::string, double>& grades);

struct CompleterRatio {
    std::optional<double> ratio;    // exp(log_gap)
    std::optional<double> log_gap;  // mean(ln T | completed) - mean(ln T | not)
    std::size_t n_completers = 0;
    std::size_t n_non_completers = 0;
};

CompleterRatio completer_ratio(const std::map<std::string, double>& t_by_user,
                               const std::map<std::string, bool>& completed);

// Cross-course figure: the per-course log gaps are averaged before
// exponentiating.
double cross_course_completer_ratio(std::span<const double> log_gaps);

// Full pipeline: parse, filter, fit per user (optionally per resource
// category), estimate, solve thresholds, aggregate. Per-user failures never
// abort the run; they land in the drop ledger or as missing values.
CourseReport run_pipeline(const std::string& path, const PipelineConfig& cfg);
CourseReport run_pipeline_events(const std::vector<ClickEvent>& events, const PipelineConfig& cfg);

// Side tables joined by user_id.
std::map<std::string, double> read_grades_file(const std::string& path, char delimiter);
std::map<std::string, bool> read_completion_file(const std::string& path, char delimiter);
threshold::CohortSpec read_cohort_file(const std::string& path, char delimiter);

// Deterministic renderers; times use six decimal places in text tables, JSON
// keeps full float precision.
std::string render_users_csv(const CourseReport& report);
std::string render_users_json(const CourseReport& report);
std::string render_thresholds_csv(const CourseReport& report);
std::string render_thresholds_json(const CourseReport& report);
std::string render_drops_csv(const CourseReport& report);
std::string render_summary(const CourseReport& report);
std::string render_report_json(const CourseReport& report);
std::string render_fits_json(const CourseReport& report);

}  // namespace ontask::report
