#include "ontask/report.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <thread>

#include <json.hpp>

#include "ontask/csv.hpp"
#include "ontask/rng.hpp"
#include "ontask/stats.hpp"

namespace ontask::report {

namespace {

using nlohmann::ordered_json;

std::string fixed6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

std::string opt_fixed6(const std::optional<double>& v) {
    return v ? fixed6(*v) : std::string();
}

ordered_json opt_json(const std::optional<double>& v) {
    if (v) return *v;
    return nullptr;
}

void run_indexed(std::size_t count, int jobs, const std::function<void(std::size_t)>& work) {
    if (jobs <= 0) {
        const unsigned hw = std::thread::hardware_concurrency();
        jobs = hw > 0 ? static_cast<int>(hw) : 1;
    }
    if (jobs == 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) work(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    const int n_threads = static_cast<int>(std::min<std::size_t>(jobs, count));
    pool.reserve(n_threads);
    for (int t = 0; t < n_threads; ++t) {
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= count) return;
                work(i);
            }
        });
    }
    for (auto& th : pool) th.join();
}

std::uint64_t fit_seed(std::uint64_t global_seed, const std::string& user_id,
                       const std::string& category) {
    return SplitMix64::hash(SplitMix64::hash(global_seed, fnv1a64(user_id)), fnv1a64(category));
}

struct CachedFit {
    mixture::MixtureFit fit;
    std::size_t n = 0;
};

struct FitsCache {
    std::map<std::string, CachedFit> by_key;

    static std::string key(const std::string& user_id, const std::string& category) {
        return user_id + '\x1f' + category;
    }
    const CachedFit* find(const std::string& user_id, const std::string& category) const {
        auto it = by_key.find(key(user_id, category));
        return it != by_key.end() ? &it->second : nullptr;
    }
};

FitsCache load_fits_cache(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(ErrorCode::io, "cannot open fits cache: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        raise(ErrorCode::config, std::string("invalid fits cache JSON: ") + e.what());
    }
    FitsCache cache;
    if (!j.contains("users") || !j["users"].is_array())
        raise(ErrorCode::config, "invalid fits cache JSON: missing users array");
    for (const auto& entry : j["users"]) {
        if (!entry.contains("user_id")) raise(ErrorCode::config, "fits cache entry lacks user_id");
        CachedFit cf;
        cf.fit = mixture::fit_from_json(entry.dump(), &cf.n);
        const std::string user = entry["user_id"].get<std::string>();
        const std::string category =
            entry.contains("category") ? entry["category"].get<std::string>() : std::string("all");
        cache.by_key[FitsCache::key(user, category)] = std::move(cf);
    }
    return cache;
}

struct AnalysisOutcome {
    bool dropped = false;
    DropReason drop_reason = DropReason::insufficient_data;
    std::optional<mixture::MixtureFit> fit;
    bool from_cache = false;
};

// Fit chain shared by the pooled series and each resource category:
// log-transform, BIC model selection, direct means, ordering, g.o.f.
AnalysisOutcome analyze_intervals(std::span<const double> deltas, const mixture::EmConfig& cfg) {
    AnalysisOutcome out;
    if (deltas.size() < static_cast<std::size_t>(cfg.min_points)) {
        out.dropped = true;
        out.drop_reason = DropReason::insufficient_data;
        return out;
    }
    const std::vector<double> x = mixture::log_transform(deltas);
    mixture::MixtureFit fit;
    try {
        fit = mixture::select_model(x, deltas, cfg);
    } catch (const Error& e) {
        if (e.code() == ErrorCode::insufficient_data) {
            out.dropped = true;
            out.drop_reason = DropReason::insufficient_data;
            return out;
        }
        throw;
    }
    if (!fit.converged) {
        out.dropped = true;
        out.drop_reason = DropReason::no_convergence;
        out.fit = std::move(fit);  // kept for diagnostics
        return out;
    }
    mixture::order_components(fit);
    fit.gof = mixture::goodness_of_fit(x, fit);
    out.fit = std::move(fit);
    return out;
}

UserRow build_user_row(const IntervalSeries& series, const PipelineConfig& cfg,
                       const FitsCache* cache, bool* dropped, DropReason* drop_reason) {
    UserRow row;
    row.user_id = series.user_id;
    row.n_intervals = series.n();
    row.net_time = series.net_time;
    *dropped = false;

    mixture::EmConfig em = cfg.em;
    em.seed = fit_seed(cfg.em.seed, series.user_id, "all");

    AnalysisOutcome outcome;
    const CachedFit* cached = cache ? cache->find(series.user_id, "all") : nullptr;
    if (cached && cached->n == series.n()) {
        outcome.fit = cached->fit;
        outcome.from_cache = true;
        if (!cached->fit.converged) {
            outcome.dropped = true;
            outcome.drop_reason = DropReason::no_convergence;
        }
    } else {
        outcome = analyze_intervals(series.deltas, em);
    }
    if (outcome.dropped) {
        *dropped = true;
        *drop_reason = outcome.drop_reason;
        return row;
    }

    mixture::MixtureFit& fit = *outcome.fit;
    row.k = fit.params.k();
    row.k_effective = mixture::effective_component_count(fit);
    row.converged = fit.converged;
    row.gof = fit.gof;

    try {
        row.estimate = estimate::make_estimate(series.user_id, fit, series.n(), series.net_time);
        if (row.estimate->t_excluding_fast)
            row.t_excluding_fast_unnormalized =
                estimate::time_on_task_excluding_fast(fit, series.n()).t_unnormalized;
    } catch (const Error& e) {
        row.estimate_error = e.what();
    }

    if (row.estimate) {
        auto solution = threshold::effective_threshold(series.deltas, row.estimate->t);
        solution.user_id = series.user_id;
        row.solution = std::move(solution);
    }

    if (cfg.per_resource) {
        std::map<ResourceCategory, std::vector<std::size_t>> by_category;
        for (std::size_t i = 0; i < series.n(); ++i) by_category[series.categories[i]].push_back(i);
        for (const auto& [category, idx] : by_category) {
            CategoryResult cat;
            cat.category = category.to_string();
            cat.n = idx.size();
            std::vector<double> cat_deltas;
            cat_deltas.reserve(idx.size());
            for (std::size_t i : idx) cat_deltas.push_back(series.deltas[i]);

            mixture::EmConfig cat_em = cfg.em;
            cat_em.seed = fit_seed(cfg.em.seed, series.user_id, cat.category);

            AnalysisOutcome cat_outcome;
            const CachedFit* cat_cached = cache ? cache->find(series.user_id, cat.category) : nullptr;
            if (cat_cached && cat_cached->n == cat_deltas.size()) {
                cat_outcome.fit = cat_cached->fit;
                if (!cat_cached->fit.converged) {
                    cat_outcome.dropped = true;
                    cat_outcome.drop_reason = DropReason::no_convergence;
                }
            } else {
                cat_outcome = analyze_intervals(cat_deltas, cat_em);
            }
            if (cat_outcome.dropped) {
                cat.skip_reason = to_string(cat_outcome.drop_reason);
                row.categories.push_back(std::move(cat));
                continue;
            }
            cat.fitted = true;
            cat.converged = true;
            cat.gof = cat_outcome.fit->gof;
            try {
                const auto split = estimate::time_on_task(*cat_outcome.fit, cat_deltas.size());
                cat.t = split.t;
                auto solution = threshold::effective_threshold(cat_deltas, split.t);
                solution.user_id = series.user_id;
                cat.solution = std::move(solution);
            } catch (const Error& e) {
                cat.skip_reason = e.what();
            }
            row.categories.push_back(std::move(cat));
        }
    }

    row.fit = std::move(fit);
    return row;
}

}  // namespace

std::optional<double> aggregate_gof(std::span<const double> gofs) {
    std::vector<double> finite;
    finite.reserve(gofs.size());
    for (double g : gofs)
        if (std::isfinite(g)) finite.push_back(g);
    if (finite.size() < 2) return std::nullopt;
    return stats::mean(finite) - stats::sample_std(finite);
}

GradeCorrelation grade_correlation(const std::map<std::string, double>& t_by_user,
                                   const std::map<std::string, double>& grades) {
    GradeCorrelation out;
    std::vector<double> log_t, grade;
    for (const auto& [user, t] : t_by_user) {
        auto it = grades.find(user);
        if (it == grades.end()) {
            ++out.n_excluded;
            continue;
        }
        if (!(t > 0.0) || !std::isfinite(it->second)) {
            ++out.n_excluded;
            continue;
        }
        log_t.push_back(std::log(t));
        grade.push_back(it->second);
    }
    out.n_pairs = log_t.size();
    if (out.n_pairs < 3) return out;
    out.rho = stats::pearson(log_t, grade);
    return out;
}

CompleterRatio completer_ratio(const std::map<std::string, double>& t_by_user,
                               const std::map<std::string, bool>& completed) {
    CompleterRatio out;
    double sum_completed = 0.0, sum_other = 0.0;
    for (const auto& [user, t] : t_by_user) {
        auto it = completed.find(user);
        if (it == completed.end() || !(t > 0.0)) continue;
        if (it->second) {
            sum_completed += std::log(t);
            ++out.n_completers;
        } else {
            sum_other += std::log(t);
            ++out.n_non_completers;
        }
    }
    if (out.n_completers == 0 || out.n_non_completers == 0) return out;
    out.log_gap = sum_completed / static_cast<double>(out.n_completers) -
                  sum_other / static_cast<double>(out.n_non_completers);
    out.ratio = std::exp(*out.log_gap);
    return out;
}

double cross_course_completer_ratio(std::span<const double> log_gaps) {
    return std::exp(stats::mean(log_gaps));
}

std::map<std::string, double> read_grades_file(const std::string& path, char delimiter) {
    const csv::Table table = csv::read_table_file(path, delimiter);
    const auto user_col = table.column("user_id");
    const auto grade_col = table.column("grade");
    if (!user_col || !grade_col)
        raise(ErrorCode::config, "grades file needs user_id and grade columns: " + path);
    std::map<std::string, double> out;
    for (const auto& row : table.rows) {
        if (row.size() <= std::max(*user_col, *grade_col)) continue;
        try {
            out[row[*user_col]] = std::stod(row[*grade_col]);
        } catch (...) {
            continue;  // unparseable grades are skipped
        }
    }
    return out;
}

std::map<std::string, bool> read_completion_file(const std::string& path, char delimiter) {
    const csv::Table table = csv::read_table_file(path, delimiter);
    const auto user_col = table.column("user_id");
    const auto flag_col = table.column("completed");
    if (!user_col || !flag_col)
        raise(ErrorCode::config, "completion file needs user_id and completed columns: " + path);
    std::map<std::string, bool> out;
    for (const auto& row : table.rows) {
        if (row.size() <= std::max(*user_col, *flag_col)) continue;
        std::string v = row[*flag_col];
        std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return std::tolower(c); });
        if (v == "1" || v == "true" || v == "yes") out[row[*user_col]] = true;
        else if (v == "0" || v == "false" || v == "no") out[row[*user_col]] = false;
    }
    return out;
}

threshold::CohortSpec read_cohort_file(const std::string& path, char delimiter) {
    const csv::Table table = csv::read_table_file(path, delimiter);
    const auto user_col = table.column("user_id");
    const auto label_col = table.column("label");
    if (!user_col || !label_col)
        raise(ErrorCode::config, "cohort file needs user_id and label columns: " + path);
    threshold::CohortSpec spec;
    for (const auto& row : table.rows) {
        if (row.size() <= std::max(*user_col, *label_col)) continue;
        spec.labels[row[*user_col]] = row[*label_col];
    }
    return spec;
}

CourseReport run_pipeline(const std::string& path, const PipelineConfig& cfg) {
    ingest::ParseOptions opts;
    opts.delimiter = cfg.delimiter;
    const auto parsed = ingest::parse_track_log_file(path, opts);
    return run_pipeline_events(parsed.events, cfg);
}

CourseReport run_pipeline_events(const std::vector<ClickEvent>& events, const PipelineConfig& cfg) {
    cfg.filter.validate();
    cfg.em.validate();

    CourseReport report;
    auto extract = ingest::extract_intervals(events, cfg.filter);
    report.n_users_input = extract.series.size() + extract.drops.size();
    report.drops = extract.drops;

    std::optional<FitsCache> cache;
    if (cfg.fits_cache_path) cache = load_fits_cache(*cfg.fits_cache_path);

    std::vector<const IntervalSeries*> series_list;
    series_list.reserve(extract.series.size());
    for (const auto& [_, series] : extract.series) series_list.push_back(&series);

    struct Slot {
        UserRow row;
        bool dropped = false;
        DropReason reason = DropReason::insufficient_data;
    };
    std::vector<Slot> slots(series_list.size());
    run_indexed(series_list.size(), cfg.jobs, [&](std::size_t i) {
        slots[i].row = build_user_row(*series_list[i], cfg, cache ? &*cache : nullptr,
                                      &slots[i].dropped, &slots[i].reason);
    });

    for (std::size_t i = 0; i < slots.size(); ++i) {
        if (slots[i].dropped) {
            report.drops.emplace_back(series_list[i]->user_id, slots[i].reason);
        } else {
            report.users.push_back(std::move(slots[i].row));
        }
    }
    std::sort(report.drops.begin(), report.drops.end());
    report.n_users_fit = report.users.size();
    report.n_users_dropped = report.drops.size();

    // aggregates over the pooled fits
    std::vector<double> gofs, ratios;
    std::vector<threshold::ThresholdSolution> solutions;
    std::map<std::string, double> t_by_user;
    for (const auto& row : report.users) {
        if (row.gof) gofs.push_back(*row.gof);
        if (row.estimate) ratios.push_back(row.estimate->on_task_ratio);
        if (row.solution) solutions.push_back(*row.solution);
        if (row.estimate) t_by_user[row.user_id] = row.estimate->t;
    }
    report.aggregate_gof = aggregate_gof(gofs);
    if (!ratios.empty()) report.mean_on_task_ratio = stats::mean(ratios);

    threshold::CohortSpec cohorts;
    if (cfg.cohort_path) cohorts = read_cohort_file(*cfg.cohort_path, cfg.delimiter);
    report.cohort_thresholds = threshold::aggregate_thresholds(solutions, cohorts);

    if (cfg.per_resource) {
        std::map<std::string, PerCategorySummary> summaries;
        std::map<std::string, std::vector<double>> cat_gofs;
        std::map<std::string, std::vector<threshold::ThresholdSolution>> cat_solutions;
        for (const auto& row : report.users) {
            for (const auto& cat : row.categories) {
                auto& summary = summaries[cat.category];
                summary.category = cat.category;
                ++summary.n_users_attempted;
                if (cat.fitted && cat.converged) {
                    ++summary.n_users_fit;
                    if (cat.gof) cat_gofs[cat.category].push_back(*cat.gof);
                    if (cat.solution) cat_solutions[cat.category].push_back(*cat.solution);
                } else {
                    ++summary.n_users_skipped;
                }
            }
        }
        for (auto& [name, summary] : summaries) {
            summary.aggregate_gof = aggregate_gof(cat_gofs[name]);
            summary.cohort_thresholds = threshold::aggregate_thresholds(cat_solutions[name], cohorts);
            report.per_resource.push_back(std::move(summary));
        }
    }

    if (cfg.grades_path) {
        const auto grades = read_grades_file(*cfg.grades_path, cfg.delimiter);
        const auto gc = grade_correlation(t_by_user, grades);
        report.grade_correlation = gc.rho;
        report.grade_pairs = gc.n_pairs;
        report.grade_excluded = gc.n_excluded;
    }
    if (cfg.completion_path) {
        const auto completion = read_completion_file(*cfg.completion_path, cfg.delimiter);
        const auto cr = completer_ratio(t_by_user, completion);
        report.completer_ratio = cr.ratio;
        report.completer_log_gap = cr.log_gap;
    }
    return report;
}

std::string render_users_csv(const CourseReport& report) {
    std::string out =
        "user_id,n_intervals,net_time_s,T_s,T_excluding_fast_s,ratio,M_on_s,K,gof,converged\n";
    for (const auto& row : report.users) {
        const auto& est = row.estimate;
        out += csv::format_field(row.user_id, ',');
        out += ',' + std::to_string(row.n_intervals);
        out += ',' + fixed6(row.net_time);
        out += ',' + (est ? fixed6(est->t) : std::string());
        out += ',' + (est ? opt_fixed6(est->t_excluding_fast) : std::string());
        out += ',' + (est ? fixed6(est->on_task_ratio) : std::string());
        out += ',' + (est ? fixed6(est->m_on) : std::string());
        out += ',' + std::to_string(row.k);
        out += ',' + opt_fixed6(row.gof);
        out += row.converged ? ",true\n" : ",false\n";
    }
    return out;
}

namespace {

ordered_json solution_json(const threshold::ThresholdSolution& s) {
    ordered_json j;
    j["case"] = threshold::to_string(s.kind);
    j["tau_s"] = opt_json(s.tau);
    j["f_left"] = s.f_left;
    j["f_right"] = s.f_right;
    if (s.shelf_bounds) j["shelf_bounds_s"] = {s.shelf_bounds->first, s.shelf_bounds->second};
    else j["shelf_bounds_s"] = nullptr;
    return j;
}

ordered_json user_json(const UserRow& row) {
    const auto& est = row.estimate;
    ordered_json j;
    j["user_id"] = row.user_id;
    j["n_intervals"] = row.n_intervals;
    j["net_time_s"] = row.net_time;
    j["T_s"] = est ? ordered_json(est->t) : ordered_json(nullptr);
    j["T_excluding_fast_s"] = est ? opt_json(est->t_excluding_fast) : ordered_json(nullptr);
    j["T_excluding_fast_unnormalized_s"] = opt_json(row.t_excluding_fast_unnormalized);
    j["ratio"] = est ? ordered_json(est->on_task_ratio) : ordered_json(nullptr);
    j["M_on_s"] = est ? ordered_json(est->m_on) : ordered_json(nullptr);
    j["K"] = row.k;
    j["K_effective"] = row.k_effective;
    j["gof"] = opt_json(row.gof);
    if (row.gof) j["gof_r2"] = (*row.gof) * (*row.gof);
    else j["gof_r2"] = nullptr;
    j["converged"] = row.converged;
    if (row.estimate_error) j["estimate_error"] = *row.estimate_error;
    if (row.fit) {
        j["bic"] = row.fit->bic;
        j["log_likelihood"] = row.fit->log_likelihood;
        j["iterations"] = row.fit->iterations;
        j["weights"] = row.fit->params.weights;
        j["mu"] = row.fit->params.means;
        j["sigma"] = row.fit->params.stds;
        j["m"] = row.fit->direct_means;
        j["lognormal_means"] = mixture::lognormal_theoretical_means(row.fit->params);
    }
    if (row.solution) j["threshold"] = solution_json(*row.solution);
    if (!row.categories.empty()) {
        ordered_json cats = ordered_json::array();
        for (const auto& cat : row.categories) {
            ordered_json c;
            c["category"] = cat.category;
            c["n_intervals"] = cat.n;
            c["fitted"] = cat.fitted;
            c["converged"] = cat.converged;
            c["gof"] = opt_json(cat.gof);
            c["T_s"] = opt_json(cat.t);
            if (cat.solution) c["threshold"] = solution_json(*cat.solution);
            if (!cat.skip_reason.empty()) c["skip_reason"] = cat.skip_reason;
            cats.push_back(std::move(c));
        }
        j["per_resource"] = std::move(cats);
    }
    return j;
}

ordered_json cohort_table_json(const std::map<std::string, threshold::CohortThreshold>& table) {
    ordered_json arr = ordered_json::array();
    for (const auto& [label, bucket] : table) {
        ordered_json j;
        j["cohort"] = label;
        j["mean_tau_s"] = opt_json(bucket.mean_tau);
        j["n_users"] = bucket.n_users;
        j["n_excluded"] = bucket.n_excluded;
        arr.push_back(std::move(j));
    }
    return arr;
}

}  // namespace

std::string render_users_json(const CourseReport& report) {
    ordered_json arr = ordered_json::array();
    for (const auto& row : report.users) arr.push_back(user_json(row));
    return arr.dump(2) + "\n";
}

std::string render_thresholds_csv(const CourseReport& report) {
    const bool with_category = !report.per_resource.empty();
    std::string out = with_category ? "cohort,category,mean_tau_seconds,n_users,n_excluded\n"
                                    : "cohort,mean_tau_seconds,n_users,n_excluded\n";
    const auto emit = [&](const std::string& cohort, const std::string& category,
                          const threshold::CohortThreshold& bucket) {
        out += csv::format_field(cohort, ',');
        if (with_category) out += ',' + csv::format_field(category, ',');
        out += ',' + (bucket.mean_tau ? fixed6(*bucket.mean_tau) : std::string());
        out += ',' + std::to_string(bucket.n_users);
        out += ',' + std::to_string(bucket.n_excluded);
        out += '\n';
    };
    for (const auto& [label, bucket] : report.cohort_thresholds) emit(label, "all", bucket);
    for (const auto& summary : report.per_resource)
        for (const auto& [label, bucket] : summary.cohort_thresholds)
            emit(label, summary.category, bucket);
    return out;
}

std::string render_thresholds_json(const CourseReport& report) {
    ordered_json j;
    j["cohorts"] = cohort_table_json(report.cohort_thresholds);
    if (!report.per_resource.empty()) {
        ordered_json arr = ordered_json::array();
        for (const auto& summary : report.per_resource) {
            ordered_json s;
            s["category"] = summary.category;
            s["cohorts"] = cohort_table_json(summary.cohort_thresholds);
            arr.push_back(std::move(s));
        }
        j["per_resource"] = std::move(arr);
    }
    return j.dump(2) + "\n";
}

std::string render_drops_csv(const CourseReport& report) {
    std::string out = "user_id,reason\n";
    for (const auto& [user, reason] : report.drops) {
        out += csv::format_field(user, ',');
        out += ',';
        out += to_string(reason);
        out += '\n';
    }
    return out;
}

std::string render_summary(const CourseReport& report) {
    std::string out;
    out += "users: " + std::to_string(report.n_users_input) + " in, " +
           std::to_string(report.n_users_fit) + " fit, " +
           std::to_string(report.n_users_dropped) + " dropped\n";
    std::map<std::string, std::size_t> reasons;
    for (const auto& [_, reason] : report.drops) ++reasons[to_string(reason)];
    for (const auto& [reason, count] : reasons)
        out += "  dropped " + reason + ": " + std::to_string(count) + "\n";
    if (report.aggregate_gof)
        out += "aggregate goodness-of-fit (mean - 1 sd): " + fixed6(*report.aggregate_gof) + "\n";
    if (report.mean_on_task_ratio)
        out += "mean on-task fraction of net time: " + fixed6(*report.mean_on_task_ratio) + "\n";
    for (const auto& [label, bucket] : report.cohort_thresholds) {
        out += "cohort " + label + ": mean tau = " +
               (bucket.mean_tau ? fixed6(*bucket.mean_tau) + " s" : std::string("n/a")) + " (" +
               std::to_string(bucket.n_users) + " users, " + std::to_string(bucket.n_excluded) +
               " excluded)\n";
    }
    for (const auto& summary : report.per_resource) {
        out += "resource " + summary.category + ": " + std::to_string(summary.n_users_fit) +
               " fits";
        if (summary.aggregate_gof) out += ", aggregate gof " + fixed6(*summary.aggregate_gof);
        out += "\n";
    }
    if (report.grade_correlation)
        out += "grade correlation (ln T vs grade): " + fixed6(*report.grade_correlation) + " (" +
               std::to_string(report.grade_pairs) + " pairs)\n";
    if (report.completer_ratio)
        out += "completer / non-completer time-on-task ratio: " + fixed6(*report.completer_ratio) + "\n";
    return out;
}

std::string render_report_json(const CourseReport& report) {
    ordered_json j;
    j["n_users_input"] = report.n_users_input;
    j["n_users_fit"] = report.n_users_fit;
    j["n_users_dropped"] = report.n_users_dropped;
    ordered_json drops = ordered_json::array();
    for (const auto& [user, reason] : report.drops) {
        ordered_json d;
        d["user_id"] = user;
        d["reason"] = to_string(reason);
        drops.push_back(std::move(d));
    }
    j["dropped_users"] = std::move(drops);
    j["aggregate_gof"] = opt_json(report.aggregate_gof);
    j["mean_on_task_ratio"] = opt_json(report.mean_on_task_ratio);
    j["thresholds"] = cohort_table_json(report.cohort_thresholds);
    if (!report.per_resource.empty()) {
        ordered_json arr = ordered_json::array();
        for (const auto& summary : report.per_resource) {
            ordered_json s;
            s["category"] = summary.category;
            s["n_users_attempted"] = summary.n_users_attempted;
            s["n_users_fit"] = summary.n_users_fit;
            s["n_users_skipped"] = summary.n_users_skipped;
            s["aggregate_gof"] = opt_json(summary.aggregate_gof);
            s["thresholds"] = cohort_table_json(summary.cohort_thresholds);
            arr.push_back(std::move(s));
        }
        j["per_resource"] = std::move(arr);
    } else {
        j["per_resource"] = nullptr;
    }
    j["grade_correlation"] = opt_json(report.grade_correlation);
    j["grade_pairs"] = report.grade_pairs;
    j["grade_excluded"] = report.grade_excluded;
    j["completer_ratio"] = opt_json(report.completer_ratio);
    j["completer_log_gap"] = opt_json(report.completer_log_gap);
    ordered_json users = ordered_json::array();
    for (const auto& row : report.users) users.push_back(user_json(row));
    j["users"] = std::move(users);
    return j.dump(2) + "\n";
}

std::string render_fits_json(const CourseReport& report) {
    ordered_json j;
    j["version"] = 1;
    ordered_json users = ordered_json::array();
    for (const auto& row : report.users) {
        if (!row.fit) continue;
        ordered_json entry = ordered_json::parse(mixture::fit_to_json(*row.fit, row.n_intervals));
        entry["user_id"] = row.user_id;
        entry["category"] = "all";
        users.push_back(std::move(entry));
    }
    j["users"] = std::move(users);
    return j.dump(2) + "\n";
}

}  // namespace ontask::report
