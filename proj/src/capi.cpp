#include "ontask.h"

#include <cstring>
#include <memory>
#include <new>
#include <string>

#include "ontask/report.hpp"
#include "ontask/synth.hpp"

namespace {

thread_local std::string g_last_error;

ontask_status fail(ontask_status code, std::string message) {
    g_last_error = std::move(message);
    return code;
}

template <typename Fn>
ontask_status guarded(Fn&& fn) {
    try {
        return fn();
    } catch (const ontask::Error& e) {
        return fail(static_cast<ontask_status>(static_cast<int>(e.code())), e.what());
    } catch (const std::bad_alloc&) {
        return fail(ONTASK_ERROR_INTERNAL, "out of memory");
    } catch (const std::exception& e) {
        return fail(ONTASK_ERROR_INTERNAL, e.what());
    } catch (...) {
        return fail(ONTASK_ERROR_INTERNAL, "unknown error");
    }
}

char* copy_string(const std::string& s) {
    char* out = new char[s.size() + 1];
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

}  // namespace

struct ontask_config {
    ontask::report::PipelineConfig pipeline;
};

struct ontask_fit {
    ontask::mixture::MixtureFit fit;
    std::size_t n = 0;
};

struct ontask_report {
    ontask::report::CourseReport report;
};

extern "C" {

const char* ontask_version(void) { return "1.0.0"; }

const char* ontask_last_error(void) { return g_last_error.c_str(); }

void ontask_string_free(char* s) { delete[] s; }

ontask_config* ontask_config_create(void) { return new (std::nothrow) ontask_config(); }

void ontask_config_destroy(ontask_config* cfg) { delete cfg; }

ontask_status ontask_config_set_int(ontask_config* cfg, const char* key, long long value) {
    if (!cfg || !key) return fail(ONTASK_ERROR_INVALID_ARGUMENT, "null config or key");
    return guarded([&]() -> ontask_status {
        const std::string name(key);
        auto& p = cfg->pipeline;
        if (name == "min_clicks") p.filter.min_clicks = static_cast<int>(value);
        else if (name == "seed") p.em.seed = static_cast<std::uint64_t>(value);
        else if (name == "jobs") p.jobs = static_cast<int>(value);
        else if (name == "max_iterations") p.em.max_iterations = static_cast<int>(value);
        else if (name == "restarts") p.em.restarts = static_cast<int>(value);
        else if (name == "min_points") p.em.min_points = static_cast<int>(value);
        else if (name == "per_resource") p.per_resource = value != 0;
        else return fail(ONTASK_ERROR_INVALID_ARGUMENT, "unknown integer config key: " + name);
        return ONTASK_OK;
    });
}

ontask_status ontask_config_set_double(ontask_config* cfg, const char* key, double value) {
    if (!cfg || !key) return fail(ONTASK_ERROR_INVALID_ARGUMENT, "null config or key");
    return guarded([&]() -> ontask_status {
        const std::string name(key);
        auto& p = cfg->pipeline;
        if (name == "min_interval") p.filter.min_interval = value;
        else if (name == "max_interval") p.filter.max_interval = value;
        else if (name == "rel_tolerance") p.em.rel_tolerance = value;
        else if (name == "sigma_floor") p.em.sigma_floor = value;
        else return fail(ONTASK_ERROR_INVALID_ARGUMENT, "unknown double config key: " + name);
        return ONTASK_OK;
    });
}

ontask_status ontask_config_set_string(ontask_config* cfg, const char* key, const char* value) {
    if (!cfg || !key || !value) return fail(ONTASK_ERROR_INVALID_ARGUMENT, "null config, key, or value");
    return guarded([&]() -> ontask_status {
        const std::string name(key);
        const std::string v(value);
        auto& p = cfg->pipeline;
        if (name == "delimiter") {
            if (v.size() != 1) return fail(ONTASK_ERROR_CONFIG, "delimiter must be one character");
            p.delimiter = v[0];
        } else if (name == "k_range") {
            std::vector<int> ks;
            std::size_t pos = 0;
            while (pos < v.size()) {
                std::size_t comma = v.find(',', pos);
                if (comma == std::string::npos) comma = v.size();
                try {
                    ks.push_back(std::stoi(v.substr(pos, comma - pos)));
                } catch (...) {
                    return fail(ONTASK_ERROR_CONFIG, "k_range must be a comma-separated integer list");
                }
                pos = comma + 1;
            }
            if (ks.empty()) return fail(ONTASK_ERROR_CONFIG, "k_range must not be empty");
            p.em.k_range = std::move(ks);
        } else if (name == "grades") {
            p.grades_path = v;
        } else if (name == "completion") {
            p.completion_path = v;
        } else if (name == "cohorts") {
            p.cohort_path = v;
        } else if (name == "fits_cache") {
            p.fits_cache_path = v;
        } else {
            return fail(ONTASK_ERROR_INVALID_ARGUMENT, "unknown string config key: " + name);
        }
        return ONTASK_OK;
    });
}

ontask_status ontask_run_pipeline(const ontask_config* cfg, const char* input_path,
                                  ontask_report** out) {
    if (!input_path || !out) return fail(ONTASK_ERROR_INVALID_ARGUMENT, "null input path or output");
    return guarded([&]() -> ontask_status {
        ontask::report::PipelineConfig pipeline = cfg ? cfg->pipeline : ontask::report::PipelineConfig{};
        auto report = std::make_unique<ontask_report>();
        report->report = ontask::report::run_pipeline(input_path, pipeline);
        *out = report.release();
        return ONTASK_OK;
    });
}

void ontask_report_destroy(ontask_report* report) { delete report; }

ontask_status ontask_report_counts(const ontask_report* report, long long* n_input,
                                   long long* n_fit, long long* n_dropped) {
    if (!report) return fail(ONTASK_ERROR_INVALID_ARGUMENT, "null report");
    if (n_input) *n_input = static_cast<long long>(report->report.n_users_input);
    if (n_fit) *n_fit = static_cast<long long>(report->report.n_users_fit);
    if (n_dropped) *n_dropped = static_cast<long long>(report->report.n_users_dropped);
    return ONTASK_OK;
}

ontask_status ontask_report_aggregate(const ontask_report* report, const char* name,
                                      double* value, int* present) {
    if (!report || !name || !value || !present)
        return fail(ONTASK_ERROR_INVALID_ARGUMENT, "null argument");
    const std::string key(name);
    std::optional<double> v;
    if (key == "aggregate_gof") v = report->report.aggregate_gof;
    else if (key == "mean_on_task_ratio") v = report->report.mean_on_task_ratio;
    else if (key == "grade_correlation") v = report->report.grade_correlation;
    else if (key == "completer_ratio") v = report->report.completer_ratio;
    else if (key == "completer_log_gap") v = report->report.completer_log_gap;
    else return fail(ONTASK_ERROR_INVALID_ARGUMENT, "unknown aggregate: " + key);
    *present = v.has_value() ? 1 : 0;
    if (v) *value = *v;
    return ONTASK_OK;
}

ontask_status ontask_report_render(const ontask_report* report, const char* what, char** out) {
    if (!report || !what || !out) return fail(ONTASK_ERROR_INVALID_ARGUMENT, "null argument");
    return guarded([&]() -> ontask_status {
        const std::string which(what);
        const auto& r = report->report;
        std::string text;
        if (which == "users_csv") text = ontask::report::render_users_csv(r);
        else if (which == "users_json") text = ontask::report::render_users_json(r);
        else if (which == "thresholds_csv") text = ontask::report::render_thresholds_csv(r);
        else if (which == "thresholds_json") text = ontask::report::render_thresholds_json(r);
        else if (which == "drops_csv") text = ontask::report::render_drops_csv(r);
        else if (which == "summary") text = ontask::report::render_summary(r);
        else if (which == "json") text = ontask::report::render_report_json(r);
        else if (which == "fits_json") text = ontask::report::render_fits_json(r);
        else return fail(ONTASK_ERROR_INVALID_ARGUMENT, "unknown render target: " + which);
        *out = copy_string(text);
        return ONTASK_OK;
    });
}

ontask_status ontask_simulate(const char* spec_json, const char* events_path,
                              const char* truth_users_path, const char* truth_intervals_path) {
    if (!spec_json || !events_path || !truth_users_path)
        return fail(ONTASK_ERROR_INVALID_ARGUMENT, "null spec or output path");
    return guarded([&]() -> ontask_status {
        const auto spec = ontask::synth::GeneratorSpec::from_json(spec_json);
        const auto course = ontask::synth::generate(spec);
        ontask::synth::write_events_csv_file(events_path, course, spec);
        ontask::synth::write_truth_users_csv_file(truth_users_path, course);
        if (truth_intervals_path)
            ontask::synth::write_truth_intervals_csv_file(truth_intervals_path, course);
        return ONTASK_OK;
    });
}

ontask_status ontask_fit_intervals(const double* deltas, size_t n, const ontask_config* cfg,
                                   ontask_fit** out) {
    if (!deltas || !out) return fail(ONTASK_ERROR_INVALID_ARGUMENT, "null intervals or output");
    return guarded([&]() -> ontask_status {
        const ontask::mixture::EmConfig em = cfg ? cfg->pipeline.em : ontask::mixture::EmConfig{};
        const std::span<const double> d(deltas, n);
        for (double v : d)
            if (!(v > 0.0))
                return fail(ONTASK_ERROR_INVALID_ARGUMENT, "intervals must be positive");
        const std::vector<double> x = ontask::mixture::log_transform(d);
        auto fit = std::make_unique<ontask_fit>();
        fit->n = n;
        fit->fit = ontask::mixture::select_model(x, d, em);
        if (fit->fit.converged) {
            ontask::mixture::order_components(fit->fit);
            fit->fit.gof = ontask::mixture::goodness_of_fit(x, fit->fit);
        }
        *out = fit.release();
        return ONTASK_OK;
    });
}

void ontask_fit_destroy(ontask_fit* fit) { delete fit; }

ontask_status ontask_fit_component_count(const ontask_fit* fit, int* k) {
    if (!fit || !k) return fail(ONTASK_ERROR_INVALID_ARGUMENT, "null argument");
    *k = fit->fit.params.k();
    return ONTASK_OK;
}

ontask_status ontask_fit_components(const ontask_fit* fit, double* weights, double* means_log,
                                    double* stds_log, double* means_direct) {
    if (!fit) return fail(ONTASK_ERROR_INVALID_ARGUMENT, "null fit");
    const int k = fit->fit.params.k();
    for (int j = 0; j < k; ++j) {
        if (weights) weights[j] = fit->fit.params.weights[j];
        if (means_log) means_log[j] = fit->fit.params.means[j];
        if (stds_log) stds_log[j] = fit->fit.params.stds[j];
        if (means_direct) means_direct[j] = fit->fit.direct_means[j];
    }
    return ONTASK_OK;
}

ontask_status ontask_fit_scalar(const ontask_fit* fit, const char* name, double* value,
                                int* present) {
    if (!fit || !name || !value || !present)
        return fail(ONTASK_ERROR_INVALID_ARGUMENT, "null argument");
    return guarded([&]() -> ontask_status {
        const std::string key(name);
        *present = 1;
        if (key == "bic") *value = fit->fit.bic;
        else if (key == "log_likelihood") *value = fit->fit.log_likelihood;
        else if (key == "converged") *value = fit->fit.converged ? 1.0 : 0.0;
        else if (key == "iterations") *value = fit->fit.iterations;
        else if (key == "n") *value = static_cast<double>(fit->n);
        else if (key == "k_effective") *value = ontask::mixture::effective_component_count(fit->fit);
        else if (key == "gof") {
            if (fit->fit.gof) *value = *fit->fit.gof;
            else *present = 0;
        } else {
            return fail(ONTASK_ERROR_INVALID_ARGUMENT, "unknown fit scalar: " + key);
        }
        return ONTASK_OK;
    });
}

ontask_status ontask_fit_time_on_task(const ontask_fit* fit, double* t, double* m_on) {
    if (!fit) return fail(ONTASK_ERROR_INVALID_ARGUMENT, "null fit");
    if (!fit->fit.converged)
        return fail(ONTASK_ERROR_NO_CONVERGENCE, "fit did not converge; estimates are undefined");
    return guarded([&]() -> ontask_status {
        const auto split = ontask::estimate::time_on_task(fit->fit, fit->n);
        if (t) *t = split.t;
        if (m_on) *m_on = split.m_on;
        return ONTASK_OK;
    });
}

ontask_status ontask_fit_time_on_task_excluding_fast(const ontask_fit* fit, double* t) {
    if (!fit) return fail(ONTASK_ERROR_INVALID_ARGUMENT, "null fit");
    if (!fit->fit.converged)
        return fail(ONTASK_ERROR_NO_CONVERGENCE, "fit did not converge; estimates are undefined");
    return guarded([&]() -> ontask_status {
        const auto ex = ontask::estimate::time_on_task_excluding_fast(fit->fit, fit->n);
        if (t) *t = ex.t;
        return ONTASK_OK;
    });
}

ontask_status ontask_fit_to_json(const ontask_fit* fit, char** out) {
    if (!fit || !out) return fail(ONTASK_ERROR_INVALID_ARGUMENT, "null argument");
    return guarded([&]() -> ontask_status {
        *out = copy_string(ontask::mixture::fit_to_json(fit->fit, fit->n));
        return ONTASK_OK;
    });
}

ontask_status ontask_thresholded_estimate(const double* deltas, size_t n, double tau,
                                          double* t_prime, int* below_support) {
    if (!deltas || !t_prime || !below_support)
        return fail(ONTASK_ERROR_INVALID_ARGUMENT, "null argument");
    return guarded([&]() -> ontask_status {
        const auto value = ontask::threshold::thresholded_estimate({deltas, n}, tau);
        *below_support = value.has_value() ? 0 : 1;
        if (value) *t_prime = *value;
        return ONTASK_OK;
    });
}

ontask_status ontask_effective_threshold(const double* deltas, size_t n, double t,
                                         ontask_threshold_result* out) {
    if (!deltas || !out) return fail(ONTASK_ERROR_INVALID_ARGUMENT, "null argument");
    return guarded([&]() -> ontask_status {
        const auto solution = ontask::threshold::effective_threshold({deltas, n}, t);
        out->solution_case = static_cast<int>(solution.kind);
        out->tau = solution.tau.value_or(0.0);
        out->f_left = solution.f_left;
        out->f_right = solution.f_right;
        out->shelf_lo = solution.shelf_bounds ? solution.shelf_bounds->first : 0.0;
        out->shelf_hi = solution.shelf_bounds ? solution.shelf_bounds->second : 0.0;
        return ONTASK_OK;
    });
}

}  // extern "C"
