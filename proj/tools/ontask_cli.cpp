// Command-line front end. Everything goes through the public C API in
// ontask.h; the only extra dependencies are the CLI and JSON headers.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "ontask.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;

int exit_code_for(ontask_status status) {
    switch (status) {
        case ONTASK_OK: return kExitOk;
        case ONTASK_ERROR_CONFIG: return kExitConfig;
        case ONTASK_ERROR_INVALID_ARGUMENT: return kExitConfig;
        case ONTASK_ERROR_IO: return kExitIo;
        default: return kExitFailure;
    }
}

[[noreturn]] void die(ontask_status status) {
    std::cerr << "error: " << ontask_last_error() << "\n";
    std::exit(exit_code_for(status));
}

void check(ontask_status status) {
    if (status != ONTASK_OK) die(status);
}

struct ConfigHandle {
    ontask_config* ptr = nullptr;
    ConfigHandle() : ptr(ontask_config_create()) {}
    ~ConfigHandle() { ontask_config_destroy(ptr); }
    ConfigHandle(const ConfigHandle&) = delete;
    ConfigHandle& operator=(const ConfigHandle&) = delete;
};

struct ReportHandle {
    ontask_report* ptr = nullptr;
    ~ReportHandle() { ontask_report_destroy(ptr); }
};

std::string render(const ontask_report* report, const char* what) {
    char* text = nullptr;
    check(ontask_report_render(report, what, &text));
    std::string out(text);
    ontask_string_free(text);
    return out;
}

void write_output(const std::string& text, const std::string& path) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        std::cerr << "error: cannot write output file: " << path << "\n";
        std::exit(kExitIo);
    }
    out << text;
}

struct CommonOptions {
    std::string input;
    std::string delimiter = ",";
    int min_clicks = 20;
    double min_interval = 0.1;
    double max_interval = 7200.0;
    long long seed = 0;
    int jobs = 0;
    std::string k_range = "3,4,5";
    std::string grades;
    std::string completion;
    std::string format = "csv";
    std::string out;
};

void add_common_flags(CLI::App* cmd, CommonOptions& opts, bool needs_input) {
    auto* input = cmd->add_option("--input", opts.input, "track log file (delimited text)");
    if (needs_input) input->required();
    cmd->add_option("--delimiter", opts.delimiter, "field delimiter (default ,)");
    cmd->add_option("--min-clicks", opts.min_clicks, "minimum raw clicks per user (default 20)");
    cmd->add_option("--min-interval", opts.min_interval, "shortest retained interval, seconds (default 0.1)");
    cmd->add_option("--max-interval", opts.max_interval, "longest retained interval, seconds (default 7200)");
    cmd->add_option("--seed", opts.seed, "global random seed (default 0)");
    cmd->add_option("--jobs", opts.jobs, "worker threads, 0 = all cores (default 0)");
    cmd->add_option("--k-range", opts.k_range, "candidate component counts (default 3,4,5)");
    cmd->add_option("--grades", opts.grades, "grades table (user_id,grade) to correlate");
    cmd->add_option("--completion", opts.completion, "completion table (user_id,completed)");
    cmd->add_option("--format", opts.format, "output format: csv or json (default csv)")
        ->check(CLI::IsMember({"csv", "json"}));
    cmd->add_option("--out", opts.out, "output file (default stdout)");
}

void apply_common(const ConfigHandle& cfg, const CommonOptions& opts) {
    if (opts.delimiter.size() != 1) {
        std::cerr << "error: --delimiter must be a single character\n";
        std::exit(kExitConfig);
    }
    check(ontask_config_set_string(cfg.ptr, "delimiter", opts.delimiter.c_str()));
    check(ontask_config_set_int(cfg.ptr, "min_clicks", opts.min_clicks));
    check(ontask_config_set_double(cfg.ptr, "min_interval", opts.min_interval));
    check(ontask_config_set_double(cfg.ptr, "max_interval", opts.max_interval));
    check(ontask_config_set_int(cfg.ptr, "seed", opts.seed));
    check(ontask_config_set_int(cfg.ptr, "jobs", opts.jobs));
    check(ontask_config_set_string(cfg.ptr, "k_range", opts.k_range.c_str()));
    if (!opts.grades.empty()) check(ontask_config_set_string(cfg.ptr, "grades", opts.grades.c_str()));
    if (!opts.completion.empty())
        check(ontask_config_set_string(cfg.ptr, "completion", opts.completion.c_str()));
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        std::cerr << "error: cannot open file: " << path << "\n";
        std::exit(kExitIo);
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"time-on-task estimation from clickstream timestamps"};
    app.require_subcommand(1);

    // simulate
    auto* simulate = app.add_subcommand("simulate", "generate a synthetic track log from a JSON spec");
    std::string sim_spec, sim_out, sim_truth, sim_truth_intervals;
    std::optional<long long> sim_seed;
    simulate->add_option("--spec", sim_spec, "generator spec JSON file")->required();
    simulate->add_option("--out", sim_out, "events output file")->required();
    simulate->add_option("--truth-out", sim_truth, "per-user ground-truth output file")->required();
    simulate->add_option("--truth-intervals-out", sim_truth_intervals,
                         "optional per-interval ground-truth output file");
    simulate->add_option("--seed", sim_seed, "override the seed in the spec");

    // estimate
    auto* estimate = app.add_subcommand("estimate", "per-user time-on-task table");
    CommonOptions est_opts;
    add_common_flags(estimate, est_opts, true);
    std::string est_dump_fits, est_drops_out;
    bool est_per_resource = false;
    estimate->add_option("--dump-fits", est_dump_fits, "write fitted mixtures as JSON for reuse");
    estimate->add_option("--drops-out", est_drops_out, "write the drop ledger (user_id,reason)");
    estimate->add_flag("--per-resource", est_per_resource, "also fit per resource category");

    // threshold
    auto* threshold = app.add_subcommand("threshold", "effective on-task thresholds per cohort");
    CommonOptions thr_opts;
    add_common_flags(threshold, thr_opts, true);
    std::string thr_cohorts, thr_fits;
    bool thr_per_resource = false;
    threshold->add_option("--cohort-file", thr_cohorts, "cohort table (user_id,label)");
    threshold->add_option("--fits", thr_fits, "reuse cached fits instead of refitting");
    threshold->add_flag("--per-resource", thr_per_resource, "solve per resource category too");

    // report
    auto* report = app.add_subcommand("report", "full course report as JSON plus a text summary");
    CommonOptions rep_opts;
    rep_opts.format = "json";
    add_common_flags(report, rep_opts, true);
    std::string rep_cohorts;
    bool rep_per_resource = false;
    report->add_option("--cohort-file", rep_cohorts, "cohort table (user_id,label)");
    report->add_flag("--per-resource", rep_per_resource, "also fit per resource category");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    if (simulate->parsed()) {
        std::string spec_text = read_file(sim_spec);
        if (sim_seed) {
            nlohmann::json spec_json;
            try {
                spec_json = nlohmann::json::parse(spec_text);
            } catch (const nlohmann::json::exception& e) {
                std::cerr << "error: invalid spec JSON: " << e.what() << "\n";
                return kExitConfig;
            }
            spec_json["seed"] = *sim_seed;
            spec_text = spec_json.dump();
        }
        check(ontask_simulate(spec_text.c_str(), sim_out.c_str(), sim_truth.c_str(),
                              sim_truth_intervals.empty() ? nullptr : sim_truth_intervals.c_str()));
        return kExitOk;
    }

    if (estimate->parsed()) {
        ConfigHandle cfg;
        apply_common(cfg, est_opts);
        if (est_per_resource) check(ontask_config_set_int(cfg.ptr, "per_resource", 1));
        ReportHandle rep;
        check(ontask_run_pipeline(cfg.ptr, est_opts.input.c_str(), &rep.ptr));
        write_output(render(rep.ptr, est_opts.format == "json" ? "users_json" : "users_csv"),
                     est_opts.out);
        if (!est_dump_fits.empty()) write_output(render(rep.ptr, "fits_json"), est_dump_fits);
        if (!est_drops_out.empty()) write_output(render(rep.ptr, "drops_csv"), est_drops_out);
        std::cerr << render(rep.ptr, "summary");
        return kExitOk;
    }

    if (threshold->parsed()) {
        ConfigHandle cfg;
        apply_common(cfg, thr_opts);
        if (thr_per_resource) check(ontask_config_set_int(cfg.ptr, "per_resource", 1));
        if (!thr_cohorts.empty()) check(ontask_config_set_string(cfg.ptr, "cohorts", thr_cohorts.c_str()));
        if (!thr_fits.empty()) check(ontask_config_set_string(cfg.ptr, "fits_cache", thr_fits.c_str()));
        ReportHandle rep;
        check(ontask_run_pipeline(cfg.ptr, thr_opts.input.c_str(), &rep.ptr));
        write_output(render(rep.ptr, thr_opts.format == "json" ? "thresholds_json" : "thresholds_csv"),
                     thr_opts.out);
        std::cerr << render(rep.ptr, "summary");
        return kExitOk;
    }

    if (report->parsed()) {
        ConfigHandle cfg;
        apply_common(cfg, rep_opts);
        if (rep_per_resource) check(ontask_config_set_int(cfg.ptr, "per_resource", 1));
        if (!rep_cohorts.empty()) check(ontask_config_set_string(cfg.ptr, "cohorts", rep_cohorts.c_str()));
        ReportHandle rep;
        check(ontask_run_pipeline(cfg.ptr, rep_opts.input.c_str(), &rep.ptr));
        write_output(render(rep.ptr, "json"), rep_opts.out);
        std::cerr << render(rep.ptr, "summary");
        return kExitOk;
    }

    return kExitConfig;
}
