#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "ontask/events.hpp"

namespace ontask::synth {

struct GeneratorComponent {
    double weight = 0.0;
    double mu = 0.0;     // log-seconds
    double sigma = 1.0;  // log-seconds
    bool on_task = true;
};

struct ResourceLabelWeight {
    std::string label;
    double weight = 1.0;
};

struct GeneratorSpec {
    std::size_t n_users = 1;
    std::size_t intervals_min = 1;  // inclusive range; equal bounds mean a fixed count
    std::size_t intervals_max = 1;
    std::vector<GeneratorComponent> components;
    double start_time = 0.0;  // epoch seconds of each user's first click
    std::vector<ResourceLabelWeight> resource_labels;  // empty: no resource column
    std::uint64_t seed = 0;

    void validate() const;
    static GeneratorSpec from_json(const std::string& text);
};

struct IntervalTruth {
    std::size_t component = 0;
    bool on_task = true;
    double delta = 0.0;  // realized timestamp difference, seconds
};

struct UserTruth {
    std::string user_id;
    std::size_t n_intervals = 0;
    double expected_on_total = 0.0;    // n * E[delta | on-labeled components]
    double realized_on_sum = 0.0;      // sum of on-labeled realized intervals
    double realized_on_plus_credit = 0.0;  // adds E[delta | on] per off interval
    std::size_t n_on = 0;
    std::size_t n_off = 0;
    std::vector<IntervalTruth> intervals;
};

struct GeneratedCourse {
    std::vector<ClickEvent> events;
    std::vector<UserTruth> truth;
};

// Mean interval of the on-labeled part of the mixture,
// sum(w_k exp(mu_k + sigma_k^2/2)) / sum(w_k) over on components.
double expected_on_mean(const GeneratorSpec& spec);

// Draws per-user interval sequences from the mixture, with per-user seeds
// derived from spec.seed so output is reproducible and order-independent.
// Truth deltas are the realized timestamp differences, so re-ingesting the
// events reproduces them exactly.
GeneratedCourse generate(const GeneratorSpec& spec);

// Event writer emitting the same delimited format the ingest module reads;
// timestamps keep full precision.
void write_events_csv(std::ostream& out, const std::vector<ClickEvent>& events, bool with_resource);
void write_events_csv_file(const std::string& path, const GeneratedCourse& course,
                           const GeneratorSpec& spec);

void write_truth_users_csv(std::ostream& out, const std::vector<UserTruth>& truth);
void write_truth_users_csv_file(const std::string& path, const GeneratedCourse& course);

void write_truth_intervals_csv(std::ostream& out, const std::vector<UserTruth>& truth);
void write_truth_intervals_csv_file(const std::string& path, const GeneratedCourse& course);

}  // namespace ontask::synth
