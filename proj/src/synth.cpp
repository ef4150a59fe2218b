#include "ontask/synth.hpp"

#include <charconv>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "ontask/rng.hpp"

namespace ontask::synth {

namespace {

std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);  // shortest round-trip
    return std::string(buf, res.ptr);
}

std::string user_name(std::size_t index, int width) {
    std::string digits = std::to_string(index + 1);
    std::string out = "u";
    out.append(static_cast<std::size_t>(width) > digits.size() ? width - digits.size() : 0, '0');
    out += digits;
    return out;
}

}  // namespace

void GeneratorSpec::validate() const {
    if (n_users == 0) raise(ErrorCode::config, "generator: n_users must be >= 1");
    if (intervals_min == 0 || intervals_min > intervals_max)
        raise(ErrorCode::config, "generator: intervals_per_user range is invalid");
    if (components.empty()) raise(ErrorCode::config, "generator: at least one component required");
    double total = 0.0;
    for (const auto& c : components) {
        if (!(c.weight >= 0.0)) raise(ErrorCode::config, "generator: component weights must be >= 0");
        if (!(c.sigma > 0.0)) raise(ErrorCode::config, "generator: component sigma must be > 0");
        total += c.weight;
    }
    if (std::abs(total - 1.0) > 1e-9)
        raise(ErrorCode::config, "generator: component weights must sum to 1");
    if (!(start_time >= 0.0) || !std::isfinite(start_time))
        raise(ErrorCode::config, "generator: start_time must be finite and non-negative");
    for (const auto& r : resource_labels) {
        if (r.label.empty()) raise(ErrorCode::config, "generator: resource labels must be non-empty");
        if (!(r.weight > 0.0)) raise(ErrorCode::config, "generator: resource weights must be > 0");
    }
}

GeneratorSpec GeneratorSpec::from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        raise(ErrorCode::config, std::string("invalid generator spec JSON: ") + e.what());
    }

    GeneratorSpec spec;
    try {
        spec.n_users = j.at("n_users").get<std::size_t>();
        const auto& per_user = j.at("intervals_per_user");
        if (per_user.is_number()) {
            spec.intervals_min = spec.intervals_max = per_user.get<std::size_t>();
        } else if (per_user.is_array() && per_user.size() == 2) {
            spec.intervals_min = per_user[0].get<std::size_t>();
            spec.intervals_max = per_user[1].get<std::size_t>();
        } else if (per_user.is_object()) {
            spec.intervals_min = per_user.at("min").get<std::size_t>();
            spec.intervals_max = per_user.at("max").get<std::size_t>();
        } else {
            raise(ErrorCode::config, "generator: intervals_per_user must be a count, [min,max], or {min,max}");
        }
        for (const auto& c : j.at("components")) {
            GeneratorComponent comp;
            comp.weight = c.at("weight").get<double>();
            comp.mu = c.at("mu").get<double>();
            comp.sigma = c.at("sigma").get<double>();
            const std::string label = c.at("label").get<std::string>();
            if (label == "on") comp.on_task = true;
            else if (label == "off") comp.on_task = false;
            else raise(ErrorCode::config, "generator: component label must be \"on\" or \"off\"");
            spec.components.push_back(comp);
        }
        if (j.contains("start_time")) spec.start_time = j.at("start_time").get<double>();
        if (j.contains("seed")) spec.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("resource_labels")) {
            for (const auto& r : j.at("resource_labels")) {
                ResourceLabelWeight w;
                w.label = r.at("label").get<std::string>();
                if (r.contains("weight")) w.weight = r.at("weight").get<double>();
                spec.resource_labels.push_back(w);
            }
        }
    } catch (const nlohmann::json::exception& e) {
        raise(ErrorCode::config, std::string("invalid generator spec JSON: ") + e.what());
    }
    spec.validate();
    return spec;
}

double expected_on_mean(const GeneratorSpec& spec) {
    double weight = 0.0, weighted = 0.0;
    for (const auto& c : spec.components) {
        if (!c.on_task) continue;
        weight += c.weight;
        weighted += c.weight * std::exp(c.mu + 0.5 * c.sigma * c.sigma);
    }
    return weight > 0.0 ? weighted / weight : 0.0;
}

GeneratedCourse generate(const GeneratorSpec& spec) {
    spec.validate();
    GeneratedCourse course;
    const int width = static_cast<int>(std::to_string(spec.n_users).size());
    const double e_on = expected_on_mean(spec);

    std::vector<double> cumulative_weights;
    {
        double acc = 0.0;
        for (const auto& c : spec.components) {
            acc += c.weight;
            cumulative_weights.push_back(acc);
        }
        cumulative_weights.back() = 1.0;
    }
    std::vector<double> cumulative_resources;
    if (!spec.resource_labels.empty()) {
        double total = 0.0;
        for (const auto& r : spec.resource_labels) total += r.weight;
        double acc = 0.0;
        for (const auto& r : spec.resource_labels) {
            acc += r.weight / total;
            cumulative_resources.push_back(acc);
        }
        cumulative_resources.back() = 1.0;
    }

    for (std::size_t u = 0; u < spec.n_users; ++u) {
        Rng rng(SplitMix64::hash(spec.seed, u + 1));
        UserTruth truth;
        truth.user_id = user_name(u, width);

        const std::size_t n = (spec.intervals_min == spec.intervals_max)
                                  ? spec.intervals_min
                                  : rng.uniform_int(spec.intervals_min, spec.intervals_max);
        truth.n_intervals = n;

        const auto sample_resource = [&]() -> std::string {
            if (cumulative_resources.empty()) return {};
            const double ud = rng.uniform();
            for (std::size_t i = 0; i < cumulative_resources.size(); ++i)
                if (ud < cumulative_resources[i]) return spec.resource_labels[i].label;
            return spec.resource_labels.back().label;
        };

        double t = spec.start_time;
        course.events.push_back({truth.user_id, t, sample_resource()});
        for (std::size_t i = 0; i < n; ++i) {
            const double ud = rng.uniform();
            std::size_t k = 0;
            while (k + 1 < cumulative_weights.size() && ud >= cumulative_weights[k]) ++k;
            const auto& comp = spec.components[k];

            const double raw = std::exp(rng.normal(comp.mu, comp.sigma));
            const double t_next = t + raw;
            const double delta = t_next - t;  // realized difference survives re-ingestion exactly
            t = t_next;
            course.events.push_back({truth.user_id, t, sample_resource()});

            truth.intervals.push_back({k, comp.on_task, delta});
            if (comp.on_task) {
                ++truth.n_on;
                truth.realized_on_sum += delta;
            } else {
                ++truth.n_off;
            }
        }
        truth.expected_on_total = static_cast<double>(n) * e_on;
        truth.realized_on_plus_credit =
            truth.realized_on_sum + static_cast<double>(truth.n_off) * e_on;
        course.truth.push_back(std::move(truth));
    }
    return course;
}

void write_events_csv(std::ostream& out, const std::vector<ClickEvent>& events, bool with_resource) {
    out << (with_resource ? "user_id,timestamp,resource_type\n" : "user_id,timestamp\n");
    for (const auto& e : events) {
        out << e.user_id << ',' << format_double(e.timestamp);
        if (with_resource) out << ',' << e.resource_type;
        out << '\n';
    }
}

void write_events_csv_file(const std::string& path, const GeneratedCourse& course,
                           const GeneratorSpec& spec) {
    std::ofstream out(path, std::ios::binary);
    if (!out) raise(ErrorCode::io, "cannot write events file: " + path);
    write_events_csv(out, course.events, !spec.resource_labels.empty());
    if (!out) raise(ErrorCode::io, "failed while writing events file: " + path);
}

void write_truth_users_csv(std::ostream& out, const std::vector<UserTruth>& truth) {
    out << "user_id,n_intervals,expected_on_total_s,realized_on_sum_s,"
           "realized_on_plus_credit_s,n_on,n_off\n";
    for (const auto& t : truth) {
        out << t.user_id << ',' << t.n_intervals << ',' << format_double(t.expected_on_total)
            << ',' << format_double(t.realized_on_sum) << ','
            << format_double(t.realized_on_plus_credit) << ',' << t.n_on << ',' << t.n_off << '\n';
    }
}

void write_truth_users_csv_file(const std::string& path, const GeneratedCourse& course) {
    std::ofstream out(path, std::ios::binary);
    if (!out) raise(ErrorCode::io, "cannot write truth file: " + path);
    write_truth_users_csv(out, course.truth);
    if (!out) raise(ErrorCode::io, "failed while writing truth file: " + path);
}

void write_truth_intervals_csv(std::ostream& out, const std::vector<UserTruth>& truth) {
    out << "user_id,index,component,label,delta_s\n";
    for (const auto& t : truth) {
        for (std::size_t i = 0; i < t.intervals.size(); ++i) {
            const auto& iv = t.intervals[i];
            out << t.user_id << ',' << i << ',' << (iv.component + 1) << ','
                << (iv.on_task ? "on" : "off") << ',' << format_double(iv.delta) << '\n';
        }
    }
}

void write_truth_intervals_csv_file(const std::string& path, const GeneratedCourse& course) {
    std::ofstream out(path, std::ios::binary);
    if (!out) raise(ErrorCode::io, "cannot write truth intervals file: " + path);
    write_truth_intervals_csv(out, course.truth);
    if (!out) raise(ErrorCode::io, "failed while writing truth intervals file: " + path);
}

}  // namespace ontask::synth
