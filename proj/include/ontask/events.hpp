#pragma once

#include <cstddef>
#include <string>
#include <tuple>
#include <vector>

#include "ontask/error.hpp"

namespace ontask {

// One user action from a track log. An empty resource_type means the log did
// not carry one.
struct ClickEvent {
    std::string user_id;
    double timestamp = 0.0;  // seconds since epoch, UTC
    std::string resource_type;
};

// Content category of an inter-click interval: the shared resource label, a
// canonical unordered pair when the bounding clicks differ, or unknown.
class ResourceCategory {
public:
    enum class Kind { unknown, single, mixed };

    ResourceCategory() = default;

    static ResourceCategory unknown() { return {}; }

    static ResourceCategory single(std::string label) {
        ResourceCategory c;
        c.kind_ = Kind::single;
        c.first_ = std::move(label);
        return c;
    }

    static ResourceCategory mixed(std::string a, std::string b) {
        ResourceCategory c;
        c.kind_ = Kind::mixed;
        if (b < a) std::swap(a, b);
        c.first_ = std::move(a);
        c.second_ = std::move(b);
        return c;
    }

    Kind kind() const { return kind_; }
    const std::string& first() const { return first_; }
    const std::string& second() const { return second_; }

    std::string to_string() const {
        switch (kind_) {
            case Kind::unknown: return "unknown";
            case Kind::single: return first_;
            case Kind::mixed: return first_ + "/" + second_;
        }
        return "unknown";
    }

    friend bool operator==(const ResourceCategory& a, const ResourceCategory& b) {
        return std::tie(a.kind_, a.first_, a.second_) == std::tie(b.kind_, b.first_, b.second_);
    }
    friend bool operator<(const ResourceCategory& a, const ResourceCategory& b) {
        return std::tie(a.kind_, a.first_, a.second_) < std::tie(b.kind_, b.first_, b.second_);
    }

private:
    Kind kind_ = Kind::unknown;
    std::string first_;
    std::string second_;
};

struct FilterConfig {
    int min_clicks = 20;
    double min_interval = 0.1;     // seconds
    double max_interval = 7200.0;  // seconds

    void validate() const {
        if (min_clicks < 2) raise(ErrorCode::config, "min_clicks must be >= 2");
        if (!(min_interval > 0.0) || !(min_interval < max_interval))
            raise(ErrorCode::config, "interval bounds must satisfy 0 < min_interval < max_interval");
    }
};

// One user's filtered, ordered inter-click intervals with parallel categories.
struct IntervalSeries {
    std::string user_id;
    std::vector<double> deltas;  // seconds, each within [min_interval, max_interval]
    std::vector<ResourceCategory> categories;
    double net_time = 0.0;  // sum of deltas

    std::size_t n() const { return deltas.size(); }
};

enum class DropReason {
    too_few_clicks,
    no_intervals_in_range,
    insufficient_data,
    no_convergence,
};

inline const char* to_string(DropReason r) {
    switch (r) {
        case DropReason::too_few_clicks: return "too_few_clicks";
        case DropReason::no_intervals_in_range: return "no_intervals_in_range";
        case DropReason::insufficient_data: return "insufficient_data";
        case DropReason::no_convergence: return "no_convergence";
    }
    return "unknown";
}

}  // namespace ontask
