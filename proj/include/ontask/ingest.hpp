#pragma once

#include <istream>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ontask/events.hpp"

namespace ontask::ingest {

struct ParseOptions {
    char delimiter = ',';
};

struct ParseResult {
    std::vector<ClickEvent> events;       // input order
    std::size_t malformed_rows = 0;       // counted, not fatal
};

// Reads a delimited track log with a header row. Required columns: user_id and
// timestamp; resource_type is optional. Timestamps may be numeric epoch seconds
// or ISO-8601 date-times, auto-detected per value; files may mix both.
ParseResult parse_track_log(std::istream& in, const ParseOptions& opts = {});
ParseResult parse_track_log_file(const std::string& path, const ParseOptions& opts = {});

// Epoch seconds for one timestamp token, or empty if it is neither a valid
// non-negative number nor a valid ISO-8601 date-time.
std::optional<double> parse_timestamp(std::string_view token);

ResourceCategory categorize_interval(const ClickEvent& a, const ClickEvent& b);

struct ExtractResult {
    std::map<std::string, IntervalSeries> series;
    std::vector<std::pair<std::string, DropReason>> drops;  // user_id -> reason
};

// Groups events per user, sorts by timestamp, forms consecutive differences,
// and filters them to [min_interval, max_interval]. Users with fewer than
// min_clicks raw clicks, or with no surviving interval, land in the drop
// ledger instead.
ExtractResult extract_intervals(const std::vector<ClickEvent>& events, const FilterConfig& cfg);

}  // namespace ontask::ingest
