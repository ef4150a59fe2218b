#include "ontask/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <unordered_map>

#include "ontask/csv.hpp"

namespace ontask::ingest {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

// Days from 1970-01-01 in the proleptic Gregorian calendar
// (Howard Hinnant's days_from_civil).
std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

bool is_leap(std::int64_t y) {
    return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
}

unsigned days_in_month(std::int64_t y, unsigned m) {
    static constexpr unsigned lengths[12] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (m == 2 && is_leap(y)) return 29;
    return lengths[m - 1];
}

bool read_digits(std::string_view s, std::size_t& pos, int count, long& out) {
    long v = 0;
    for (int i = 0; i < count; ++i) {
        if (pos >= s.size() || s[pos] < '0' || s[pos] > '9') return false;
        v = v * 10 + (s[pos] - '0');
        ++pos;
    }
    out = v;
    return true;
}

// "YYYY-MM-DD[T ]HH:MM:SS[.frac][Z|+HH:MM|-HH:MM|+HHMM|-HHMM]"
std::optional<double> parse_iso8601(std::string_view s) {
    std::size_t pos = 0;
    long year, month, day, hour, minute, second;
    if (!read_digits(s, pos, 4, year)) return std::nullopt;
    if (pos >= s.size() || s[pos] != '-') return std::nullopt;
    ++pos;
    if (!read_digits(s, pos, 2, month)) return std::nullopt;
    if (pos >= s.size() || s[pos] != '-') return std::nullopt;
    ++pos;
    if (!read_digits(s, pos, 2, day)) return std::nullopt;
    if (pos >= s.size() || (s[pos] != 'T' && s[pos] != ' ')) return std::nullopt;
    ++pos;
    if (!read_digits(s, pos, 2, hour)) return std::nullopt;
    if (pos >= s.size() || s[pos] != ':') return std::nullopt;
    ++pos;
    if (!read_digits(s, pos, 2, minute)) return std::nullopt;
    if (pos >= s.size() || s[pos] != ':') return std::nullopt;
    ++pos;
    if (!read_digits(s, pos, 2, second)) return std::nullopt;

    double frac = 0.0;
    if (pos < s.size() && s[pos] == '.') {
        ++pos;
        double scale = 0.1;
        bool any = false;
        while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') {
            frac += (s[pos] - '0') * scale;
            scale *= 0.1;
            ++pos;
            any = true;
        }
        if (!any) return std::nullopt;
    }

    long offset_seconds = 0;
    if (pos < s.size()) {
        const char c = s[pos];
        if (c == 'Z') {
            ++pos;
        } else if (c == '+' || c == '-') {
            ++pos;
            long oh, om = 0;
            if (!read_digits(s, pos, 2, oh)) return std::nullopt;
            if (pos < s.size() && s[pos] == ':') ++pos;
            if (pos < s.size()) {
                if (!read_digits(s, pos, 2, om)) return std::nullopt;
            }
            offset_seconds = (oh * 3600 + om * 60) * (c == '+' ? 1 : -1);
        }
    }
    if (pos != s.size()) return std::nullopt;

    if (month < 1 || month > 12) return std::nullopt;
    if (day < 1 || day > static_cast<long>(days_in_month(year, static_cast<unsigned>(month))))
        return std::nullopt;
    if (hour > 23 || minute > 59 || second > 59) return std::nullopt;

    const std::int64_t days = days_from_civil(year, static_cast<unsigned>(month), static_cast<unsigned>(day));
    const double epoch = static_cast<double>(days) * 86400.0 +
                         hour * 3600.0 + minute * 60.0 + second + frac -
                         static_cast<double>(offset_seconds);
    return epoch;
}

}  // namespace

std::optional<double> parse_timestamp(std::string_view token) {
    token = trim(token);
    if (token.empty()) return std::nullopt;

    double value = 0.0;
    const char* first = token.data();
    const char* last = token.data() + token.size();
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec == std::errc() && ptr == last) {
        if (!std::isfinite(value) || value < 0.0) return std::nullopt;
        return value;
    }
    auto iso = parse_iso8601(token);
    if (iso && (!std::isfinite(*iso) || *iso < 0.0)) return std::nullopt;
    return iso;
}

ParseResult parse_track_log(std::istream& in, const ParseOptions& opts) {
    ParseResult result;
    const csv::Table table = csv::read_table(in, opts.delimiter);
    if (table.header.empty() && table.rows.empty()) return result;  // empty input

    const auto user_col = table.column("user_id");
    const auto time_col = table.column("timestamp");
    if (!user_col) raise(ErrorCode::config, "input is missing required column: user_id");
    if (!time_col) raise(ErrorCode::config, "input is missing required column: timestamp");
    const auto resource_col = table.column("resource_type");

    result.events.reserve(table.rows.size());
    for (const auto& row : table.rows) {
        if (row.size() <= std::max(*user_col, *time_col)) {
            ++result.malformed_rows;
            continue;
        }
        std::string user(trim(row[*user_col]));
        const auto ts = parse_timestamp(row[*time_col]);
        if (user.empty() || !ts) {
            ++result.malformed_rows;
            continue;
        }
        std::string resource;
        if (resource_col && row.size() > *resource_col)
            resource = std::string(trim(row[*resource_col]));
        result.events.push_back({std::move(user), *ts, std::move(resource)});
    }
    return result;
}

ParseResult parse_track_log_file(const std::string& path, const ParseOptions& opts) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(ErrorCode::io, "cannot open input file: " + path);
    return parse_track_log(in, opts);
}

ResourceCategory categorize_interval(const ClickEvent& a, const ClickEvent& b) {
    if (a.resource_type.empty() || b.resource_type.empty()) return ResourceCategory::unknown();
    if (a.resource_type == b.resource_type) return ResourceCategory::single(a.resource_type);
    return ResourceCategory::mixed(a.resource_type, b.resource_type);
}

ExtractResult extract_intervals(const std::vector<ClickEvent>& events, const FilterConfig& cfg) {
    cfg.validate();
    ExtractResult result;

    std::unordered_map<std::string, std::vector<std::size_t>> by_user;
    for (std::size_t i = 0; i < events.size(); ++i) by_user[events[i].user_id].push_back(i);

    // std::map keeps user order deterministic regardless of input order.
    std::map<std::string, std::vector<std::size_t>> users(by_user.begin(), by_user.end());

    for (auto& [user_id, idx] : users) {
        if (idx.size() < static_cast<std::size_t>(cfg.min_clicks)) {
            result.drops.emplace_back(user_id, DropReason::too_few_clicks);
            continue;
        }
        // Sort on (timestamp, resource label) so the result is invariant under
        // permutations of the input rows even when timestamps tie.
        std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
            if (events[a].timestamp != events[b].timestamp)
                return events[a].timestamp < events[b].timestamp;
            return events[a].resource_type < events[b].resource_type;
        });

        IntervalSeries series;
        series.user_id = user_id;
        for (std::size_t i = 1; i < idx.size(); ++i) {
            const ClickEvent& prev = events[idx[i - 1]];
            const ClickEvent& next = events[idx[i]];
            const double delta = next.timestamp - prev.timestamp;
            if (delta < cfg.min_interval || delta > cfg.max_interval) continue;
            series.deltas.push_back(delta);
            series.categories.push_back(categorize_interval(prev, next));
            series.net_time += delta;
        }
        if (series.deltas.empty()) {
            result.drops.emplace_back(user_id, DropReason::no_intervals_in_range);
            continue;
        }
        result.series.emplace(user_id, std::move(series));
    }
    return result;
}

}  // namespace ontask::ingest
