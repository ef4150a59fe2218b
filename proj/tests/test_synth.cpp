#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "ontask/ingest.hpp"
#include "ontask/synth.hpp"

using namespace ontask;
using synth::GeneratorSpec;

namespace {

GeneratorSpec basic_spec() {
    GeneratorSpec spec;
    spec.n_users = 2;
    spec.intervals_min = spec.intervals_max = 10;
    spec.components = {{0.6, 0.0, 0.5, true}, {0.4, 3.0, 0.6, false}};
    spec.seed = 42;
    return spec;
}

}  // namespace

TEST_CASE("generate: near-point-mass component gives unit intervals") {
    GeneratorSpec spec;
    spec.n_users = 1;
    spec.intervals_min = spec.intervals_max = 10;
    spec.components = {{1.0, 0.0, 1e-6, true}};
    spec.start_time = 100.0;
    spec.seed = 1;
    const auto course = synth::generate(spec);
    REQUIRE(course.events.size() == 11);
    for (std::size_t i = 0; i < course.events.size(); ++i)
        CHECK(course.events[i].timestamp ==
              doctest::Approx(100.0 + static_cast<double>(i)).epsilon(1e-4));
    CHECK(course.truth[0].n_on == 10);
    CHECK(course.truth[0].expected_on_total == doctest::Approx(10.0).epsilon(1e-6));
}

TEST_CASE("generate: identical seeds give identical bytes") {
    const auto a = synth::generate(basic_spec());
    const auto b = synth::generate(basic_spec());
    std::ostringstream sa, sb;
    synth::write_events_csv(sa, a.events, false);
    synth::write_events_csv(sb, b.events, false);
    CHECK(sa.str() == sb.str());

    auto spec = basic_spec();
    spec.seed = 43;
    const auto c = synth::generate(spec);
    std::ostringstream sc;
    synth::write_events_csv(sc, c.events, false);
    CHECK(sc.str() != sa.str());
}

TEST_CASE("generate: component frequencies concentrate around the weights") {
    GeneratorSpec spec;
    spec.n_users = 1;
    spec.intervals_min = spec.intervals_max = 100000;
    spec.components = {{0.5, 0.0, 0.5, true}, {0.5, 3.0, 0.5, false}};
    spec.seed = 9;
    const auto course = synth::generate(spec);
    const auto& truth = course.truth[0];
    const double freq_on = static_cast<double>(truth.n_on) / 100000.0;
    CHECK(std::abs(freq_on - 0.5) < 0.01);
}

TEST_CASE("generate: empirical component mean approaches the log-normal mean") {
    GeneratorSpec spec;
    spec.n_users = 1;
    spec.intervals_min = spec.intervals_max = 20000;
    spec.components = {{1.0, 1.0, 0.5, true}};
    spec.seed = 31;
    const auto course = synth::generate(spec);
    double sum = 0.0;
    for (const auto& iv : course.truth[0].intervals) sum += iv.delta;
    const double sample_mean = sum / 20000.0;
    const double m = std::exp(1.0 + 0.125);
    const double sd = m * std::sqrt(std::exp(0.25) - 1.0);
    CHECK(std::abs(sample_mean - m) <= 3.0 * sd / std::sqrt(20000.0));
}

TEST_CASE("generate -> ingest round trip reproduces the interval sequence exactly") {
    auto spec = basic_spec();
    spec.resource_labels = {{"video", 0.5}, {"problem", 0.5}};
    const auto course = synth::generate(spec);

    std::ostringstream out;
    synth::write_events_csv(out, course.events, true);
    std::istringstream in(out.str());
    const auto parsed = ingest::parse_track_log(in);
    REQUIRE(parsed.events.size() == course.events.size());
    CHECK(parsed.malformed_rows == 0);

    FilterConfig cfg;
    cfg.min_clicks = 2;
    cfg.min_interval = 1e-300;  // retain every draw
    cfg.max_interval = 1e300;
    const auto extracted = ingest::extract_intervals(parsed.events, cfg);
    REQUIRE(extracted.series.size() == spec.n_users);
    for (const auto& truth : course.truth) {
        const auto& series = extracted.series.at(truth.user_id);
        REQUIRE(series.n() == truth.n_intervals);
        for (std::size_t i = 0; i < truth.n_intervals; ++i)
            CHECK(series.deltas[i] == truth.intervals[i].delta);  // bit-exact
    }
}

TEST_CASE("generate: truth bookkeeping is consistent") {
    const auto course = synth::generate(basic_spec());
    const double e_on = synth::expected_on_mean(basic_spec());
    for (const auto& truth : course.truth) {
        CHECK(truth.n_on + truth.n_off == truth.n_intervals);
        double on_sum = 0.0;
        for (const auto& iv : truth.intervals)
            if (iv.on_task) on_sum += iv.delta;
        CHECK(truth.realized_on_sum == doctest::Approx(on_sum).epsilon(1e-12));
        CHECK(truth.expected_on_total ==
              doctest::Approx(static_cast<double>(truth.n_intervals) * e_on).epsilon(1e-12));
        CHECK(truth.realized_on_plus_credit ==
              doctest::Approx(on_sum + truth.n_off * e_on).epsilon(1e-12));
    }
}

TEST_CASE("spec JSON: all three intervals_per_user shapes parse") {
    const char* fixed = R"({"n_users": 2, "intervals_per_user": 5, "seed": 3,
        "components": [{"weight": 1.0, "mu": 0.0, "sigma": 0.5, "label": "on"}]})";
    auto spec = GeneratorSpec::from_json(fixed);
    CHECK(spec.intervals_min == 5);
    CHECK(spec.intervals_max == 5);

    const char* range = R"({"n_users": 2, "intervals_per_user": [5, 9],
        "components": [{"weight": 1.0, "mu": 0.0, "sigma": 0.5, "label": "on"}]})";
    spec = GeneratorSpec::from_json(range);
    CHECK(spec.intervals_min == 5);
    CHECK(spec.intervals_max == 9);

    const char* object = R"({"n_users": 1, "intervals_per_user": {"min": 2, "max": 4},
        "start_time": 10.0, "resource_labels": [{"label": "video"}],
        "components": [{"weight": 1.0, "mu": 0.0, "sigma": 0.5, "label": "on"}]})";
    spec = GeneratorSpec::from_json(object);
    CHECK(spec.intervals_max == 4);
    CHECK(spec.resource_labels.size() == 1);
}

TEST_CASE("spec JSON: invalid specs are configuration errors") {
    CHECK_THROWS_AS(GeneratorSpec::from_json("{"), Error);
    const char* bad_weights = R"({"n_users": 1, "intervals_per_user": 5,
        "components": [{"weight": 0.7, "mu": 0.0, "sigma": 0.5, "label": "on"}]})";
    CHECK_THROWS_AS(GeneratorSpec::from_json(bad_weights), Error);
    const char* bad_label = R"({"n_users": 1, "intervals_per_user": 5,
        "components": [{"weight": 1.0, "mu": 0.0, "sigma": 0.5, "label": "maybe"}]})";
    CHECK_THROWS_AS(GeneratorSpec::from_json(bad_label), Error);
    const char* bad_sigma = R"({"n_users": 1, "intervals_per_user": 5,
        "components": [{"weight": 1.0, "mu": 0.0, "sigma": 0.0, "label": "on"}]})";
    CHECK_THROWS_AS(GeneratorSpec::from_json(bad_sigma), Error);
}

TEST_CASE("generate: interval count ranges are honored per user") {
    GeneratorSpec spec;
    spec.n_users = 50;
    spec.intervals_min = 3;
    spec.intervals_max = 8;
    spec.components = {{1.0, 0.0, 0.5, true}};
    spec.seed = 77;
    const auto course = synth::generate(spec);
    bool saw_min = false, saw_other = false;
    for (const auto& truth : course.truth) {
        CHECK(truth.n_intervals >= 3);
        CHECK(truth.n_intervals <= 8);
        if (truth.n_intervals == 3) saw_min = true;
        if (truth.n_intervals != 3) saw_other = true;
    }
    CHECK(saw_min);
    CHECK(saw_other);
}
