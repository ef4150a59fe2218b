#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "ontask/estimate.hpp"
#include "ontask/mixture.hpp"
#include "ontask/rng.hpp"
#include "ontask/stats.hpp"
#include "support/oracles.hpp"

using namespace ontask;
using mixture::EmConfig;
using mixture::MixtureFit;

namespace {

std::vector<double> normal_sample(Rng& rng, std::size_t n, double mu, double sigma) {
    std::vector<double> out(n);
    for (auto& v : out) v = rng.normal(mu, sigma);
    return out;
}

EmConfig small_cfg(std::uint64_t seed = 1, int min_points = 2) {
    EmConfig cfg;
    cfg.seed = seed;
    cfg.min_points = min_points;
    return cfg;
}

}  // namespace

TEST_CASE("log_transform: known values") {
    CHECK(mixture::log_transform(std::vector<double>{1.0})[0] == doctest::Approx(0.0));
    CHECK(mixture::log_transform(std::vector<double>{std::exp(1.0)})[0] == doctest::Approx(1.0));
    const auto logs = mixture::log_transform(std::vector<double>{0.1, 7200.0});
    CHECK(logs[0] == doctest::Approx(-2.3025850929940455).epsilon(1e-12));
    CHECK(logs[1] == doctest::Approx(8.881836305004146).epsilon(1e-12));
    CHECK_THROWS_AS(mixture::log_transform(std::vector<double>{0.0}), Error);
    CHECK_THROWS_AS(mixture::log_transform(std::vector<double>{-1.0}), Error);
}

TEST_CASE("init_params: quantile placement on two point masses") {
    const std::vector<double> x = {0, 0, 0, 10, 10, 10};
    const auto params = mixture::init_params(x, 2);
    CHECK(params.means[0] == doctest::Approx(0.0));
    CHECK(params.means[1] == doctest::Approx(10.0));
    CHECK(params.weights[0] == doctest::Approx(0.5));
    CHECK(params.weights[1] == doctest::Approx(0.5));
}

TEST_CASE("init_params: fewer points than components") {
    const std::vector<double> x = {1, 2, 3};
    CHECK_THROWS_AS(mixture::init_params(x, 5), Error);
    try {
        mixture::init_params(x, 5);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::insufficient_data);
    }
}

TEST_CASE("init_params: K=1 mean sits at the sample median") {
    Rng rng(42);
    const auto x = normal_sample(rng, 501, 0.0, 1.0);
    const auto params = mixture::init_params(x, 1);
    CHECK(params.means[0] == doctest::Approx(oracles::quantile(x, 0.5)).epsilon(1e-12));
    CHECK(params.weights[0] == doctest::Approx(1.0));
}

TEST_CASE("fit_em: K=1 recovers sample moments") {
    Rng rng(7);
    const auto x = normal_sample(rng, 5000, 0.0, 1.0);
    const auto fit = mixture::fit_em(x, 1, small_cfg());
    CHECK(fit.converged);
    CHECK(fit.params.means[0] == doctest::Approx(stats::mean(x)).epsilon(0.05));
    CHECK(fit.params.stds[0] == doctest::Approx(stats::sample_std(x)).epsilon(0.05));
}

TEST_CASE("fit_em: two separated components recovered within tolerance") {
    Rng rng(2024);
    std::vector<double> x = normal_sample(rng, 2500, 1.0, 0.5);
    const auto second = normal_sample(rng, 2500, 6.0, 0.8);
    x.insert(x.end(), second.begin(), second.end());

    auto fit = mixture::fit_em(x, 2, small_cfg(3));
    REQUIRE(fit.converged);
    // order by mean for comparison
    if (fit.params.means[0] > fit.params.means[1]) {
        std::swap(fit.params.means[0], fit.params.means[1]);
        std::swap(fit.params.stds[0], fit.params.stds[1]);
        std::swap(fit.params.weights[0], fit.params.weights[1]);
    }
    CHECK(std::abs(fit.params.weights[0] - 0.5) < 0.03);
    CHECK(std::abs(fit.params.weights[1] - 0.5) < 0.03);
    CHECK(std::abs(fit.params.means[0] - 1.0) < 0.1);
    CHECK(std::abs(fit.params.means[1] - 6.0) < 0.1);
    CHECK(std::abs(fit.params.stds[0] - 0.5) < 0.1);
    CHECK(std::abs(fit.params.stds[1] - 0.8) < 0.1);

    // independent route: hard split at the density valley, per-side moments
    std::vector<double> lo, hi;
    for (double v : x) (v < 3.2 ? lo : hi).push_back(v);
    CHECK(fit.params.means[0] == doctest::Approx(stats::mean(lo)).epsilon(0.05));
    CHECK(fit.params.means[1] == doctest::Approx(stats::mean(hi)).epsilon(0.05));
    CHECK(fit.params.weights[0] ==
          doctest::Approx(static_cast<double>(lo.size()) / x.size()).epsilon(0.05));
}

TEST_CASE("fit_em: identical points give a floored, converged fit") {
    const std::vector<double> x = {0, 0, 0, 0};
    const auto fit = mixture::fit_em(x, 2, small_cfg());
    CHECK(fit.converged);
    CHECK(std::isfinite(fit.log_likelihood));
    CHECK(fit.params.stds[0] == doctest::Approx(1e-3));
    CHECK(fit.params.stds[1] == doctest::Approx(1e-3));
}

TEST_CASE("fit_em: log-likelihood trace is non-decreasing") {
    Rng rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> x = normal_sample(rng, 60 + rng.uniform_int(0, 80),
                                              rng.uniform(-2.0, 2.0), 0.3 + rng.uniform() * 2.0);
        const auto extra = normal_sample(rng, 40, rng.uniform(2.0, 6.0), 0.2 + rng.uniform());
        x.insert(x.end(), extra.begin(), extra.end());
        const int k = 1 + static_cast<int>(rng.uniform_int(0, 2));
        const auto fit = mixture::fit_em(x, k, small_cfg(trial));
        for (std::size_t i = 1; i < fit.ll_trace.size(); ++i)
            CHECK(fit.ll_trace[i] >= fit.ll_trace[i - 1] - 1e-10);
    }
}

TEST_CASE("fit_em: responsibilities are row-normalized probabilities") {
    Rng rng(5);
    const auto x = normal_sample(rng, 200, 0.0, 1.5);
    const auto fit = mixture::fit_em(x, 3, small_cfg());
    REQUIRE(fit.memberships.rows == x.size());
    for (std::size_t i = 0; i < fit.memberships.rows; ++i) {
        double row_sum = 0.0;
        for (std::size_t k = 0; k < fit.memberships.cols; ++k) {
            const double p = fit.memberships(i, k);
            CHECK(p >= 0.0);
            CHECK(p <= 1.0);
            row_sum += p;
        }
        CHECK(row_sum == doctest::Approx(1.0).epsilon(1e-9));
    }
    double weight_sum = 0.0;
    for (int k = 0; k < 3; ++k) {
        CHECK(fit.params.weights[k] >= 0.0);
        CHECK(fit.params.stds[k] >= 1e-3);
        weight_sum += fit.params.weights[k];
    }
    CHECK(weight_sum == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("direct means: uniform and hard memberships") {
    mixture::MembershipMatrix p;
    p.rows = 2;
    p.cols = 2;
    p.p = {0.5, 0.5, 0.5, 0.5};
    const std::vector<double> deltas = {2.0, 4.0};
    auto dm = mixture::direct_component_means(deltas, p);
    CHECK(dm.m[0] == doctest::Approx(3.0));
    CHECK(dm.m[1] == doctest::Approx(3.0));

    p.p = {1.0, 0.0, 0.0, 1.0};
    dm = mixture::direct_component_means(deltas, p);
    CHECK(dm.m[0] == doctest::Approx(2.0));
    CHECK(dm.m[1] == doctest::Approx(4.0));
    CHECK_FALSE(dm.empty[0]);

    // empty column
    p.p = {1.0, 0.0, 1.0, 0.0};
    dm = mixture::direct_component_means(deltas, p);
    CHECK(dm.empty[1]);
    CHECK(dm.m[1] == 0.0);
}

TEST_CASE("direct means: equals the extended-precision oracle on random data") {
    Rng rng(77);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 5 + rng.uniform_int(0, 45);
        const std::size_t k = 2 + rng.uniform_int(0, 2);
        std::vector<double> deltas(n);
        for (auto& d : deltas) d = rng.uniform(0.1, 100.0);
        mixture::MembershipMatrix p;
        p.rows = n;
        p.cols = k;
        p.p.resize(n * k);
        for (std::size_t i = 0; i < n; ++i) {
            double row_total = 0.0;
            for (std::size_t j = 0; j < k; ++j) {
                p.at(i, j) = rng.uniform();
                row_total += p(i, j);
            }
            for (std::size_t j = 0; j < k; ++j) p.at(i, j) /= row_total;
        }
        const auto dm = mixture::direct_component_means(deltas, p);
        for (std::size_t j = 0; j < k; ++j) {
            std::vector<double> weights(n);
            for (std::size_t i = 0; i < n; ++i) weights[i] = p(i, j);
            CHECK(dm.m[j] == doctest::Approx(oracles::weighted_mean(deltas, weights)).epsilon(1e-12));
        }
    }
}

TEST_CASE("lognormal theoretical means") {
    mixture::MixtureParams params;
    params.weights = {0.5, 0.5};
    params.means = {0.0, 1.0};
    params.stds = {1e-12, 2.0};
    const auto means = mixture::lognormal_theoretical_means(params);
    CHECK(means[0] == doctest::Approx(1.0));
    CHECK(means[1] == doctest::Approx(std::exp(3.0)));
    for (double m : means) CHECK(m > 0.0);
}

TEST_CASE("order_components: permutes everything jointly") {
    MixtureFit fit;
    fit.params.weights = {0.3, 0.7};
    fit.params.means = {5.0, 1.0};
    fit.params.stds = {0.5, 0.2};
    fit.direct_means = {5.0, 2.0};
    fit.component_empty = {false, false};
    fit.memberships.rows = 2;
    fit.memberships.cols = 2;
    fit.memberships.p = {0.9, 0.1, 0.2, 0.8};
    mixture::order_components(fit);
    CHECK(fit.direct_means[0] == doctest::Approx(2.0));
    CHECK(fit.direct_means[1] == doctest::Approx(5.0));
    CHECK(fit.params.weights[0] == doctest::Approx(0.7));
    CHECK(fit.params.means[0] == doctest::Approx(1.0));
    CHECK(fit.memberships(0, 0) == doctest::Approx(0.1));
    CHECK(fit.memberships(0, 1) == doctest::Approx(0.9));

    // already ordered: identity
    MixtureFit sorted_fit = fit;
    mixture::order_components(sorted_fit);
    CHECK(sorted_fit.direct_means == fit.direct_means);

    // tie on m broken by ascending mu
    MixtureFit tie;
    tie.params.weights = {0.5, 0.5};
    tie.params.means = {1.0, 0.0};
    tie.params.stds = {0.1, 0.1};
    tie.direct_means = {3.0, 3.0};
    mixture::order_components(tie);
    CHECK(tie.params.means[0] == doctest::Approx(0.0));
    CHECK(tie.params.means[1] == doctest::Approx(1.0));
}

TEST_CASE("select_model: clean three-component mixture chooses K=3") {
    Rng rng(314);
    std::vector<double> deltas;
    for (int i = 0; i < 3000; ++i) {
        const double u = rng.uniform();
        double mu, sigma;
        if (u < 0.3) { mu = 1.0; sigma = 0.4; }
        else if (u < 0.7) { mu = 3.5; sigma = 0.5; }
        else { mu = 7.0; sigma = 0.5; }
        deltas.push_back(std::exp(rng.normal(mu, sigma)));
    }
    const auto x = mixture::log_transform(deltas);
    EmConfig cfg = small_cfg(1000, 10);
    const auto fit = mixture::select_model(x, deltas, cfg);
    CHECK(fit.converged);
    CHECK(fit.params.k() == 3);
}

TEST_CASE("select_model: single Gaussian with k_range {3,4,5} picks the smallest offered") {
    Rng rng(555);
    const auto x = normal_sample(rng, 1500, 2.0, 0.7);
    std::vector<double> deltas(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) deltas[i] = std::exp(x[i]);
    EmConfig cfg = small_cfg(2, 10);
    const auto fit = mixture::select_model(x, deltas, cfg);
    CHECK(fit.converged);

    // BIC comparison oracle on the same sample: refit every K and compare
    std::vector<std::pair<int, double>> bics;
    for (int k : cfg.k_range) {
        const auto f = mixture::fit_em(x, k, cfg);
        if (f.converged) bics.emplace_back(k, f.bic);
    }
    REQUIRE(!bics.empty());
    int best_k = bics[0].first;
    double best = bics[0].second;
    for (const auto& [k, bic] : bics) {
        if (bic < best) { best = bic; best_k = k; }
    }
    CHECK(fit.params.k() == best_k);
    CHECK(fit.params.k() == 3);
}

TEST_CASE("select_model: ties in BIC go to the smaller K") {
    CHECK(mixture::pick_min_bic({{3, 100.0}, {4, 100.0}}) == 0);
    CHECK(mixture::pick_min_bic({{4, 100.0}, {3, 100.0}}) == 1);
    CHECK(mixture::pick_min_bic({{3, 101.0}, {4, 100.0}}) == 1);
}

TEST_CASE("select_model: BIC definition holds exactly") {
    Rng rng(8);
    const auto x = normal_sample(rng, 120, 0.0, 1.0);
    std::vector<double> deltas(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) deltas[i] = std::exp(x[i]);
    for (int k : {1, 2, 3}) {
        const auto fit = mixture::fit_em(x, k, small_cfg());
        CHECK(fit.bic - (-2.0 * fit.log_likelihood) ==
              doctest::Approx((3.0 * k - 1.0) * std::log(static_cast<double>(x.size())))
                  .epsilon(1e-12));
    }
}

TEST_CASE("select_model: insufficient data when every K is infeasible") {
    const std::vector<double> x = {0.1, 0.2};
    const std::vector<double> d = {1.1, 1.2};
    EmConfig cfg = small_cfg(1, 1);
    cfg.k_range = {5};
    CHECK_THROWS_AS(mixture::select_model(x, d, cfg), Error);
}

TEST_CASE("goodness_of_fit: draws from the fitted family score near one") {
    Rng rng(999);
    std::vector<double> deltas;
    for (int i = 0; i < 5000; ++i) {
        const double u = rng.uniform();
        deltas.push_back(std::exp(u < 0.6 ? rng.normal(1.0, 0.5) : rng.normal(4.0, 0.8)));
    }
    const auto x = mixture::log_transform(deltas);
    EmConfig cfg = small_cfg(4);
    cfg.k_range = {2, 3};
    auto fit = mixture::select_model(x, deltas, cfg);
    REQUIRE(fit.converged);
    mixture::order_components(fit);
    const auto gof = mixture::goodness_of_fit(x, fit);
    REQUIRE(gof.has_value());
    CHECK(*gof >= 0.99);
}

TEST_CASE("goodness_of_fit: degenerate variance is missing, not a number") {
    const std::vector<double> deltas = {2.0, 2.0, 2.0, 2.0};
    const auto x = mixture::log_transform(deltas);
    const auto fit = mixture::fit_em(x, 2, small_cfg());
    const auto gof = mixture::goodness_of_fit(x, fit);
    CHECK(!gof.has_value());
}

TEST_CASE("fit_em: scale equivariance of fitted parameters") {
    Rng rng(31);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> deltas;
        for (int i = 0; i < 80; ++i)
            deltas.push_back(std::exp(rng.uniform() < 0.5 ? rng.normal(0.5, 0.4)
                                                          : rng.normal(3.0, 0.6)));
        const double c = std::exp(rng.uniform(-2.0, 2.0));
        std::vector<double> scaled(deltas.size());
        for (std::size_t i = 0; i < deltas.size(); ++i) scaled[i] = c * deltas[i];

        EmConfig cfg = small_cfg(trial + 1);
        cfg.k_range = {2};
        auto base = mixture::select_model(mixture::log_transform(deltas), deltas, cfg);
        auto moved = mixture::select_model(mixture::log_transform(scaled), scaled, cfg);
        REQUIRE(base.converged);
        REQUIRE(moved.converged);
        mixture::order_components(base);
        mixture::order_components(moved);
        for (int k = 0; k < 2; ++k) {
            CHECK(std::abs(moved.params.means[k] - base.params.means[k] - std::log(c)) < 1e-4);
            CHECK(std::abs(moved.params.stds[k] - base.params.stds[k]) < 1e-4);
            CHECK(std::abs(moved.params.weights[k] - base.params.weights[k]) < 1e-4);
            CHECK(moved.direct_means[k] == doctest::Approx(c * base.direct_means[k]).epsilon(1e-4));
        }
        // the time-on-task estimate inherits positive homogeneity
        const double t_base = estimate::time_on_task(base, deltas.size()).t;
        const double t_moved = estimate::time_on_task(moved, scaled.size()).t;
        CHECK(t_moved == doctest::Approx(c * t_base).epsilon(1e-4));
    }
}

TEST_CASE("fit_em: weighted identity at the fixed point") {
    Rng rng(64);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> deltas;
        for (int i = 0; i < 150; ++i)
            deltas.push_back(std::exp(rng.normal(rng.uniform() < 0.5 ? 0.0 : 2.5, 0.5)));
        const auto x = mixture::log_transform(deltas);
        const auto fit = mixture::fit_em(x, 2, small_cfg(trial));
        if (!fit.converged) continue;
        const auto dm = mixture::direct_component_means(deltas, fit.memberships);
        double total = 0.0;
        for (int k = 0; k < 2; ++k) {
            const double col_mean =
                fit.memberships.column_sum(k) / static_cast<double>(deltas.size());
            total += col_mean * dm.m[k];
        }
        CHECK(total == doctest::Approx(stats::mean(deltas)).epsilon(1e-6));
    }
}

TEST_CASE("effective_component_count: collapsed and healthy fits") {
    const std::vector<double> same = {1.0, 1.0, 1.0, 1.0, 1.0};
    const auto x = mixture::log_transform(same);
    auto fit = mixture::fit_em(x, 3, small_cfg());
    auto dm = mixture::direct_component_means(same, fit.memberships);
    fit.direct_means = dm.m;
    fit.component_empty = dm.empty;
    mixture::order_components(fit);
    CHECK(mixture::effective_component_count(fit) == 1);

    MixtureFit healthy;
    healthy.params.weights = {0.5, 0.5};
    healthy.params.means = {0.0, 3.0};
    healthy.params.stds = {0.5, 0.5};
    healthy.direct_means = {1.0, 20.0};
    healthy.component_empty = {false, false};
    CHECK(mixture::effective_component_count(healthy) == 2);
}

TEST_CASE("fit digest JSON round-trips") {
    Rng rng(21);
    std::vector<double> deltas;
    for (int i = 0; i < 60; ++i) deltas.push_back(std::exp(rng.normal(1.0, 0.8)));
    const auto x = mixture::log_transform(deltas);
    EmConfig cfg = small_cfg(9);
    cfg.k_range = {2};
    auto fit = mixture::select_model(x, deltas, cfg);
    mixture::order_components(fit);
    fit.gof = mixture::goodness_of_fit(x, fit);

    std::size_t n = 0;
    const auto loaded = mixture::fit_from_json(mixture::fit_to_json(fit, deltas.size()), &n);
    CHECK(n == deltas.size());
    CHECK(loaded.params.weights == fit.params.weights);
    CHECK(loaded.params.means == fit.params.means);
    CHECK(loaded.params.stds == fit.params.stds);
    CHECK(loaded.direct_means == fit.direct_means);
    CHECK(loaded.bic == fit.bic);
    CHECK(loaded.converged == fit.converged);
    REQUIRE(loaded.gof.has_value());
    CHECK(*loaded.gof == *fit.gof);

    CHECK_THROWS_AS(mixture::fit_from_json("{not json"), Error);
}
