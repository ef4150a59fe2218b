#include "ontask/mixture.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <json.hpp>

#include "ontask/stats.hpp"

namespace ontask::mixture {

namespace {

constexpr double kLogTwoPi = 1.8378770664093454835606594728112;
constexpr double kEmptyColumnMass = 1e-12;

}  // namespace

void EmConfig::validate() const {
    if (max_iterations < 1) raise(ErrorCode::config, "max_iterations must be >= 1");
    if (!(rel_tolerance > 0.0)) raise(ErrorCode::config, "rel_tolerance must be > 0");
    if (!(sigma_floor > 0.0)) raise(ErrorCode::config, "sigma_floor must be > 0");
    if (restarts < 1) raise(ErrorCode::config, "restarts must be >= 1");
    if (k_range.empty()) raise(ErrorCode::config, "k_range must not be empty");
    for (int k : k_range)
        if (k < 1) raise(ErrorCode::config, "k_range entries must be >= 1");
    if (min_points < 1) raise(ErrorCode::config, "min_points must be >= 1");
}

double MembershipMatrix::column_sum(std::size_t k) const {
    double s = 0.0;
    for (std::size_t i = 0; i < rows; ++i) s += p[i * cols + k];
    return s;
}

std::vector<double> log_transform(std::span<const double> deltas) {
    std::vector<double> out;
    out.reserve(deltas.size());
    for (double d : deltas) {
        if (!(d > 0.0))
            raise(ErrorCode::internal, "non-positive interval reached log_transform");
        out.push_back(std::log(d));
    }
    return out;
}

std::vector<double> log_transform(const IntervalSeries& series) {
    return log_transform(std::span<const double>(series.deltas));
}

MixtureParams init_params(std::span<const double> x, int k, double sigma_floor, Rng* jitter) {
    const std::size_t n = x.size();
    if (n < static_cast<std::size_t>(k))
        raise(ErrorCode::insufficient_data, "insufficient_data: fewer points than components");

    std::vector<double> sorted(x.begin(), x.end());
    std::sort(sorted.begin(), sorted.end());
    const double spread = stats::sample_std(x);

    MixtureParams params;
    params.weights.assign(k, 1.0 / k);
    params.means.resize(k);
    params.stds.assign(k, std::max(spread / k, sigma_floor));
    for (int j = 0; j < k; ++j) {
        const double q = (j + 0.5) / k;
        params.means[j] = stats::quantile_sorted(sorted, q);
        if (jitter) params.means[j] += jitter->uniform(-spread, spread);
    }
    return params;
}

namespace {

struct EStepResult {
    double log_likelihood = 0.0;
    MembershipMatrix p;
};

EStepResult e_step(std::span<const double> x, const MixtureParams& params) {
    const std::size_t n = x.size();
    const int k = params.k();

    std::vector<double> log_weight(k), inv_std(k), log_norm(k);
    for (int j = 0; j < k; ++j) {
        log_weight[j] = std::log(params.weights[j]);
        inv_std[j] = 1.0 / params.stds[j];
        log_norm[j] = log_weight[j] - std::log(params.stds[j]) - 0.5 * kLogTwoPi;
    }

    EStepResult result;
    result.p.rows = n;
    result.p.cols = static_cast<std::size_t>(k);
    result.p.p.resize(n * static_cast<std::size_t>(k));

    std::vector<double> lp(k);
    for (std::size_t i = 0; i < n; ++i) {
        double mx = -std::numeric_limits<double>::infinity();
        for (int j = 0; j < k; ++j) {
            const double z = (x[i] - params.means[j]) * inv_std[j];
            lp[j] = log_norm[j] - 0.5 * z * z;
            mx = std::max(mx, lp[j]);
        }
        double sum = 0.0;
        for (int j = 0; j < k; ++j) sum += std::exp(lp[j] - mx);
        const double lse = mx + std::log(sum);
        result.log_likelihood += lse;
        for (int j = 0; j < k; ++j) result.p.at(i, j) = std::exp(lp[j] - lse);
    }
    return result;
}

MixtureParams m_step(std::span<const double> x, const MembershipMatrix& p, double sigma_floor,
                     const MixtureParams& previous) {
    const std::size_t n = x.size();
    const int k = static_cast<int>(p.cols);

    MixtureParams params;
    params.weights.resize(k);
    params.means.resize(k);
    params.stds.resize(k);
    for (int j = 0; j < k; ++j) {
        double mass = 0.0, wx = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            mass += p(i, j);
            wx += p(i, j) * x[i];
        }
        params.weights[j] = mass / static_cast<double>(n);
        if (mass <= kEmptyColumnMass) {
            // starved component: keep its location, weight decays to zero
            params.means[j] = previous.means[j];
            params.stds[j] = previous.stds[j];
            continue;
        }
        const double mu = wx / mass;
        double wss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double d = x[i] - mu;
            wss += p(i, j) * d * d;
        }
        params.means[j] = mu;
        params.stds[j] = std::max(std::sqrt(wss / mass), sigma_floor);
    }
    return params;
}

struct EmRun {
    MixtureParams params;
    MembershipMatrix memberships;
    double log_likelihood = -std::numeric_limits<double>::infinity();
    int iterations = 0;
    bool converged = false;
    std::vector<double> ll_trace;
};

EmRun run_em_once(std::span<const double> x, MixtureParams params, const EmConfig& cfg) {
    EmRun run;
    double ll_prev = -std::numeric_limits<double>::infinity();
    for (int it = 1; it <= cfg.max_iterations; ++it) {
        EStepResult e = e_step(x, params);
        run.ll_trace.push_back(e.log_likelihood);
        const bool converged_now =
            it > 1 &&
            std::abs(e.log_likelihood - ll_prev) <= cfg.rel_tolerance * (1.0 + std::abs(e.log_likelihood));
        // The M-step always runs so the returned weights are exactly the
        // column means of the returned responsibilities.
        params = m_step(x, e.p, cfg.sigma_floor, params);
        run.memberships = std::move(e.p);
        ll_prev = e.log_likelihood;
        run.iterations = it;
        if (converged_now) {
            run.converged = true;
            break;
        }
    }
    run.params = std::move(params);
    run.log_likelihood = ll_prev;
    return run;
}

}  // namespace

MixtureFit fit_em(std::span<const double> x, int k, const EmConfig& cfg) {
    cfg.validate();
    const std::size_t n = x.size();
    if (k < 1) raise(ErrorCode::config, "component count must be >= 1");
    if (n < static_cast<std::size_t>(std::max(k, cfg.min_points)))
        raise(ErrorCode::insufficient_data, "insufficient_data: need at least max(K, min_points) intervals");

    EmRun best;
    bool have_best = false;
    for (int r = 0; r < cfg.restarts; ++r) {
        const std::uint64_t run_seed =
            SplitMix64::hash(cfg.seed, (static_cast<std::uint64_t>(k) << 32) | static_cast<std::uint64_t>(r));
        Rng rng(run_seed);
        MixtureParams start = init_params(x, k, cfg.sigma_floor, r > 0 ? &rng : nullptr);
        EmRun run = run_em_once(x, std::move(start), cfg);
        if (!have_best || run.log_likelihood > best.log_likelihood) {
            best = std::move(run);
            have_best = true;
        }
    }

    MixtureFit fit;
    fit.params = std::move(best.params);
    fit.memberships = std::move(best.memberships);
    fit.log_likelihood = best.log_likelihood;
    fit.iterations = best.iterations;
    fit.converged = best.converged;
    fit.ll_trace = std::move(best.ll_trace);
    fit.bic = -2.0 * fit.log_likelihood +
              (3.0 * k - 1.0) * std::log(static_cast<double>(n));
    return fit;
}

DirectMeans direct_component_means(std::span<const double> deltas, const MembershipMatrix& memberships) {
    if (deltas.size() != memberships.rows)
        raise(ErrorCode::internal, "membership row count does not match interval count");

    DirectMeans out;
    out.m.resize(memberships.cols);
    out.empty.resize(memberships.cols);
    for (std::size_t k = 0; k < memberships.cols; ++k) {
        double mass = 0.0, weighted = 0.0;
        for (std::size_t i = 0; i < memberships.rows; ++i) {
            mass += memberships(i, k);
            weighted += memberships(i, k) * deltas[i];
        }
        if (mass < kEmptyColumnMass) {
            out.m[k] = 0.0;
            out.empty[k] = true;
        } else {
            out.m[k] = weighted / mass;
            out.empty[k] = false;
        }
    }
    return out;
}

std::vector<double> lognormal_theoretical_means(const MixtureParams& params) {
    std::vector<double> out;
    out.reserve(params.means.size());
    for (std::size_t k = 0; k < params.means.size(); ++k)
        out.push_back(std::exp(params.means[k] + 0.5 * params.stds[k] * params.stds[k]));
    return out;
}

void order_components(MixtureFit& fit) {
    const int k = fit.params.k();
    if (fit.direct_means.size() != static_cast<std::size_t>(k))
        raise(ErrorCode::internal, "order_components requires direct means");

    std::vector<int> order(k);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        if (fit.direct_means[a] != fit.direct_means[b]) return fit.direct_means[a] < fit.direct_means[b];
        if (fit.params.means[a] != fit.params.means[b]) return fit.params.means[a] < fit.params.means[b];
        return fit.params.stds[a] < fit.params.stds[b];
    });

    const auto permute = [&](auto& v) {
        auto copy = v;
        for (int j = 0; j < k; ++j) v[j] = copy[order[j]];
    };
    permute(fit.params.weights);
    permute(fit.params.means);
    permute(fit.params.stds);
    permute(fit.direct_means);
    if (!fit.component_empty.empty()) permute(fit.component_empty);

    if (fit.memberships.rows > 0) {
        std::vector<double> row(k);
        for (std::size_t i = 0; i < fit.memberships.rows; ++i) {
            for (int j = 0; j < k; ++j) row[j] = fit.memberships(i, order[j]);
            for (int j = 0; j < k; ++j) fit.memberships.at(i, j) = row[j];
        }
    }
}

std::size_t pick_min_bic(const std::vector<std::pair<int, double>>& candidates) {
    if (candidates.empty()) raise(ErrorCode::internal, "no candidates for BIC selection");
    std::size_t best = 0;
    for (std::size_t i = 1; i < candidates.size(); ++i) {
        const auto& [k, bic] = candidates[i];
        const auto& [bk, bb] = candidates[best];
        if (bic < bb || (bic == bb && k < bk)) best = i;
    }
    return best;
}

MixtureFit select_model(std::span<const double> x, std::span<const double> deltas,
                        const EmConfig& cfg) {
    cfg.validate();
    if (x.size() != deltas.size())
        raise(ErrorCode::internal, "log-interval and interval lengths differ");
    if (x.size() < static_cast<std::size_t>(cfg.min_points))
        raise(ErrorCode::insufficient_data, "insufficient_data: fewer intervals than min_points");

    std::vector<int> ks(cfg.k_range.begin(), cfg.k_range.end());
    std::sort(ks.begin(), ks.end());
    ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
    ks.erase(std::remove_if(ks.begin(), ks.end(),
                            [&](int k) { return static_cast<std::size_t>(k) > x.size(); }),
             ks.end());
    if (ks.empty())
        raise(ErrorCode::insufficient_data, "insufficient_data: every candidate K exceeds the sample size");

    std::vector<MixtureFit> fits;
    fits.reserve(ks.size());
    for (int k : ks) fits.push_back(fit_em(x, k, cfg));

    std::vector<std::pair<int, double>> converged;
    std::vector<std::size_t> converged_idx;
    std::vector<std::pair<int, double>> all;
    for (std::size_t i = 0; i < fits.size(); ++i) {
        all.emplace_back(ks[i], fits[i].bic);
        if (fits[i].converged) {
            converged.emplace_back(ks[i], fits[i].bic);
            converged_idx.push_back(i);
        }
    }

    std::size_t chosen;
    if (!converged.empty()) {
        chosen = converged_idx[pick_min_bic(converged)];
    } else {
        chosen = pick_min_bic(all);  // non-converged marker for the caller
    }

    MixtureFit fit = std::move(fits[chosen]);
    DirectMeans dm = direct_component_means(deltas, fit.memberships);
    fit.direct_means = std::move(dm.m);
    fit.component_empty = std::move(dm.empty);
    return fit;
}

std::optional<double> goodness_of_fit(std::span<const double> x, const MixtureFit& fit) {
    if (x.size() < 3)
        raise(ErrorCode::invalid_argument, "goodness_of_fit requires at least 3 points");

    const std::vector<double> empirical = stats::ecdf_at_points(x);
    std::vector<double> model(x.size());
    const int k = fit.params.k();
    for (std::size_t i = 0; i < x.size(); ++i) {
        double c = 0.0;
        for (int j = 0; j < k; ++j) {
            c += fit.params.weights[j] *
                 stats::normal_cdf((x[i] - fit.params.means[j]) / fit.params.stds[j]);
        }
        model[i] = c;
    }
    return stats::pearson(empirical, model);
}

int effective_component_count(const MixtureFit& fit) {
    const int k = fit.params.k();
    if (fit.direct_means.size() != static_cast<std::size_t>(k))
        raise(ErrorCode::internal, "effective_component_count requires direct means");

    const auto empty_at = [&](int j) {
        return !fit.component_empty.empty() && fit.component_empty[j];
    };
    const auto close = [](double a, double b, double scale) {
        return std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(scale));
    };

    int count = 0;
    int last = -1;
    for (int j = 0; j < k; ++j) {
        if (empty_at(j)) continue;
        if (last >= 0 && close(fit.params.means[j], fit.params.means[last], fit.params.means[last]) &&
            close(fit.params.stds[j], fit.params.stds[last], fit.params.stds[last])) {
            last = j;
            continue;
        }
        ++count;
        last = j;
    }
    return count;
}

std::string fit_to_json(const MixtureFit& fit, std::size_t n) {
    nlohmann::ordered_json j;
    j["n"] = n;
    j["k"] = fit.params.k();
    j["weights"] = fit.params.weights;
    j["mu"] = fit.params.means;
    j["sigma"] = fit.params.stds;
    j["m"] = fit.direct_means;
    j["bic"] = fit.bic;
    j["log_likelihood"] = fit.log_likelihood;
    j["converged"] = fit.converged;
    if (fit.gof) j["gof"] = *fit.gof;
    else j["gof"] = nullptr;
    return j.dump();
}

MixtureFit fit_from_json(const std::string& text, std::size_t* n_out) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        raise(ErrorCode::config, std::string("invalid fit JSON: ") + e.what());
    }
    MixtureFit fit;
    try {
        fit.params.weights = j.at("weights").get<std::vector<double>>();
        fit.params.means = j.at("mu").get<std::vector<double>>();
        fit.params.stds = j.at("sigma").get<std::vector<double>>();
        fit.direct_means = j.at("m").get<std::vector<double>>();
        fit.bic = j.at("bic").get<double>();
        fit.log_likelihood = j.at("log_likelihood").get<double>();
        fit.converged = j.at("converged").get<bool>();
        if (j.contains("gof") && !j.at("gof").is_null()) fit.gof = j.at("gof").get<double>();
        if (n_out) *n_out = j.at("n").get<std::size_t>();
    } catch (const nlohmann::json::exception& e) {
        raise(ErrorCode::config, std::string("invalid fit JSON: ") + e.what());
    }
    if (fit.params.weights.size() != fit.params.means.size() ||
        fit.params.means.size() != fit.params.stds.size() ||
        fit.direct_means.size() != fit.params.weights.size())
        raise(ErrorCode::config, "invalid fit JSON: parameter arrays disagree in length");
    fit.component_empty.assign(fit.params.weights.size(), false);
    for (std::size_t k = 0; k < fit.params.weights.size(); ++k)
        if (fit.params.weights[k] <= 0.0 && fit.direct_means[k] == 0.0) fit.component_empty[k] = true;
    return fit;
}

}  // namespace ontask::mixture
