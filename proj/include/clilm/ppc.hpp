#pragma once

// Posterior predictive checking: draw parameters from a fitted posterior,
// simulate epidemics over the observed horizon from the observed initial
// condition, and compare the incidence curves (newly infectious counts per
// time step) against the observed curve via MSE, average pointwise SD and
// 95% interval coverage.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "clilm/epidemic.hpp"
#include "clilm/mcmc.hpp"
#include "clilm/model.hpp"
#include "clilm/parallel.hpp"
#include "clilm/population.hpp"
#include "clilm/simulate.hpp"

namespace clilm {

struct EpidemicCurve {
    std::vector<int> counts;  // counts[t-1] = newly infectious at time t

    int t_max() const { return static_cast<int>(counts.size()); }
};

inline EpidemicCurve epidemic_curve(const EpidemicRecord& record) {
    EpidemicCurve curve;
    curve.counts.assign(static_cast<std::size_t>(record.t_max()), 0);
    for (const auto& e : record.events()) {
        if (e.t_inf) ++curve.counts[static_cast<std::size_t>(*e.t_inf - 1)];
    }
    return curve;
}

// Epidemic generation under the CL-ILM: per-step infection probability is
// logistic(alpha0 + alpha1 * X_it) on the running covariate. An empty
// infectious set exerts no pressure, so the infection probability is 0
// regardless of transform (under the log transform the covariate would
// otherwise be undefined).
inline EpidemicRecord simulate_from_clilm(const ClilmParams& params, const Population& pop,
                                          const DistanceMatrix& dists,
                                          const Compartments& compartments, int t_end,
                                          std::vector<std::size_t> initial,
                                          std::uint64_t seed, int start_time = 1) {
    return detail::run_epidemic(
        pop, compartments, t_end, std::move(initial), seed,
        [&](std::size_t i, std::span<const std::size_t> infectious) {
            if (infectious.empty()) return 0.0;
            const double x = spatial_covariate(params.beta0, i, infectious, dists,
                                               params.transform);
            return clilm_infection_prob(params, x);
        },
        start_time);
}

enum class PpcModel { ilm, clilm };

enum class PpcReference { predictive_mean, observed };

struct PpcModelSpec {
    PpcModel kind = PpcModel::ilm;
    // CL-ILM only: the tuned spatial power and covariate transform
    double beta0 = 0.0;
    Transform transform = Transform::identity;
};

struct PpcConfig {
    std::size_t replicates = 500;
    PpcReference reference = PpcReference::predictive_mean;
    std::uint64_t seed = 1;
    unsigned jobs = 1;
};

struct PpcResult {
    std::vector<EpidemicCurve> curves;  // one per replicate
    std::vector<double> mean;           // pointwise predictive mean
    std::vector<double> lower;          // pointwise 2.5% quantile
    std::vector<double> upper;          // pointwise 97.5% quantile
    std::vector<int> observed;
    double mse = 0.0;
    double avg_sd = 0.0;
    double coverage = 0.0;
};

namespace detail {

// Type-7 quantile (linear interpolation between order statistics), the
// R default; values must be sorted ascending.
inline double quantile_type7(std::span<const double> sorted, double p) {
    const std::size_t n = sorted.size();
    if (n == 0) throw std::invalid_argument("quantile of empty sample");
    if (n == 1) return sorted[0];
    const double h = (static_cast<double>(n) - 1.0) * p;
    const std::size_t lo = static_cast<std::size_t>(std::floor(h));
    if (lo + 1 >= n) return sorted[n - 1];
    const double frac = h - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

}  // namespace detail

inline PpcResult run_ppc(const PosteriorSample& sample, const PpcModelSpec& model,
                         const Population& pop, const DistanceMatrix& dists,
                         const Compartments& compartments, const EpidemicRecord& observed,
                         const PpcConfig& config) {
    if (sample.draws.empty()) throw std::invalid_argument("ppc: posterior sample is empty");
    if (config.replicates < 2) throw std::invalid_argument("ppc: need at least 2 replicates");

    const int t_end = observed.t_max();
    const int start_time = observed.first_infection_time();
    if (start_time >= t_end) throw std::invalid_argument("ppc: observed record has no horizon");
    // observed initial condition, mapped onto population indices
    const auto rec_initial = observed.initial_cases();
    std::vector<std::size_t> initial;
    initial.reserve(rec_initial.size());
    for (const std::size_t r : rec_initial) {
        initial.push_back(pop.index_of(observed[r].id));
    }

    PpcResult result;
    result.curves.resize(config.replicates);
    parallel_for(config.replicates, config.jobs, [&](std::size_t s) {
        Rng pick(derive_seed(config.seed, 2 * s));
        const auto& params = sample.draws[pick.uniform_index(sample.draws.size())];
        const std::uint64_t sim_seed = derive_seed(config.seed, 2 * s + 1);
        EpidemicRecord rep =
            model.kind == PpcModel::ilm
                ? detail::run_epidemic(
                      pop, compartments, t_end, initial, sim_seed,
                      [&](std::size_t i, std::span<const std::size_t> infectious) {
                          return ilm_infection_prob({params[0], params[1]}, i, infectious,
                                                    dists);
                      },
                      start_time)
                : simulate_from_clilm(
                      {params[0], params[1], model.beta0, model.transform}, pop, dists,
                      compartments, t_end, initial, sim_seed, start_time);
        result.curves[s] = epidemic_curve(rep);
    });

    const EpidemicCurve obs_curve = epidemic_curve(observed);
    const std::size_t t_len = obs_curve.counts.size();
    for (const auto& c : result.curves) {
        if (c.counts.size() != t_len) throw std::runtime_error("ppc: horizon mismatch");
    }
    result.observed = obs_curve.counts;

    const double s_count = static_cast<double>(config.replicates);
    result.mean.assign(t_len, 0.0);
    result.lower.assign(t_len, 0.0);
    result.upper.assign(t_len, 0.0);
    std::vector<double> column(config.replicates);
    double sd_sum = 0.0;
    std::size_t covered = 0;
    for (std::size_t t = 0; t < t_len; ++t) {
        double m = 0.0;
        for (std::size_t s = 0; s < config.replicates; ++s) {
            column[s] = static_cast<double>(result.curves[s].counts[t]);
            m += column[s];
        }
        m /= s_count;
        result.mean[t] = m;
        double ss = 0.0;
        for (const double v : column) ss += (v - m) * (v - m);
        sd_sum += std::sqrt(ss / (s_count - 1.0));
        std::sort(column.begin(), column.end());
        result.lower[t] = detail::quantile_type7(column, 0.025);
        result.upper[t] = detail::quantile_type7(column, 0.975);
        const double obs = static_cast<double>(obs_curve.counts[t]);
        if (result.lower[t] <= obs && obs <= result.upper[t]) ++covered;
    }
    result.avg_sd = sd_sum / static_cast<double>(t_len);
    result.coverage = static_cast<double>(covered) / static_cast<double>(t_len);

    double sq_sum = 0.0;
    for (std::size_t s = 0; s < config.replicates; ++s) {
        for (std::size_t t = 0; t < t_len; ++t) {
            const double ref = config.reference == PpcReference::predictive_mean
                                   ? result.mean[t]
                                   : static_cast<double>(obs_curve.counts[t]);
            const double diff = static_cast<double>(result.curves[s].counts[t]) - ref;
            sq_sum += diff * diff;
        }
    }
    result.mse = sq_sum / (s_count * static_cast<double>(t_len));
    return result;
}

// Plot-ready CSV bundle: per-replicate curves, pointwise summary with the
// observed curve, and the scalar metrics.
inline void write_ppc_bundle(const PpcResult& result, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    {
        csv::Writer w(dir / "curves.csv");
        w.row({"replicate", "t", "count"});
        for (std::size_t s = 0; s < result.curves.size(); ++s) {
            const auto& counts = result.curves[s].counts;
            for (std::size_t t = 0; t < counts.size(); ++t) {
                w.row({std::to_string(s + 1), std::to_string(t + 1),
                       std::to_string(counts[t])});
            }
        }
        w.close();
    }
    {
        csv::Writer w(dir / "summary.csv");
        w.row({"t", "mean", "lo", "hi", "observed"});
        for (std::size_t t = 0; t < result.mean.size(); ++t) {
            w.row({std::to_string(t + 1), csv::format_double(result.mean[t]),
                   csv::format_double(result.lower[t]), csv::format_double(result.upper[t]),
                   std::to_string(result.observed[t])});
        }
        w.close();
    }
    {
        csv::Writer w(dir / "metrics.csv");
        w.row({"mse", "avg_sd", "coverage"});
        w.row({csv::format_double(result.mse), csv::format_double(result.avg_sd),
               csv::format_double(result.coverage)});
        w.close();
    }
}

}  // namespace clilm
