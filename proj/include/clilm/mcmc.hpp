#pragma once

// Adaptive random-walk Metropolis on two parameters. Gaussian proposals
// use a running empirical covariance of the chain, with a global scale
// steered toward 0.234 acceptance by Robbins-Monro updates whose step
// size decays like 1/iteration. Adaptation diminishes over the run, so
// the chain's ergodic behaviour is preserved.

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "clilm/csv.hpp"
#include "clilm/irls.hpp"
#include "clilm/likelihood.hpp"
#include "clilm/numeric.hpp"
#include "clilm/rng.hpp"

namespace clilm {

struct PriorSpec {
    // spatial ILM: alpha ~ U(0, alpha_max), beta ~ U(0, beta_max)
    double alpha_max = 5.0;
    double beta_max = 10.0;
    // CL-ILM: alpha0, alpha1 ~ independent Cauchy(0, cauchy_scale)
    double cauchy_location = 0.0;
    double cauchy_scale = 1.0;
};

struct McmcSettings {
    std::size_t iterations = 50000;
    std::size_t burn_in = 10000;
    std::size_t thin = 10;
    std::uint64_t seed = 1;
};

struct PosteriorSample {
    std::vector<std::array<double, 2>> draws;  // post burn-in, thinned
    std::vector<double> log_posts;             // log posterior at each draw
    double acceptance_rate = 0.0;              // accepted / proposed, whole run
    std::size_t burn_in = 0;
    std::size_t thin = 1;
    std::uint64_t seed = 0;
    std::array<std::string, 2> param_names{"param1", "param2"};
};

using Vec2 = std::array<double, 2>;

// Generic driver; log_target returns -inf outside the support. Also the
// calibration hook: pointing it at an analytic log-density must recover
// that density's moments.
template <class LogTarget>
PosteriorSample adaptive_metropolis(LogTarget&& log_target, Vec2 init,
                                    const McmcSettings& settings,
                                    Vec2 init_proposal_sd = {0.1, 0.1},
                                    double target_accept = 0.234) {
    if (settings.iterations <= settings.burn_in) {
        throw std::invalid_argument("mcmc: iterations must exceed burn_in");
    }
    if (settings.thin == 0) throw std::invalid_argument("mcmc: thin must be >= 1");

    double lp = log_target(init);
    if (!std::isfinite(lp)) {
        throw std::invalid_argument("mcmc: initial state has non-finite log posterior");
    }

    Rng rng(settings.seed);
    Vec2 x = init;

    // running mean / scatter of the chain (Welford)
    Vec2 mean = x;
    double c00 = 0.0, c01 = 0.0, c11 = 0.0;
    double log_scale = 0.0;
    std::size_t accepted = 0;

    PosteriorSample sample;
    sample.burn_in = settings.burn_in;
    sample.thin = settings.thin;
    sample.seed = settings.seed;
    sample.draws.reserve((settings.iterations - settings.burn_in) / settings.thin + 1);

    for (std::size_t iter = 1; iter <= settings.iterations; ++iter) {
        // proposal covariance: scale^2 * (empirical cov + eps I); fall back
        // to the initial diagonal until enough history has accumulated
        const double scale = std::exp(log_scale);
        double s00, s01, s11;
        if (iter > 10) {
            const double denom = static_cast<double>(iter - 1);
            s00 = c00 / denom + 1e-10;
            s01 = c01 / denom;
            s11 = c11 / denom + 1e-10;
        } else {
            s00 = init_proposal_sd[0] * init_proposal_sd[0];
            s01 = 0.0;
            s11 = init_proposal_sd[1] * init_proposal_sd[1];
        }
        // Cholesky of the 2x2 proposal covariance
        const double l00 = std::sqrt(s00);
        const double l10 = s01 / l00;
        const double l11 = std::sqrt(std::max(s11 - l10 * l10, 1e-300));
        const double z0 = rng.normal();
        const double z1 = rng.normal();
        const Vec2 proposal{x[0] + scale * l00 * z0,
                            x[1] + scale * (l10 * z0 + l11 * z1)};

        const double lp_prop = log_target(proposal);
        const double log_ratio = lp_prop - lp;
        double accept_prob = 0.0;
        if (std::isfinite(lp_prop)) {
            accept_prob = log_ratio >= 0.0 ? 1.0 : std::exp(log_ratio);
        }
        if (accept_prob > 0.0 && std::log(rng.uniform()) < log_ratio) {
            x = proposal;
            lp = lp_prop;
            ++accepted;
        }

        // Robbins-Monro scale update, gain ~ 1/iteration
        const double gain = 4.0 / (10.0 + static_cast<double>(iter));
        log_scale += gain * (accept_prob - target_accept);

        // covariance update with the (possibly repeated) current state
        const double w = 1.0 / static_cast<double>(iter);
        const Vec2 delta{x[0] - mean[0], x[1] - mean[1]};
        mean[0] += w * delta[0];
        mean[1] += w * delta[1];
        const Vec2 delta2{x[0] - mean[0], x[1] - mean[1]};
        c00 += delta[0] * delta2[0];
        c01 += delta[0] * delta2[1];
        c11 += delta[1] * delta2[1];

        if (iter > settings.burn_in && (iter - settings.burn_in) % settings.thin == 0) {
            sample.draws.push_back(x);
            sample.log_posts.push_back(lp);
        }
    }
    sample.acceptance_rate =
        static_cast<double>(accepted) / static_cast<double>(settings.iterations);
    if (sample.draws.empty()) {
        throw std::runtime_error("mcmc: no draws retained after burn-in and thinning");
    }
    return sample;
}

// Posterior sampler for the spatial ILM under uniform box priors.
inline PosteriorSample mcmc_ilm(const EpidemicRecord& record, const Population& pop,
                                const DistanceMatrix& dists, const PriorSpec& priors,
                                const McmcSettings& settings,
                                std::optional<Vec2> init = std::nullopt) {
    const IlmLikelihoodCache cache(record, pop, dists);
    const double log_prior = -std::log(priors.alpha_max * priors.beta_max);
    auto log_target = [&](const Vec2& p) {
        if (!(p[0] > 0.0) || p[0] >= priors.alpha_max || !(p[1] > 0.0) ||
            p[1] >= priors.beta_max) {
            return -std::numeric_limits<double>::infinity();
        }
        return cache.log_likelihood({p[0], p[1]}).value + log_prior;
    };
    const Vec2 start = init ? *init : Vec2{priors.alpha_max / 2.0, priors.beta_max / 2.0};
    const Vec2 proposal_sd{0.05 * priors.alpha_max, 0.05 * priors.beta_max};
    PosteriorSample sample =
        adaptive_metropolis(log_target, start, settings, proposal_sd);
    sample.param_names = {"alpha", "beta"};
    return sample;
}

inline PosteriorSample mcmc_ilm(const EpidemicRecord& record, const Population& pop,
                                const PriorSpec& priors, const McmcSettings& settings,
                                std::optional<Vec2> init = std::nullopt) {
    return mcmc_ilm(record, pop, distance_matrix(pop), priors, settings, init);
}

inline double log_cauchy_density(double x, double location, double scale) {
    const double u = (x - location) / scale;
    return -std::log(std::numbers::pi * scale * (1.0 + u * u));
}

// Posterior sampler for the CL-ILM on a converted binary table. The chain
// starts from the IRLS fit with its curvature as the initial proposal
// shape when that fit succeeds; otherwise from the origin at unit scale.
inline PosteriorSample mcmc_clilm(const BinaryTable& table, const PriorSpec& priors,
                                  const McmcSettings& settings) {
    auto log_target = [&](const Vec2& p) {
        return table_log_likelihood(table.rows, p[0], p[1]).value +
               log_cauchy_density(p[0], priors.cauchy_location, priors.cauchy_scale) +
               log_cauchy_density(p[1], priors.cauchy_location, priors.cauchy_scale);
    };
    Vec2 start{0.0, 0.0};
    Vec2 proposal_sd{1.0, 1.0};
    try {
        const IrlsFit fit = irls_fit(table);
        start = {fit.alpha0, fit.alpha1};
        // diagonal of the inverse observed information at the MLE
        double w00 = 0.0, w01 = 0.0, w11 = 0.0;
        for (const auto& row : table.rows) {
            const double p = logistic(fit.alpha0 + fit.alpha1 * row.x);
            const double w = p * (1.0 - p);
            w00 += w;
            w01 += w * row.x;
            w11 += w * row.x * row.x;
        }
        const double det = w00 * w11 - w01 * w01;
        if (det > 0.0 && w00 > 0.0 && w11 > 0.0) {
            proposal_sd = {std::sqrt(w11 / det), std::sqrt(w00 / det)};
        }
    } catch (const std::exception&) {
        // keep defaults
    }
    PosteriorSample sample = adaptive_metropolis(log_target, start, settings, proposal_sd);
    sample.param_names = {"alpha0", "alpha1"};
    return sample;
}

inline void write_posterior_csv(const PosteriorSample& sample,
                                const std::filesystem::path& path) {
    csv::Writer w(path);
    w.comment(" params=" + sample.param_names[0] + "," + sample.param_names[1] +
              " acceptance_rate=" + csv::format_double(sample.acceptance_rate) +
              " burn_in=" + std::to_string(sample.burn_in) +
              " thin=" + std::to_string(sample.thin) +
              " seed=" + std::to_string(sample.seed));
    w.row({"iter", "param1", "param2", "log_post"});
    for (std::size_t k = 0; k < sample.draws.size(); ++k) {
        w.row({std::to_string(k + 1), csv::format_double(sample.draws[k][0]),
               csv::format_double(sample.draws[k][1]),
               csv::format_double(sample.log_posts[k])});
    }
    w.close();
}

inline PosteriorSample read_posterior_csv(const std::filesystem::path& path) {
    const csv::File file = csv::read_file(path, {"iter", "param1", "param2", "log_post"});
    PosteriorSample sample;
    for (const auto& rec : file.records) {
        sample.draws.push_back({csv::read_double(path, rec, 1, "param1"),
                                csv::read_double(path, rec, 2, "param2")});
        sample.log_posts.push_back(csv::read_double(path, rec, 3, "log_post"));
    }
    for (const auto& comment : file.comments) {
        const auto pos = comment.find("acceptance_rate=");
        if (pos != std::string::npos) {
            sample.acceptance_rate = std::stod(comment.substr(pos + 16));
        }
    }
    return sample;
}

}  // namespace clilm
