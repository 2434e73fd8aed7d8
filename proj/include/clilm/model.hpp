#pragma once

// Model parameters and the per-individual, per-time infection probability
// functions.
//
// Spatial ILM:  P_it = 1 - exp(-alpha * sum_{j in I(t)} d_ij^-beta)
// CL-ILM:       logit P_it = alpha0 + alpha1 * X_it,
//               X_it = sum_{j in I(t)} d_ij^-beta0  (optionally log-transformed),
// with the spatial power beta0 held fixed so the predictor is linear.

#include <cmath>
#include <span>
#include <stdexcept>
#include <string>

#include "clilm/numeric.hpp"
#include "clilm/population.hpp"

namespace clilm {

struct IlmParams {
    double alpha = 0.0;  // baseline susceptibility
    double beta = 0.0;   // spatial power

    // Strict positivity is required of simulation/estimation configurations.
    // The evaluators below also accept the alpha = 0 boundary (zero hazard),
    // which grid search and likelihood limits rely on.
    void validate() const {
        if (!(alpha > 0.0)) throw std::invalid_argument("ilm alpha must be > 0");
        if (!(beta > 0.0)) throw std::invalid_argument("ilm beta must be > 0");
    }
};

enum class Transform { identity, log };

inline std::string to_string(Transform t) {
    return t == Transform::log ? "log" : "identity";
}

inline Transform transform_from_string(std::string_view s) {
    if (s == "identity") return Transform::identity;
    if (s == "log") return Transform::log;
    throw std::invalid_argument("unknown transform '" + std::string(s) +
                                "' (expected 'identity' or 'log')");
}

struct ClilmParams {
    double alpha0 = 0.0;  // intercept, log-odds scale
    double alpha1 = 0.0;  // slope on the spatial covariate
    double beta0 = 0.0;   // fixed spatial power; may be negative
    Transform transform = Transform::identity;
};

enum class Framework { si, sir };

inline std::string to_string(Framework f) { return f == Framework::sir ? "sir" : "si"; }

inline Framework framework_from_string(std::string_view s) {
    if (s == "si") return Framework::si;
    if (s == "sir") return Framework::sir;
    throw std::invalid_argument("unknown framework '" + std::string(s) +
                                "' (expected 'si' or 'sir')");
}

struct Compartments {
    Framework framework = Framework::si;
    double infectious_period_mean = 0.0;  // Poisson mean, SIR only

    void validate() const {
        if (framework == Framework::sir && !(infectious_period_mean > 0.0)) {
            throw std::invalid_argument("sir requires infectious_period_mean > 0");
        }
    }
};

// Total infectious pressure on susceptible i: sum_{j in infectious} d_ij^-beta.
inline double spatial_pressure(double beta, std::size_t i,
                               std::span<const std::size_t> infectious,
                               const DistanceMatrix& dists) {
    double sum = 0.0;
    for (const std::size_t j : infectious) {
        sum += std::pow(dists(i, j), -beta);
    }
    return sum;
}

// P_it under the spatial ILM. Always in [0, 1): the hazard is clamped
// inside the exp so saturation never reaches 1 exactly. Empty infectious
// set (or alpha = 0) gives exactly 0.
inline double ilm_infection_prob(const IlmParams& params, std::size_t i,
                                 std::span<const std::size_t> infectious,
                                 const DistanceMatrix& dists) {
    const double hazard = params.alpha * spatial_pressure(params.beta, i, infectious, dists);
    if (hazard <= 0.0) return 0.0;
    return -std::expm1(-std::min(hazard, 36.0));
}

// X_it covariate for the CL-ILM, optionally log-transformed.
inline double spatial_covariate(double beta0, std::size_t i,
                                std::span<const std::size_t> infectious,
                                const DistanceMatrix& dists, Transform transform) {
    const double raw = spatial_pressure(beta0, i, infectious, dists);
    if (transform == Transform::identity) return raw;
    if (!(raw > 0.0)) {
        throw std::domain_error("log transform requires positive covariate, got " +
                                csv::format_double(raw));
    }
    return std::log(raw);
}

// P_it under the CL-ILM given a precomputed covariate; strictly in (0, 1)
// and overflow-safe for any finite linear predictor.
inline double clilm_infection_prob(const ClilmParams& params, double covariate) {
    if (!std::isfinite(covariate)) {
        throw std::invalid_argument("clilm covariate must be finite");
    }
    return logistic(params.alpha0 + params.alpha1 * covariate);
}

}  // namespace clilm
