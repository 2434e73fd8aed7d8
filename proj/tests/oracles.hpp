#pragma once

// Test-only reference implementations, written from first principles and
// kept independent of the library's likelihood/conversion code paths:
// states are re-derived from the raw event times and every Bernoulli
// factor is evaluated with plain pow/exp/log.

#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "clilm/binary_table.hpp"
#include "clilm/epidemic.hpp"
#include "clilm/population.hpp"

namespace oracles {

inline double euclid(const clilm::Population& pop, std::size_t i, std::size_t j) {
    const double dx = pop[i].x - pop[j].x;
    const double dy = pop[i].y - pop[j].y;
    return std::sqrt(dx * dx + dy * dy);
}

// log of the logistic probability and its complement, written out here so
// the oracle stays accurate for extreme linear predictors.
inline double log_logit_p(double z) {
    return z >= 0.0 ? -std::log1p(std::exp(-z)) : z - std::log1p(std::exp(z));
}

inline double log_logit_q(double z) { return log_logit_p(-z); }

inline bool oracle_infectious(const clilm::EventTimes& e, int t) {
    if (!e.t_inf || *e.t_inf > t) return false;
    if (e.t_rem && *e.t_rem <= t) return false;
    return true;
}

inline int oracle_t0(const clilm::EpidemicRecord& rec) {
    int t0 = std::numeric_limits<int>::max();
    for (const auto& e : rec.events()) {
        if (e.t_inf && *e.t_inf < t0) t0 = *e.t_inf;
    }
    return t0;
}

// Per-factor spatial ILM log-likelihood: product over t of the infection
// and escape probabilities, initial case(s) conditioned out.
inline double ilm_loglik(const clilm::EpidemicRecord& rec, const clilm::Population& pop,
                         double alpha, double beta) {
    const int t0 = oracle_t0(rec);
    double ll = 0.0;
    for (int t = 1; t < rec.t_max(); ++t) {
        for (std::size_t i = 0; i < pop.size(); ++i) {
            const auto& e = rec[i];
            if (e.t_inf && *e.t_inf == t0) continue;
            const bool event_now = e.t_inf && *e.t_inf == t + 1;
            const bool susceptible_after = !e.t_inf || *e.t_inf > t + 1;
            if (!event_now && !susceptible_after) continue;
            double pressure = 0.0;
            for (std::size_t j = 0; j < pop.size(); ++j) {
                if (j != i && oracle_infectious(rec[j], t)) {
                    pressure += std::pow(euclid(pop, i, j), -beta);
                }
            }
            const double p = -std::expm1(-alpha * pressure);
            ll += event_now ? std::log(p) : std::log1p(-p);
        }
    }
    return ll;
}

// Per-factor CL-ILM log-likelihood over the binary index set.
inline double clilm_loglik(const clilm::EpidemicRecord& rec, const clilm::Population& pop,
                           double alpha0, double alpha1, double beta0,
                           clilm::Transform transform) {
    const int t0 = oracle_t0(rec);
    double ll = 0.0;
    for (std::size_t i = 0; i < pop.size(); ++i) {
        const auto& e = rec[i];
        if (e.t_inf && *e.t_inf == t0) continue;
        for (int t = t0; t < rec.t_max(); ++t) {
            if (e.t_inf && t > *e.t_inf - 1) break;
            double pressure = 0.0;
            bool any_infectious = false;
            for (std::size_t j = 0; j < pop.size(); ++j) {
                if (j != i && oracle_infectious(rec[j], t)) {
                    any_infectious = true;
                    pressure += std::pow(euclid(pop, i, j), -beta0);
                }
            }
            if (!any_infectious) break;
            const double x =
                transform == clilm::Transform::log ? std::log(pressure) : pressure;
            const double z = alpha0 + alpha1 * x;
            const bool event_now = e.t_inf && *e.t_inf == t + 1;
            ll += event_now ? log_logit_p(z) : log_logit_q(z);
        }
    }
    return ll;
}

// Timeline-walking row counter: for each individual, the number of time
// points it sits in the binary data.
inline std::size_t binary_row_count(const clilm::EpidemicRecord& rec,
                                    const clilm::Population& pop) {
    const int t0 = oracle_t0(rec);
    std::size_t rows = 0;
    for (std::size_t i = 0; i < pop.size(); ++i) {
        const auto& e = rec[i];
        if (e.t_inf && *e.t_inf == t0) continue;
        for (int t = t0; t < rec.t_max(); ++t) {
            if (e.t_inf && t > *e.t_inf - 1) break;
            bool any_infectious = false;
            for (std::size_t j = 0; j < pop.size(); ++j) {
                if (j != i && oracle_infectious(rec[j], t)) any_infectious = true;
            }
            if (!any_infectious) break;
            ++rows;
        }
    }
    return rows;
}

inline clilm::Population toy_population() {
    return clilm::Population(
        {{"1", 2.6, 1.5}, {"2", 3.7, 6.8}, {"3", 5.7, 6.5}, {"4", 5.9, 6.3}});
}

inline clilm::EpidemicRecord toy_record() {
    return clilm::EpidemicRecord({{"1", 5, std::nullopt},
                                  {"2", 4, std::nullopt},
                                  {"3", 2, std::nullopt},
                                  {"4", 3, std::nullopt}},
                                 5);
}

}  // namespace oracles
